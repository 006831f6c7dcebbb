"""Toolkit for turning event-argument corpora into extractive QA datasets,
augmenting them, prompting completion endpoints, and scoring span
predictions."""

__version__ = "0.1.0"
