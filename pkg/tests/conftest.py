import json
import random

import pytest

from eaqa.corpus import (
    ArgumentAnnotation,
    Corpus,
    Document,
    EventInstance,
    Ontology,
    Span,
)
from eaqa.scoring import PredictionRecord


def make_doc(sentences, doc_id="doc"):
    """Build a Document from a list of token lists (one per sentence)."""
    tokens = []
    ranges = []
    for sent in sentences:
        start = len(tokens)
        tokens.extend(sent)
        ranges.append((start, len(tokens)))
    return Document(doc_id=doc_id, tokens=tuple(tokens), sentences=tuple(ranges))


def make_event(event_type, trigger, arguments=()):
    return EventInstance(
        event_type=event_type,
        trigger=Span(*trigger),
        arguments=tuple(ArgumentAnnotation(role=r, span=Span(s, e)) for r, s, e in arguments),
    )


@pytest.fixture
def importing_doc():
    """Five-sentence document around an 'importing' event with an intra-
    sentential artifact and an inter-sentential origin."""
    doc = make_doc(
        [
            ["Smugglers", "kept", "trade", "routes", "open", "."],
            ["They", "were", "importing", "oil", "through", "the", "border", "."],
            ["Trucks", "crossed", "nightly", "."],
            ["The", "oil", "came", "from", "Syria", "and", "Iraq", "."],
            ["Profits", "funded", "more", "smuggling", "."],
        ],
        doc_id="rams-importing-1",
    )
    event = make_event(
        "transaction.import",
        (8, 8),  # "importing", sentence 1
        [("artifact", 9, 9), ("origin", 22, 24)],  # "oil" (sent 1), "Syria and Iraq" (sent 3)
    )
    return doc, [event]


@pytest.fixture
def agreement_doc():
    """Four-sentence sample with trigger 'agreement' and intra-sentential
    arguments Clinton (violator) and Iran (otherparticipant)."""
    doc = make_doc(
        [
            ["Hillary", "Clinton", "spoke", "on", "Monday", "."],
            ["She", "said", "Iran", "broke", "rules", "."],
            ["Clinton", "called", "the", "agreement", "with", "Iran", "dead", ",",
             "blaming", "its", "leaders", "and", "the", "country", "again", "."],
            ["Iran", "rejected", "the", "charge", "."],
        ],
        doc_id="rams-agreement-1",
    )
    event = make_event(
        "government.agreement",
        (15, 15),  # "agreement" in sentence 2
        [("violator", 12, 12), ("otherparticipant", 17, 17)],  # "Clinton", "Iran"
    )
    return doc, [event]


@pytest.fixture
def tiny_ontology():
    return Ontology(
        {
            "transaction.import": ("artifact", "origin", "destination"),
            "government.agreement": ("violator", "otherparticipant", "place"),
        }
    )


def write_canonical(path, entries):
    """Write (doc, events) pairs in the canonical JSONL format."""
    with open(path, "w", encoding="utf-8") as handle:
        for doc, events in entries:
            record = {
                "doc_id": doc.doc_id,
                "tokens": list(doc.tokens),
                "sentences": [[s, e] for s, e in doc.sentences],
                "events": [
                    {
                        "event_type": ev.event_type,
                        "trigger": [ev.trigger.start, ev.trigger.end],
                        "arguments": [
                            {"role": a.role, "start": a.span.start, "end": a.span.end}
                            for a in ev.arguments
                        ],
                    }
                    for ev in events
                ],
            }
            handle.write(json.dumps(record) + "\n")


def random_corpus(rng, max_docs=10, max_roles=5, allow_duplicate_roles=True):
    """Small random gold corpus for scoring tests."""
    roles = [f"role{i}" for i in range(rng.randint(1, max_roles))]
    entries = []
    for d in range(rng.randint(1, max_docs)):
        sentences = []
        for _ in range(rng.randint(1, 4)):
            n = rng.randint(3, 8)
            sentences.append([f"w{rng.randint(0, 20)}" for _ in range(n)])
        doc = make_doc(sentences, doc_id=f"d{d}")
        events = []
        for _ in range(rng.randint(1, 2)):
            t = rng.randrange(doc.token_count)
            args = []
            for _ in range(rng.randint(0, 4)):
                role = rng.choice(roles)
                s = rng.randrange(doc.token_count)
                e = min(doc.token_count - 1, s + rng.randint(0, 2))
                args.append((role, s, e))
            if not allow_duplicate_roles:
                seen = set()
                args = [a for a in args if not (a[0] in seen or seen.add(a[0]))]
            events.append(make_event("ev.type", (t, t), args))
        entries.append((doc, events))
    return Corpus(entries), roles


def random_predictions(rng, corpus, roles, system_id="sys"):
    """One prediction or abstention per (doc, event, role) with mixed quality."""
    preds = []
    for doc, events in corpus:
        for ei, event in enumerate(events):
            gold_roles = [a.role for a in event.arguments]
            for role in roles:
                kind = rng.random()
                if kind < 0.2:
                    continue  # no record at all
                if kind < 0.35:
                    span = None  # abstain
                elif kind < 0.65 and gold_roles:
                    arg = rng.choice(event.arguments)
                    span = arg.span if arg.role == role or rng.random() < 0.5 else None
                else:
                    s = rng.randrange(doc.token_count)
                    span = Span(s, min(doc.token_count - 1, s + rng.randint(0, 2)))
                preds.append(
                    PredictionRecord(
                        doc_id=doc.doc_id, event_index=ei, role=role,
                        span=span, system_id=system_id,
                    )
                )
    return preds


def brute_force_strict(preds, corpus):
    """Independent O(P*G) strict counter used as the scoring oracle."""
    golds = []
    for doc, events in corpus:
        for ei, event in enumerate(events):
            for arg in event.arguments:
                golds.append(
                    [doc.doc_id, ei, arg.role, (arg.span.start, arg.span.end), False]
                )
    predicted = 0
    correct = 0
    for pred in preds:
        if pred.span is None:
            continue
        predicted += 1
        for gold in golds:
            if (
                not gold[4]
                and gold[0] == pred.doc_id
                and gold[1] == pred.event_index
                and gold[2] == pred.role
                and gold[3] == (pred.span.start, pred.span.end)
            ):
                gold[4] = True
                correct += 1
                break
    gold_count = len(golds)
    precision = correct / predicted if predicted else 0.0
    recall = correct / gold_count if gold_count else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1, predicted, gold_count, correct


def seeded_rng(seed):
    return random.Random(seed)
