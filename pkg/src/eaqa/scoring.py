"""Span-match evaluation: strict and lenient scoring, distance/role/event
breakdowns, the role confusion matrix, and the automated error taxonomy.

Strict correctness compares first/last token indexes plus the role, never
the text. Lenient correctness (for generative predictors) accepts a
prediction whose text contains the gold argument text. When an event has
duplicate gold roles, one matching prediction consumes one gold instance
(greedy, document order); the rest count as misses — the guaranteed-error
class for single-span predictors.
"""

import csv
import json
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .corpus import Corpus, CorefChain, Span, argument_distance, sentence_of
from .errors import ScoringError
from . import jsonl


@dataclass(frozen=True)
class PredictionRecord:
    doc_id: str
    event_index: int
    role: str
    span: Span | None
    text: str | None = None
    system_id: str = "system"

    @property
    def key(self) -> tuple[str, int, str, str]:
        return (self.doc_id, self.event_index, self.role, self.system_id)


def write_predictions(preds: Sequence[PredictionRecord], path: str) -> None:
    records = []
    for p in sorted(preds, key=lambda p: p.key):
        record: dict[str, Any] = {
            "doc_id": p.doc_id,
            "event_index": p.event_index,
            "role": p.role,
            "span": None if p.span is None else {"start": p.span.start, "end": p.span.end},
        }
        if p.text is not None:
            record["text"] = p.text
        record["system_id"] = p.system_id
        records.append(record)
    jsonl.write_records(path, records)


def read_predictions(path: str) -> list[PredictionRecord]:
    preds: list[PredictionRecord] = []
    seen: set[tuple] = set()
    for lineno, record in jsonl.read_records(path):
        try:
            raw_span = record["span"]
            pred = PredictionRecord(
                doc_id=record["doc_id"],
                event_index=record["event_index"],
                role=record["role"],
                span=None if raw_span is None else Span(raw_span["start"], raw_span["end"]),
                text=record.get("text"),
                system_id=record.get("system_id", "system"),
            )
        except KeyError as exc:
            raise ScoringError("missing field", line=lineno, field=str(exc)) from exc
        if pred.key in seen:
            raise ScoringError(f"duplicate prediction for {pred.key}", line=lineno)
        seen.add(pred.key)
        preds.append(pred)
    return preds


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class EvalReport:
    predicted: int
    gold: int
    correct: int
    frequency: float | None = None
    by_distance: dict[str, "EvalReport"] | None = None
    by_role: dict[str, "EvalReport"] | None = None
    by_event: dict[str, "EvalReport"] | None = None

    @property
    def precision(self) -> float:
        return self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        return _f1(self.precision, self.recall)

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "predicted": self.predicted,
            "gold": self.gold,
            "correct": self.correct,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }
        if self.frequency is not None:
            out["frequency"] = self.frequency
        for name in ("by_distance", "by_role", "by_event"):
            sub = getattr(self, name)
            if sub is not None:
                out[name] = {key: rep.to_json_dict() for key, rep in sub.items()}
        return out

    @classmethod
    def from_json_dict(cls, raw: Mapping[str, Any]) -> "EvalReport":
        report = cls(
            predicted=raw["predicted"],
            gold=raw["gold"],
            correct=raw["correct"],
            frequency=raw.get("frequency"),
        )
        for name in ("by_distance", "by_role", "by_event"):
            if name in raw:
                setattr(
                    report, name,
                    {key: cls.from_json_dict(sub) for key, sub in raw[name].items()},
                )
        return report

    def table(self, title: str = "overall") -> str:
        lines = [
            f"{'':<12}{'P':>8}{'R':>8}{'F1':>8}{'pred':>7}{'gold':>7}{'corr':>7}",
            f"{title:<12}{self.precision:>8.4f}{self.recall:>8.4f}{self.f1:>8.4f}"
            f"{self.predicted:>7}{self.gold:>7}{self.correct:>7}",
        ]
        for name in ("by_distance", "by_role", "by_event"):
            sub = getattr(self, name)
            if sub is not None:
                lines.append(f"-- {name.replace('_', ' ')} --")
                for key, rep in sub.items():
                    lines.append(
                        f"{key:<12}{rep.precision:>8.4f}{rep.recall:>8.4f}{rep.f1:>8.4f}"
                        f"{rep.predicted:>7}{rep.gold:>7}{rep.correct:>7}"
                    )
        return "\n".join(lines)


def write_report(report: EvalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_json_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_report(path: str) -> EvalReport:
    with open(path, encoding="utf-8") as handle:
        return EvalReport.from_json_dict(json.load(handle))


def _gold_event(corpus: Corpus, pred: PredictionRecord):
    if pred.doc_id not in corpus:
        raise ScoringError(f"prediction references unknown doc_id '{pred.doc_id}'")
    doc, events = corpus.entry(pred.doc_id)
    if not 0 <= pred.event_index < len(events):
        raise ScoringError(
            f"prediction references event {pred.event_index} of doc '{pred.doc_id}' "
            f"which has {len(events)} events"
        )
    return doc, events[pred.event_index]


def _total_gold(corpus: Corpus) -> int:
    return sum(len(ev.arguments) for _, events in corpus for ev in events)


def _check_single_system(preds: Sequence[PredictionRecord]) -> None:
    systems = {p.system_id for p in preds}
    if len(systems) > 1:
        raise ScoringError(
            f"predictions mix system_ids {sorted(systems)}; score one system at a time"
        )


def _strict_matches(
    preds: Sequence[PredictionRecord], corpus: Corpus
) -> tuple[list[tuple[PredictionRecord, Span]], int]:
    """Greedy first-match pairs of (prediction, consumed gold span) plus the
    count of non-abstaining predictions."""
    _check_single_system(preds)
    matches: list[tuple[PredictionRecord, Span]] = []
    used: dict[tuple[str, int], set[int]] = {}
    predicted = 0
    for pred in preds:
        _, event = _gold_event(corpus, pred)
        if pred.span is None:
            continue
        predicted += 1
        taken = used.setdefault((pred.doc_id, pred.event_index), set())
        for ai, arg in enumerate(event.arguments):
            if ai in taken:
                continue
            if arg.role == pred.role and arg.span == pred.span:
                taken.add(ai)
                matches.append((pred, arg.span))
                break
    return matches, predicted


def score_strict(preds: Sequence[PredictionRecord], corpus: Corpus) -> EvalReport:
    """Exact-match scoring on (start, end, role) token indexes.

    Abstentions (span None) count toward neither precision nor recall.
    """
    matches, predicted = _strict_matches(preds, corpus)
    return EvalReport(predicted=predicted, gold=_total_gold(corpus), correct=len(matches))


def _norm(text: str) -> str:
    return " ".join(text.split()).casefold()


def score_lenient(preds: Sequence[PredictionRecord], corpus: Corpus) -> EvalReport:
    """Containment scoring for generative predictors: a prediction is
    correct when its text includes the gold argument text
    (whitespace-normalized, case-folded)."""
    _check_single_system(preds)
    predicted = 0
    correct = 0
    for pred in preds:
        doc, event = _gold_event(corpus, pred)
        if pred.text is None:
            if pred.span is None:
                continue  # abstention
            raise ScoringError(
                f"missing predicted_text for lenient scoring of {pred.key}"
            )
        predicted += 1
        pred_text = _norm(pred.text)
        for arg in event.arguments:
            if arg.role == pred.role and _norm(doc.span_text(arg.span)) in pred_text:
                correct += 1
                break
    return EvalReport(predicted=predicted, gold=_total_gold(corpus), correct=correct)


def attach_span_text(preds: Sequence[PredictionRecord], corpus: Corpus) -> list[PredictionRecord]:
    """Fill predicted_text from the predicted span, for lenient scoring of
    span predictors."""
    out = []
    for pred in preds:
        if pred.text is None and pred.span is not None:
            doc, _ = _gold_event(corpus, pred)
            pred = PredictionRecord(
                doc_id=pred.doc_id, event_index=pred.event_index, role=pred.role,
                span=pred.span, text=doc.span_text(pred.span), system_id=pred.system_id,
            )
        out.append(pred)
    return out


DISTANCE_BUCKETS = ("<-2", "-2", "-1", "0", "1", "2", ">2")


def distance_bucket(d: int) -> str:
    if d < -2:
        return "<-2"
    if d > 2:
        return ">2"
    return str(d)


def breakdown_by_distance(preds: Sequence[PredictionRecord], corpus: Corpus) -> dict[str, EvalReport]:
    """Strict sub-reports keyed by trigger-to-argument sentence distance.

    Distances -2..+2 get individual buckets; anything farther pools into
    the sentinel buckets. All seven buckets are always present.
    """
    gold: Counter[str] = Counter()
    predicted: Counter[str] = Counter()
    correct: Counter[str] = Counter()
    for doc, events in corpus:
        for event in events:
            for arg in event.arguments:
                gold[distance_bucket(argument_distance(doc, event, arg))] += 1
    for pred in preds:
        doc, event = _gold_event(corpus, pred)
        if pred.span is None:
            continue
        d = sentence_of(doc, pred.span.start) - sentence_of(doc, event.trigger.start)
        predicted[distance_bucket(d)] += 1
    matches, _ = _strict_matches(preds, corpus)
    for pred, gold_span in matches:
        doc, event = _gold_event(corpus, pred)
        d = sentence_of(doc, gold_span.start) - sentence_of(doc, event.trigger.start)
        correct[distance_bucket(d)] += 1
    return {
        bucket: EvalReport(predicted=predicted[bucket], gold=gold[bucket], correct=correct[bucket])
        for bucket in DISTANCE_BUCKETS
    }


def delta_f1(
    baseline: Mapping[str, EvalReport], system: Mapping[str, EvalReport]
) -> dict[str, float | None]:
    """Relative F1 improvement of ``system`` over ``baseline`` per bucket,
    in percent; None where the baseline F1 is zero."""
    out: dict[str, float | None] = {}
    for bucket in baseline:
        base = baseline[bucket].f1
        if bucket not in system:
            continue
        out[bucket] = None if base == 0 else 100.0 * (system[bucket].f1 - base) / base
    return out


def breakdown_by_role(preds: Sequence[PredictionRecord], corpus: Corpus) -> dict[str, EvalReport]:
    gold: Counter[str] = Counter()
    predicted: Counter[str] = Counter()
    correct: Counter[str] = Counter()
    for _, events in corpus:
        for event in events:
            for arg in event.arguments:
                gold[arg.role] += 1
    for pred in preds:
        _gold_event(corpus, pred)
        if pred.span is not None:
            predicted[pred.role] += 1
    matches, _ = _strict_matches(preds, corpus)
    for pred, _ in matches:
        correct[pred.role] += 1
    total_gold = sum(gold.values())
    roles = sorted(set(gold) | set(predicted))
    return {
        role: EvalReport(
            predicted=predicted[role], gold=gold[role], correct=correct[role],
            frequency=(gold[role] / total_gold) if total_gold else None,
        )
        for role in roles
    }


def breakdown_by_event(
    preds: Sequence[PredictionRecord], corpus: Corpus, top_k: int = 15
) -> dict[str, EvalReport]:
    """Strict sub-reports for the top_k event types most frequent in gold,
    annotated with their gold-argument frequency share."""
    gold: Counter[str] = Counter()
    predicted: Counter[str] = Counter()
    correct: Counter[str] = Counter()
    for _, events in corpus:
        for event in events:
            for _ in event.arguments:
                gold[event.event_type] += 1
    for pred in preds:
        _, event = _gold_event(corpus, pred)
        if pred.span is not None:
            predicted[event.event_type] += 1
    matches, _ = _strict_matches(preds, corpus)
    for pred, _ in matches:
        _, event = _gold_event(corpus, pred)
        correct[event.event_type] += 1
    total_gold = sum(gold.values())
    ranked = sorted(gold.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return {
        event_type: EvalReport(
            predicted=predicted[event_type], gold=count, correct=correct[event_type],
            frequency=(count / total_gold) if total_gold else None,
        )
        for event_type, count in ranked
    }


@dataclass
class ConfusionMatrix:
    """Gold-role rows vs predicted-role columns, restricted to predictions
    whose span exactly matches some gold span of the event."""

    labels: tuple[str, ...]
    counts: list[list[int]]

    def cell(self, gold_role: str, predicted_role: str) -> int:
        return self.counts[self.labels.index(gold_role)][self.labels.index(predicted_role)]

    def diagonal_sum(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.labels)))

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["gold\\predicted", *self.labels])
            for label, row in zip(self.labels, self.counts):
                writer.writerow([label, *row])


def role_confusion(preds: Sequence[PredictionRecord], corpus: Corpus) -> ConfusionMatrix:
    """Full-label confusion matrix; its diagonal equals the strict correct
    count. Use :func:`pool_confusion` for the top-k display form."""
    pairs: list[tuple[str, str]] = []
    for pred in preds:
        _, event = _gold_event(corpus, pred)
        if pred.span is None:
            continue
        candidates = [arg for arg in event.arguments if arg.span == pred.span]
        if not candidates:
            continue
        same_role = [arg for arg in candidates if arg.role == pred.role]
        gold_arg = same_role[0] if same_role else candidates[0]
        pairs.append((gold_arg.role, pred.role))
    labels = tuple(sorted({role for pair in pairs for role in pair}))
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for gold_role, pred_role in pairs:
        counts[index[gold_role]][index[pred_role]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def pool_confusion(matrix: ConfusionMatrix, corpus: Corpus, top_k: int = 15) -> ConfusionMatrix:
    """Display pooling: keep the top_k gold-frequent roles, fold the rest
    into 'other'. The pooled [other][other] cell mixes correct and
    mismatched pairs, so diagonal bookkeeping holds only on the full matrix.
    """
    freq: Counter[str] = Counter()
    for _, events in corpus:
        for event in events:
            for arg in event.arguments:
                freq[arg.role] += 1
    keep = {role for role, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]}
    labels = tuple(sorted(keep & set(matrix.labels))) + ("other",)
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for gi, gold_role in enumerate(matrix.labels):
        for pi, pred_role in enumerate(matrix.labels):
            value = matrix.counts[gi][pi]
            if value:
                row = index[gold_role] if gold_role in index else index["other"]
                col = index[pred_role] if pred_role in index else index["other"]
                counts[row][col] += value
    return ConfusionMatrix(labels=labels, counts=counts)


class ErrorCategory(str, Enum):
    MULTI_INSTANCE_ROLE = "multi_instance_role"
    ALTERNATIVE_SPAN = "alternative_span"
    PARTIAL_SPAN = "partial_span"
    WRONG_SPAN = "wrong_span"
    MISSING = "missing"
    SPURIOUS = "spurious"


@dataclass(frozen=True)
class ErrorCase:
    doc_id: str
    event_index: int
    role: str
    category: ErrorCategory
    evidence: str
    predicted_span: Span | None
    gold_spans: tuple[Span, ...]


@dataclass
class ErrorAnalysis:
    cases: list[ErrorCase]
    histogram: dict[str, int]
    chains_available: bool

    def to_records(self) -> Iterable[dict[str, Any]]:
        for case in self.cases:
            yield {
                "doc_id": case.doc_id,
                "event_index": case.event_index,
                "role": case.role,
                "category": case.category.value,
                "evidence": case.evidence,
                "predicted_span": None if case.predicted_span is None
                else {"start": case.predicted_span.start, "end": case.predicted_span.end},
                "gold_spans": [{"start": s.start, "end": s.end} for s in case.gold_spans],
                "manual_label": "",  # review-sheet column for human annotation
            }


def _overlap_tokens(a: Span, b: Span) -> int:
    return max(0, min(a.end, b.end) - max(a.start, b.start) + 1)


def _in_same_chain(chains: Sequence[CorefChain], a: Span, b: Span) -> CorefChain | None:
    for chain in chains:
        spans = {m.span for m in chain.mentions}
        if a in spans and b in spans:
            return chain
    return None


def classify_errors(
    preds: Sequence[PredictionRecord],
    corpus: Corpus,
    chains: Mapping[str, Sequence[CorefChain]] | None = None,
) -> ErrorAnalysis:
    """Assign every imperfect (document, event, role) outcome exactly one
    category.

    Priority for an incorrect prediction: multi-instance role, then
    alternative span (prediction is a coreferent mention of the gold
    argument — requires chains), then partial span (token overlap), then
    wrong span. Roles with gold but no prediction are missing; predictions
    for roles without gold are spurious. Annotation errors need human
    judgment and are left to the exported review sheet.
    """
    chains_available = chains is not None
    by_key: dict[tuple[str, int], dict[str, PredictionRecord]] = {}
    for pred in preds:
        _gold_event(corpus, pred)
        by_key.setdefault((pred.doc_id, pred.event_index), {})[pred.role] = pred

    cases: list[ErrorCase] = []
    for doc, events in corpus:
        doc_chains = (chains or {}).get(doc.doc_id, ())
        for event_index, event in enumerate(events):
            preds_here = by_key.get((doc.doc_id, event_index), {})
            roles = sorted({arg.role for arg in event.arguments} | set(preds_here))
            for role in roles:
                gold_spans = tuple(arg.span for arg in event.arguments if arg.role == role)
                pred = preds_here.get(role)
                pred_span = pred.span if pred is not None else None
                case = _classify_one(
                    doc.doc_id, event_index, role, pred_span, gold_spans, doc_chains,
                )
                if case is not None:
                    cases.append(case)
    histogram = Counter(case.category.value for case in cases)
    return ErrorAnalysis(cases=cases, histogram=dict(histogram), chains_available=chains_available)


def _classify_one(
    doc_id: str,
    event_index: int,
    role: str,
    pred_span: Span | None,
    gold_spans: tuple[Span, ...],
    doc_chains: Sequence[CorefChain],
) -> ErrorCase | None:
    def case(category: ErrorCategory, evidence: str) -> ErrorCase:
        return ErrorCase(
            doc_id=doc_id, event_index=event_index, role=role, category=category,
            evidence=evidence, predicted_span=pred_span, gold_spans=gold_spans,
        )

    if pred_span is None:
        if not gold_spans:
            return None
        return case(ErrorCategory.MISSING, f"{len(gold_spans)} gold instance(s), no prediction")
    if not gold_spans:
        return case(ErrorCategory.SPURIOUS, "prediction for a role with no gold argument")
    if pred_span in gold_spans and len(gold_spans) == 1:
        return None
    if len(gold_spans) >= 2:
        # Guaranteed error for one-span-per-role predictors, even when one
        # instance matched.
        return case(
            ErrorCategory.MULTI_INSTANCE_ROLE,
            f"{len(gold_spans)} gold instances of role '{role}'",
        )
    gold_span = gold_spans[0]
    chain = _in_same_chain(doc_chains, pred_span, gold_span)
    if chain is not None:
        mention = next(m for m in chain.mentions if m.span == pred_span)
        return case(ErrorCategory.ALTERNATIVE_SPAN, f"coreferent mention '{mention.text}'")
    overlap = _overlap_tokens(pred_span, gold_span)
    if overlap > 0:
        return case(ErrorCategory.PARTIAL_SPAN, f"overlaps gold by {overlap} token(s)")
    return case(ErrorCategory.WRONG_SPAN, "no overlap with the gold span")


def write_error_cases(analysis: ErrorAnalysis, path: str) -> None:
    """Export the review sheet (one JSONL row per case, with an empty
    manual_label column)."""
    jsonl.write_records(path, analysis.to_records())


def evaluate(
    preds: Sequence[PredictionRecord],
    corpus: Corpus,
    *,
    chains: Mapping[str, Sequence[CorefChain]] | None = None,
    top_k: int = 15,
) -> tuple[EvalReport, ConfusionMatrix, ErrorAnalysis]:
    """Full strict evaluation with all breakdowns attached."""
    report = score_strict(preds, corpus)
    report.by_distance = breakdown_by_distance(preds, corpus)
    report.by_role = breakdown_by_role(preds, corpus)
    report.by_event = breakdown_by_event(preds, corpus, top_k=top_k)
    confusion = role_confusion(preds, corpus)
    errors = classify_errors(preds, corpus, chains)
    return report, confusion, errors
