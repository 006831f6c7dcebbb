"""Assemble (question, context, answer) instances and enforce the
train/test mixing policy.

Questions are generated for every ontology role of every event regardless
of whether the argument is present; absent roles become no-answer
instances. Contextualized questions join the train split only, and the
test split carries exactly one uncontextualized question per (event, role).
"""

import hashlib
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .corpus import Corpus, Document, EventInstance, Ontology, Span, sentence_of
from .errors import DataError, PolicyError
from .questiongen import (
    ContextQuestionKey,
    Question,
    QuestionStrategy,
    RoleQuestionBank,
    generate_template_question,
    instantiate_bank_question,
)
from . import jsonl

SCHEMA_VERSION = 1
SPLITS = ("train", "dev", "test")

MULTI_INSTANCE_FLAG = "multi_instance"
OUTSIDE_WINDOW_FLAG = "answer_outside_window"


@dataclass(frozen=True)
class QAInstance:
    instance_id: str
    doc_id: str
    event_index: int
    role: str
    strategy: QuestionStrategy
    split: str
    question: str
    context_tokens: tuple[str, ...]
    answer: Span | None
    char_answer: tuple[int, int] | None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise DataError(f"unknown split '{self.split}'")
        if self.answer is not None and self.answer.end >= len(self.context_tokens):
            raise DataError(
                f"answer span [{self.answer.start}, {self.answer.end}] out of bounds "
                f"for instance '{self.instance_id}'"
            )
        _check_policy_invariants(self.strategy, self.split, self.instance_id)


def _check_policy_invariants(strategy: QuestionStrategy, split: str, where: str) -> None:
    if split == "test" and strategy.contextualized:
        raise PolicyError(
            f"test split may not contain contextualized questions "
            f"(instance '{where}' has strategy '{strategy.value}')"
        )
    if strategy is QuestionStrategy.SQUAD_QG and split != "train":
        raise PolicyError(
            f"squad_qg questions may only be used at training time "
            f"(instance '{where}' is in split '{split}')"
        )


@dataclass(frozen=True)
class MixPolicy:
    """Which strategies feed the train split and which single
    uncontextualized strategy is asked at test time."""

    train_strategies: frozenset[QuestionStrategy]
    test_strategy: QuestionStrategy
    contextualized_per_role_cap: int = 5

    def __post_init__(self) -> None:
        if self.test_strategy.contextualized:
            raise PolicyError(
                f"test strategy must be uncontextualized, got '{self.test_strategy.value}'"
            )
        if self.contextualized_per_role_cap < 0:
            raise PolicyError("contextualized_per_role_cap must be >= 0")
        if not self.train_strategies:
            raise PolicyError("train_strategies must not be empty")


@dataclass
class QuestionSources:
    """Everything build_qa_dataset may need to materialize questions."""

    banks: Mapping[QuestionStrategy, RoleQuestionBank] = field(default_factory=dict)
    contextualized: Mapping[QuestionStrategy, Mapping[ContextQuestionKey, Sequence[Question]]] = field(
        default_factory=dict
    )
    wh_lexicon: Mapping[str, str] | None = None


def _char_span(tokens: Sequence[str], span: Span) -> tuple[int, int]:
    # Offsets into " ".join(tokens); token span stays authoritative.
    start = sum(len(t) + 1 for t in tokens[: span.start])
    end = start + len(" ".join(tokens[span.start : span.end + 1]))
    return start, end


def _first_gold(event: EventInstance, role: str) -> tuple[Span | None, bool]:
    spans = sorted(arg.span for arg in event.arguments if arg.role == role)
    if not spans:
        return None, False
    return spans[0], len(spans) > 1


def _context_window(
    doc: Document, event: EventInstance, window: int | None
) -> tuple[tuple[str, ...], int]:
    """Context tokens and the offset subtracted from answer spans."""
    if window is None:
        return doc.tokens, 0
    center = sentence_of(doc, event.trigger.start)
    lo = max(0, center - window)
    hi = min(doc.sentence_count - 1, center + window)
    start = doc.sentences[lo][0]
    end = doc.sentences[hi][1]
    return doc.tokens[start:end], start


def _make_question(
    strategy: QuestionStrategy,
    sources: QuestionSources,
    trigger_text: str,
    role: str,
    event_type: str,
) -> Question:
    if strategy is QuestionStrategy.TEMPLATE:
        return generate_template_question(
            trigger_text, role, sources.wh_lexicon, event_type=event_type
        )
    if strategy in (QuestionStrategy.PROMPT_ZERO, QuestionStrategy.PROMPT_FEW):
        bank = sources.banks.get(strategy)
        if bank is None:
            raise DataError(f"no question bank supplied for strategy '{strategy.value}'")
        return instantiate_bank_question(bank, trigger_text, role, event_type=event_type)
    raise DataError(f"strategy '{strategy.value}' has no uncontextualized question source")


def build_qa_dataset(
    corpus: Corpus,
    ontology: Ontology,
    sources: QuestionSources,
    policy: MixPolicy,
    split: str,
    *,
    context_window: int | None = None,
) -> list[QAInstance]:
    """Build one split of the QA dataset.

    Train: one instance per (event, ontology role) for every
    uncontextualized train strategy, answer present or not, plus up to
    ``contextualized_per_role_cap`` contextualized instances for answerable
    roles. Dev/test: exactly one instance per (event, role) using the test
    strategy.
    """
    if split not in SPLITS:
        raise DataError(f"unknown split '{split}'")
    if split == "train":
        uncontextualized = sorted(
            (s for s in policy.train_strategies if not s.contextualized), key=lambda s: s.value
        )
        contextualized = sorted(
            (s for s in policy.train_strategies if s.contextualized), key=lambda s: s.value
        )
    else:
        uncontextualized = [policy.test_strategy]
        contextualized = []

    instances: list[QAInstance] = []
    for doc, events in corpus:
        for event_index, event in enumerate(events):
            roles = ontology.roles_for(event.event_type)
            trigger_text = doc.span_text(event.trigger)
            context, offset = _context_window(doc, event, context_window)
            for role in roles:
                gold, multi = _first_gold(event, role)
                answer, flags = _shift_answer(gold, offset, len(context), multi)
                for strategy in uncontextualized:
                    question = _make_question(strategy, sources, trigger_text, role, event.event_type)
                    instances.append(
                        _instance(doc, event_index, role, strategy, split, question.text,
                                  context, answer, flags, ordinal=0)
                    )
                if not contextualized or gold is None:
                    continue
                for strategy in contextualized:
                    per_key = sources.contextualized.get(strategy, {})
                    questions = per_key.get((doc.doc_id, event_index, role), ())
                    for ordinal, question in enumerate(questions[: policy.contextualized_per_role_cap]):
                        instances.append(
                            _instance(doc, event_index, role, strategy, split, question.text,
                                      context, answer, flags, ordinal=ordinal)
                        )
    return instances


def _shift_answer(
    gold: Span | None, offset: int, context_len: int, multi: bool
) -> tuple[Span | None, tuple[str, ...]]:
    flags = (MULTI_INSTANCE_FLAG,) if multi else ()
    if gold is None:
        return None, flags
    start, end = gold.start - offset, gold.end - offset
    if start < 0 or end >= context_len:
        return None, flags + (OUTSIDE_WINDOW_FLAG,)
    return Span(start, end), flags


def _instance(
    doc: Document,
    event_index: int,
    role: str,
    strategy: QuestionStrategy,
    split: str,
    question: str,
    context: tuple[str, ...],
    answer: Span | None,
    flags: tuple[str, ...],
    ordinal: int,
) -> QAInstance:
    return QAInstance(
        instance_id=f"{doc.doc_id}#e{event_index}#{role}#{strategy.value}#{ordinal}",
        doc_id=doc.doc_id,
        event_index=event_index,
        role=role,
        strategy=strategy,
        split=split,
        question=question,
        context_tokens=context,
        answer=answer,
        char_answer=_char_span(context, answer) if answer is not None else None,
        flags=flags,
    )


def _dedup_key(inst: QAInstance) -> tuple[str, int, str, str, str]:
    return (inst.doc_id, inst.event_index, inst.role, inst.question, inst.split)


def combine_datasets(parts: Sequence[Sequence[QAInstance]]) -> list[QAInstance]:
    """Union of dataset parts, deduplicated on (doc, event, role, question, split).

    Conflicting answers under one key are an error; policy invariants are
    re-validated after the merge. combine(x, x) == x.
    """
    merged: dict[tuple, QAInstance] = {}
    for part in parts:
        for inst in part:
            key = _dedup_key(inst)
            existing = merged.get(key)
            if existing is None:
                _check_policy_invariants(inst.strategy, inst.split, inst.instance_id)
                merged[key] = inst
            elif existing.answer != inst.answer:
                raise DataError(
                    f"conflicting answers for {key}: "
                    f"{existing.answer} vs {inst.answer}"
                )
    return sorted(merged.values(), key=lambda i: (i.doc_id, i.event_index, i.role,
                                                  i.strategy.value, i.split, i.instance_id))


def _to_record(inst: QAInstance) -> dict[str, Any]:
    return {
        "instance_id": inst.instance_id,
        "doc_id": inst.doc_id,
        "event_index": inst.event_index,
        "role": inst.role,
        "strategy": inst.strategy.value,
        "split": inst.split,
        "question": inst.question,
        "context_tokens": list(inst.context_tokens),
        "answer": None if inst.answer is None else {"start": inst.answer.start, "end": inst.answer.end},
        "char_answer": None if inst.char_answer is None
        else {"start": inst.char_answer[0], "end": inst.char_answer[1]},
        "flags": list(inst.flags),
    }


def write_qa_dataset(instances: Sequence[QAInstance], path: str) -> None:
    """Serialize to JSONL behind a schema-version header; byte-stable for
    identical input."""
    ordered = sorted(instances, key=lambda i: i.instance_id)
    records: list[dict[str, Any]] = [{"schema_version": SCHEMA_VERSION, "kind": "qa_dataset"}]
    records.extend(_to_record(inst) for inst in ordered)
    jsonl.write_records(path, records)


def read_qa_dataset(path: str) -> list[QAInstance]:
    instances: list[QAInstance] = []
    saw_header = False
    for lineno, record in jsonl.read_records(path):
        if not saw_header:
            if record.get("kind") != "qa_dataset":
                raise DataError("missing qa_dataset header record", line=lineno)
            if record.get("schema_version") != SCHEMA_VERSION:
                raise DataError(
                    f"unsupported schema_version {record.get('schema_version')!r}", line=lineno
                )
            saw_header = True
            continue
        try:
            answer = record["answer"]
            char_answer = record["char_answer"]
            instances.append(
                QAInstance(
                    instance_id=record["instance_id"],
                    doc_id=record["doc_id"],
                    event_index=record["event_index"],
                    role=record["role"],
                    strategy=QuestionStrategy(record["strategy"]),
                    split=record["split"],
                    question=record["question"],
                    context_tokens=tuple(record["context_tokens"]),
                    answer=None if answer is None else Span(answer["start"], answer["end"]),
                    char_answer=None if char_answer is None
                    else (char_answer["start"], char_answer["end"]),
                    flags=tuple(record.get("flags", [])),
                )
            )
        except KeyError as exc:
            raise DataError("missing field", line=lineno, field=str(exc)) from exc
        except PolicyError as exc:
            raise PolicyError(str(exc), line=lineno) from None
        except DataError as exc:
            raise DataError(str(exc), line=lineno) from None
        except ValueError as exc:
            raise DataError(str(exc), line=lineno) from exc
    if not saw_header:
        raise DataError("empty file: expected a qa_dataset header record")
    return instances


@dataclass
class DatasetReport:
    total: int
    by_split: dict[str, int]
    by_strategy: dict[str, int]
    answerable: int
    no_answer: int
    multi_instance: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "by_split": dict(sorted(self.by_split.items())),
            "by_strategy": dict(sorted(self.by_strategy.items())),
            "answerable": self.answerable,
            "no_answer": self.no_answer,
            "multi_instance": self.multi_instance,
        }


def dataset_report(instances: Iterable[QAInstance]) -> DatasetReport:
    by_split: Counter[str] = Counter()
    by_strategy: Counter[str] = Counter()
    answerable = no_answer = multi = total = 0
    for inst in instances:
        total += 1
        by_split[inst.split] += 1
        by_strategy[inst.strategy.value] += 1
        if inst.answer is None:
            no_answer += 1
        else:
            answerable += 1
        if MULTI_INSTANCE_FLAG in inst.flags:
            multi += 1
    return DatasetReport(
        total=total,
        by_split=dict(by_split),
        by_strategy=dict(by_strategy),
        answerable=answerable,
        no_answer=no_answer,
        multi_instance=multi,
    )


def dataset_digest(instances: Sequence[QAInstance]) -> str:
    """Stable content digest, used by run manifests."""
    h = hashlib.sha256()
    for inst in sorted(instances, key=lambda i: i.instance_id):
        h.update(jsonl.dumps(_to_record(inst)).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
