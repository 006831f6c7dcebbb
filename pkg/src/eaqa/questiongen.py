"""Question generation: templates, role-prompt emission, question-bank and
contextualized-question ingestion, and the weak-supervision training set for
a question-generation model.

Five strategies are supported. ``template``, ``prompt_zero`` and
``prompt_few`` build questions from (trigger, role) alone and are identical
across documents; ``squad_qg`` and ``weak_llm_qg`` questions are grounded on
a specific document and arrive through external question files. Prompts are
emitted for an external LLM; its responses are ingested, never fetched, by
this module.
"""

import json
import warnings
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Any

from .corpus import Corpus, Document, EventInstance, Ontology
from .errors import DataError
from . import jsonl

PLACEHOLDER = "[X]"
WH_WORDS = ("what", "where", "who", "how")

# Leading auxiliaries signalling a yes/no question.
_YES_NO_LEADS = frozenset(
    "is are was were do does did can could will would has have".split()
)

DEFAULT_WH_LEXICON: dict[str, str] = {
    "place": "where",
    "destination": "where",
    "origin": "where",
    "giver": "who",
    "recipient": "who",
    "beneficiary": "who",
    "victim": "who",
    "communicator": "who",
    "attacker": "who",
    "defendant": "who",
    "prosecutor": "who",
    "violator": "who",
    "detainee": "who",
    "employee": "who",
    "passenger": "who",
    "participant": "who",
    "transporter": "who",
    "killer": "who",
    "spy": "who",
    "manner": "how",
    "instrument": "how",
}


class QuestionStrategy(str, Enum):
    TEMPLATE = "template"
    PROMPT_ZERO = "prompt_zero"
    PROMPT_FEW = "prompt_few"
    SQUAD_QG = "squad_qg"
    WEAK_LLM_QG = "weak_llm_qg"

    @property
    def contextualized(self) -> bool:
        return self in (QuestionStrategy.SQUAD_QG, QuestionStrategy.WEAK_LLM_QG)


@dataclass(frozen=True)
class Question:
    text: str
    strategy: QuestionStrategy
    role: str
    trigger_text: str = ""
    event_type: str = ""
    doc_id: str | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise DataError("question text is empty")
        if self.strategy.contextualized != (self.doc_id is not None):
            raise DataError(
                f"strategy '{self.strategy.value}' and doc_id presence disagree "
                f"(doc_id={self.doc_id!r})"
            )


class YesNoQuestionWarning(UserWarning):
    pass


def _looks_yes_no(text: str) -> bool:
    lead = text.split(maxsplit=1)
    return bool(lead) and lead[0].lower().rstrip(",") in _YES_NO_LEADS


@dataclass(frozen=True)
class RoleQuestionBank:
    """One LLM-written question template per role, with [X] for the trigger."""

    strategy: QuestionStrategy
    templates: Mapping[str, str]

    def __post_init__(self) -> None:
        if self.strategy not in (QuestionStrategy.PROMPT_ZERO, QuestionStrategy.PROMPT_FEW):
            raise DataError(f"question bank strategy must be prompt-based, got '{self.strategy.value}'")

    def roles(self) -> tuple[str, ...]:
        return tuple(self.templates)


@dataclass(frozen=True)
class QGTrainingExample:
    document_text: str
    trigger_text: str
    role: str
    target_question: str

    def __post_init__(self) -> None:
        if not self.target_question:
            raise DataError("target question is empty")


def _asset(name: str) -> str:
    return resources.files("eaqa").joinpath(f"assets/{name}").read_text(encoding="utf-8").strip()


def generate_template_question(
    trigger_text: str,
    role: str,
    wh_lexicon: Mapping[str, str] | None = None,
    *,
    event_type: str = "",
) -> Question:
    """Build the fixed-template question for a (trigger, role) pair.

    The wh-word comes from the lexicon, falling back to a shipped default
    mapping and finally to "what"; it must be one of what/where/who/how.
    """
    if not role:
        raise DataError("role is empty")
    lexicon = dict(DEFAULT_WH_LEXICON)
    if wh_lexicon:
        lexicon.update(wh_lexicon)
    wh = lexicon.get(role, "what").lower()
    if wh not in WH_WORDS:
        raise DataError(f"wh-word '{wh}' for role '{role}' not in {WH_WORDS}")
    text = f"{wh.capitalize()} is the {role} of the event {trigger_text}?"
    return Question(
        text=text,
        strategy=QuestionStrategy.TEMPLATE,
        role=role,
        trigger_text=trigger_text,
        event_type=event_type,
    )


def emit_role_prompt(
    ontology: Ontology,
    mode: str,
    exemplars: Sequence[tuple[str, str]] = (),
    *,
    task_text: str | None = None,
    instruction_text: str | None = None,
) -> str:
    """Emit the role-question generation prompt (zero- or few-shot).

    Few-shot mode requires exactly 10 (role, question) exemplars appended
    after the instruction.
    """
    if mode not in ("zero", "few"):
        raise DataError(f"mode must be 'zero' or 'few', got '{mode}'")
    if mode == "few" and len(exemplars) != 10:
        raise DataError(f"few-shot role prompt requires exactly 10 exemplars, got {len(exemplars)}")
    if mode == "zero" and exemplars:
        raise DataError("zero-shot role prompt takes no exemplars")
    task = task_text if task_text is not None else _asset("role_prompt_task.txt")
    instruction = instruction_text if instruction_text is not None else _asset("role_prompt_instruction.txt")
    lines = [task, "", "Argument roles:"]
    lines.extend(f"- {role}" for role in ontology.all_roles())
    lines.extend(["", instruction])
    if mode == "few":
        lines.extend(["", "Examples:"])
        lines.extend(f"{role}: {question}" for role, question in exemplars)
    return "\n".join(lines) + "\n"


def load_question_bank(path: str, strategy: QuestionStrategy, ontology: Ontology) -> RoleQuestionBank:
    """Load an LLM-generated question bank and check it against the ontology.

    The bank must contain exactly one non-empty question per ontology role.
    Questions that open with an auxiliary verb trigger a yes/no warning but
    are kept.
    """
    def reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
        seen: dict[str, Any] = {}
        for key, value in pairs:
            if key in seen:
                raise DataError(f"duplicate role '{key}' in question bank")
            seen[key] = value
        return seen

    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle, object_pairs_hook=reject_duplicates)
    if not isinstance(raw, dict):
        raise DataError("question bank must be a JSON object mapping role to question")
    expected = set(ontology.all_roles())
    missing = expected - set(raw)
    if missing:
        raise DataError(f"question bank missing roles: {', '.join(sorted(missing))}")
    extra = set(raw) - expected
    if extra:
        raise DataError(f"question bank has roles not in the ontology: {', '.join(sorted(extra))}")
    templates: dict[str, str] = {}
    for role in ontology.all_roles():
        question = raw[role]
        if not isinstance(question, str) or not question.strip():
            raise DataError(f"empty question for role '{role}'")
        if _looks_yes_no(question):
            warnings.warn(
                f"question for role '{role}' looks like a yes/no question: {question!r}",
                YesNoQuestionWarning,
                stacklevel=2,
            )
        templates[role] = question
    return RoleQuestionBank(strategy=strategy, templates=templates)


def instantiate_bank_question(
    bank: RoleQuestionBank, trigger_text: str, role: str, *, event_type: str = ""
) -> Question:
    """Substitute the trigger for every [X] occurrence in the role's template."""
    if role not in bank.templates:
        raise DataError(f"role '{role}' not in question bank")
    text = bank.templates[role].replace(PLACEHOLDER, trigger_text)
    return Question(
        text=text,
        strategy=bank.strategy,
        role=role,
        trigger_text=trigger_text,
        event_type=event_type,
    )


def emit_contextualized_qg_prompt(
    doc: Document,
    event: EventInstance,
    role: str,
    *,
    task_text: str | None = None,
    instruction_text: str | None = None,
) -> str:
    """Emit the document-grounded question-generation prompt for one role.

    The instruction names only the event trigger and the role; the gold
    argument span is never revealed or highlighted.
    """
    task = task_text if task_text is not None else _asset("contextual_qg_task.txt")
    instruction = instruction_text if instruction_text is not None else _asset("contextual_qg_instruction.txt")
    trigger_text = doc.span_text(event.trigger)
    return "\n".join(
        [
            task,
            "",
            "Document:",
            doc.text(),
            "",
            instruction.format(role=role, trigger=trigger_text),
        ]
    ) + "\n"


ContextQuestionKey = tuple[str, int, str]


def load_contextualized_questions(
    path: str,
    corpus: Corpus,
    default_strategy: QuestionStrategy = QuestionStrategy.WEAK_LLM_QG,
) -> dict[ContextQuestionKey, list[Question]]:
    """Load a contextualized-question JSONL file keyed by (doc, event, role).

    An optional leading header record ``{"strategy": ...}`` retags the whole
    file (e.g. as squad_qg). Every key must resolve against the corpus and
    carry 1..5 questions.
    """
    strategy = default_strategy
    out: dict[ContextQuestionKey, list[Question]] = {}
    for lineno, record in jsonl.read_records(path):
        if "doc_id" not in record and "strategy" in record:
            strategy = QuestionStrategy(record["strategy"])
            if not strategy.contextualized:
                raise DataError(
                    f"file header strategy '{strategy.value}' is not contextualized", line=lineno
                )
            continue
        doc_id = str(record.get("doc_id", ""))
        if doc_id not in corpus:
            raise DataError(f"unknown doc_id '{doc_id}'", line=lineno)
        doc, events = corpus.entry(doc_id)
        event_index = record.get("event_index")
        if not isinstance(event_index, int) or not 0 <= event_index < len(events):
            raise DataError(f"event_index {event_index!r} out of range for doc '{doc_id}'", line=lineno)
        role = str(record.get("role", ""))
        questions = record.get("questions")
        if not isinstance(questions, list) or not questions:
            raise DataError("entry has an empty question list", line=lineno)
        if len(questions) > 5:
            raise DataError(f"entry has {len(questions)} questions, at most 5 allowed", line=lineno)
        event = events[event_index]
        key = (doc_id, event_index, role)
        if key in out:
            raise DataError(f"duplicate key {key}", line=lineno)
        out[key] = [
            Question(
                text=str(q),
                strategy=strategy,
                role=role,
                trigger_text=doc.span_text(event.trigger),
                event_type=event.event_type,
                doc_id=doc_id,
            )
            for q in questions
        ]
    return out


def build_qg_training_set(
    corpus: Corpus, questions: Mapping[ContextQuestionKey, Sequence[Question]]
) -> list[QGTrainingExample]:
    """Pair each collected question (output) with document, trigger and role (input).

    Argument spans never appear on the input side; the generator is trained
    from roles, which is what lets it transfer to unseen corpora.
    """
    examples: list[QGTrainingExample] = []
    order = {doc.doc_id: i for i, (doc, _) in enumerate(corpus)}
    for key in sorted(questions, key=lambda k: (order.get(k[0], len(order)), k[1], k[2])):
        doc_id, event_index, role = key
        doc, events = corpus.entry(doc_id)
        trigger_text = doc.span_text(events[event_index].trigger)
        for question in questions[key]:
            examples.append(
                QGTrainingExample(
                    document_text=doc.text(),
                    trigger_text=trigger_text,
                    role=role,
                    target_question=question.text,
                )
            )
    return examples


def write_qg_training_set(examples: Sequence[QGTrainingExample], path: str) -> None:
    jsonl.write_records(
        path,
        (
            {
                "input": {
                    "document": ex.document_text,
                    "trigger": ex.trigger_text,
                    "role": ex.role,
                },
                "target": ex.target_question,
            }
            for ex in examples
        ),
    )


def export_squad_qg_triples(squad_path: str) -> Iterator[dict[str, str]]:
    """Extract (context, answer, question) triples from a SQuAD-format file.

    These train an answer-conditioned question generator; because that
    generator needs gold answers, its questions are train-only downstream.
    """
    with open(squad_path, encoding="utf-8") as handle:
        raw = json.load(handle)
    for article in raw.get("data", []):
        for paragraph in article.get("paragraphs", []):
            context = paragraph.get("context", "")
            for qa in paragraph.get("qas", []):
                if qa.get("is_impossible"):
                    continue
                answers = qa.get("answers", [])
                if not answers:
                    continue
                yield {
                    "context": context,
                    "answer": answers[0]["text"],
                    "question": qa["question"],
                }
