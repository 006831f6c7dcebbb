"""Zero/few-shot extraction prompts, a generic completion endpoint client
with an on-disk replay cache, completion parsing, and answer-to-span
mapping.

Prompts pack all of an event's role questions into one request; answers
come back one per line and are mapped to roles by label or position. The
cache is content-addressed on (prompt, model, sampling parameters) so that
reruns are byte-identical and cost nothing.
"""

import hashlib
import json
import logging
import os
import re
import time
import warnings
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .corpus import Corpus, Document, EventInstance, Ontology, Span, find_token_matches
from .errors import AuthError, DataError, NetworkError, RateLimitError, TransientError
from .questiongen import Question, generate_template_question
from .scoring import PredictionRecord

logger = logging.getLogger(__name__)

NO_ANSWER = "No answer"

# A transport takes (url, headers, body, timeout) and returns
# (status code, response text). Injectable for tests and offline replay.
Transport = Callable[[str, Mapping[str, str], Mapping[str, Any], float], tuple[int, str]]


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 256
    credential_env: str = "EAQA_API_KEY"
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.5
    body_template: Mapping[str, Any] | None = None
    response_path: tuple[Any, ...] = ("choices", 0, "text")

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise DataError("timeout must be positive")
        if self.retries < 0:
            raise DataError("retry budget must be >= 0")

    def body(self, prompt: str) -> dict[str, Any]:
        if self.body_template is None:
            return {
                "model": self.model,
                "prompt": prompt,
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            }

        def fill(value: Any) -> Any:
            if isinstance(value, str):
                return value.replace("{prompt}", prompt).replace("{model}", self.model)
            if isinstance(value, Mapping):
                return {k: fill(v) for k, v in value.items()}
            if isinstance(value, list):
                return [fill(v) for v in value]
            return value

        return fill(dict(self.body_template))


@dataclass(frozen=True)
class ExtractionPromptBundle:
    prompt: str
    questions: tuple[tuple[str, str], ...]  # ordered (role, question text)
    exemplar_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class FewShotExemplar:
    """One training sample rendered into the prompt, gold answers included."""

    exemplar_id: str
    doc: Document
    questions: tuple[Question, ...]
    answers: Mapping[str, str | None]  # None renders as "No answer"


class CompletionCache:
    """Directory of content-addressed completion entries."""

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key(config: EndpointConfig, prompt: str) -> str:
        material = json.dumps(
            {
                "prompt": prompt,
                "model": config.model,
                "temperature": config.temperature,
                "max_tokens": config.max_tokens,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)["text"]

    def put(self, key: str, text: str) -> None:
        path = self._path(key)
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump({"text": text, "timestamp": time.time()}, handle, ensure_ascii=False)
        os.replace(tmp, path)


def _asset(name: str) -> str:
    return resources.files("eaqa").joinpath(f"assets/{name}").read_text(encoding="utf-8").strip()


def _question_block(questions: Sequence[Question]) -> str:
    return "\n".join(f"{i}. {q.text}" for i, q in enumerate(questions, start=1))


def _answer_block(questions: Sequence[Question], answers: Mapping[str, str | None]) -> str:
    lines = []
    for q in questions:
        answer = answers.get(q.role)
        lines.append(f"{q.role}: {answer if answer is not None else NO_ANSWER}")
    return "\n".join(lines)


def build_zero_shot_prompt(
    doc: Document, event: EventInstance, questions: Sequence[Question]
) -> ExtractionPromptBundle:
    """Test document + instruction + all role questions at once."""
    if not questions:
        raise DataError("zero-shot prompt requires at least one question")
    prompt = "\n".join(
        [
            "Document:",
            doc.text(),
            "",
            _asset("extraction_instruction.txt"),
            "",
            "Questions:",
            _question_block(questions),
            "",
            "Answers:",
        ]
    ) + "\n"
    return ExtractionPromptBundle(
        prompt=prompt,
        questions=tuple((q.role, q.text) for q in questions),
    )


def build_few_shot_prompt(
    doc: Document,
    event: EventInstance,
    questions: Sequence[Question],
    exemplars: Sequence[FewShotExemplar],
) -> ExtractionPromptBundle:
    """Two solved training samples (no-answer questions rendered as such)
    followed by the zero-shot prompt body."""
    if len(exemplars) != 2:
        raise DataError(f"few-shot prompt requires exactly 2 exemplars, got {len(exemplars)}")
    if not any(answer is None for ex in exemplars for answer in ex.answers.values()):
        warnings.warn(
            "no exemplar contains a no-answer question; include some so the model "
            "learns to abstain",
            UserWarning,
            stacklevel=2,
        )
    blocks = []
    for ex in exemplars:
        blocks.append(
            "\n".join(
                [
                    "Document:",
                    ex.doc.text(),
                    "",
                    "Questions:",
                    _question_block(ex.questions),
                    "",
                    "Answers:",
                    _answer_block(ex.questions, ex.answers),
                ]
            )
        )
    zero = build_zero_shot_prompt(doc, event, questions)
    prompt = "\n\n".join(blocks) + "\n\n" + zero.prompt
    return ExtractionPromptBundle(
        prompt=prompt,
        questions=zero.questions,
        exemplar_ids=tuple(ex.exemplar_id for ex in exemplars),
    )


def sample_exemplars(
    pool: Sequence[FewShotExemplar], seed: int, k: int = 2
) -> list[FewShotExemplar]:
    import random

    if len(pool) < k:
        raise DataError(f"exemplar pool has {len(pool)} entries, need {k}")
    return random.Random(seed).sample(list(pool), k)


def _default_transport(
    url: str, headers: Mapping[str, str], body: Mapping[str, Any], timeout: float
) -> tuple[int, str]:
    import requests

    try:
        response = requests.post(url, headers=dict(headers), json=dict(body), timeout=timeout)
    except requests.Timeout as exc:
        raise TimeoutError(str(exc)) from exc
    return response.status_code, response.text


def _extract_text(payload: str, path: tuple[Any, ...]) -> str:
    node: Any = json.loads(payload)
    for step in path:
        node = node[step]
    if not isinstance(node, str):
        raise NetworkError(f"completion payload at {path} is not a string")
    return node


def call_completion(
    config: EndpointConfig,
    prompt: str,
    cache: CompletionCache | None = None,
    transport: Transport | None = None,
) -> str:
    """Return the completion text, serving cache hits without any network
    traffic and retrying transient failures (429/5xx/timeout) with
    exponential backoff."""
    key = CompletionCache.key(config, prompt)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    credential = os.environ.get(config.credential_env)
    if not credential:
        raise AuthError(
            f"no credential found in environment variable '{config.credential_env}'"
        )
    headers = {"Authorization": f"Bearer {credential}", "Content-Type": "application/json"}
    send = transport or _default_transport
    last_status: int | None = None
    attempts = config.retries + 1
    for attempt in range(attempts):
        try:
            status, payload = send(config.base_url, headers, config.body(prompt), config.timeout)
        except TimeoutError:
            last_status = None
            if attempt < attempts - 1:
                time.sleep(config.backoff * (2**attempt))
            continue
        if status in (401, 403):
            raise AuthError(
                f"endpoint rejected the credential from '{config.credential_env}' "
                f"(HTTP {status})",
                status=status,
            )
        if status == 429 or status >= 500:
            last_status = status
            if attempt < attempts - 1:
                time.sleep(config.backoff * (2**attempt))
            continue
        if status != 200:
            raise NetworkError(f"unexpected HTTP status {status}", status=status)
        text = _extract_text(payload, config.response_path)
        if cache is not None:
            cache.put(key, text)
        return text
    if last_status == 429:
        raise RateLimitError(
            f"rate limited after {attempts} attempts", status=last_status
        )
    raise TransientError(
        f"transient failure after {attempts} attempts"
        + (f" (last HTTP {last_status})" if last_status else " (timeout)"),
        status=last_status,
    )


@dataclass
class ParsedCompletion:
    answers: dict[str, str | None]
    warnings: list[str] = field(default_factory=list)


_ORDINAL_PREFIX = re.compile(r"^\s*(?:answer\s+)?\d+\s*[.):-]\s*", re.IGNORECASE)


def _is_no_answer(text: str) -> bool:
    return text.strip().strip(".").casefold() in ("no answer", "noanswer", "none", "n/a")


def parse_completion(text: str, expected_roles: Sequence[str]) -> ParsedCompletion:
    """Map completion lines back to roles.

    Labeled lines ("role: answer") are preferred; otherwise lines align to
    roles by position. Missing or unparseable lines degrade to no-answer
    with a warning — the output always covers every expected role.
    """
    parsed = ParsedCompletion(answers={role: None for role in expected_roles})
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    by_label: dict[str, str] = {}
    labeled_lines = 0
    role_lookup = {role.casefold(): role for role in expected_roles}
    for line in lines:
        stripped = _ORDINAL_PREFIX.sub("", line)
        label, sep, rest = stripped.partition(":")
        if sep and label.strip().casefold() in role_lookup:
            by_label[role_lookup[label.strip().casefold()]] = rest.strip()
            labeled_lines += 1
    if by_label:
        for role in expected_roles:
            if role in by_label:
                answer = by_label[role]
                parsed.answers[role] = None if _is_no_answer(answer) else answer
            else:
                parsed.warnings.append(f"no labeled answer line for role '{role}'")
        if labeled_lines < len(lines):
            parsed.warnings.append(
                f"ignored {len(lines) - labeled_lines} unlabeled line(s)"
            )
        return parsed
    for i, role in enumerate(expected_roles):
        if i >= len(lines):
            parsed.warnings.append(f"missing answer line for role '{role}'")
            continue
        answer = _ORDINAL_PREFIX.sub("", lines[i]).strip()
        parsed.answers[role] = None if _is_no_answer(answer) else answer
    if len(lines) > len(expected_roles):
        parsed.warnings.append(
            f"ignored {len(lines) - len(expected_roles)} trailing line(s)"
        )
    return parsed


def map_answer_to_spans(doc: Document, answer: str) -> list[Span]:
    """All document spans whose tokens match the whitespace-tokenized answer
    (exact first, then case-insensitive). Empty when the answer is absent."""
    if not answer.strip():
        raise DataError("answer is empty")
    return find_token_matches(doc.tokens, answer.split())


def run_extraction(
    corpus: Corpus,
    ontology: Ontology,
    config: EndpointConfig,
    cache: CompletionCache | None = None,
    *,
    exemplars: Sequence[FewShotExemplar] = (),
    wh_lexicon: Mapping[str, str] | None = None,
    one_per_call: bool = False,
    transport: Transport | None = None,
    system_id: str = "llm",
) -> list[PredictionRecord]:
    """Template-question extraction over a corpus via the completion endpoint.

    Emits exactly one PredictionRecord per (document, event, ontology role):
    the first matching span when the answer maps back into the document,
    an abstention otherwise. Raw answer text is kept for lenient scoring.
    """
    predictions: list[PredictionRecord] = []
    for doc, events in corpus:
        for event_index, event in enumerate(events):
            trigger_text = doc.span_text(event.trigger)
            questions = [
                generate_template_question(trigger_text, role, wh_lexicon,
                                           event_type=event.event_type)
                for role in ontology.roles_for(event.event_type)
            ]
            groups = [[q] for q in questions] if one_per_call else [questions]
            answers: dict[str, str | None] = {}
            for group in groups:
                if exemplars:
                    bundle = build_few_shot_prompt(doc, event, group, exemplars)
                else:
                    bundle = build_zero_shot_prompt(doc, event, group)
                completion = call_completion(config, bundle.prompt, cache, transport)
                parsed = parse_completion(completion, [role for role, _ in bundle.questions])
                for warning in parsed.warnings:
                    logger.warning("stage=llm-extract doc_id=%s %s", doc.doc_id, warning)
                answers.update(parsed.answers)
            for question in questions:
                answer = answers.get(question.role)
                spans = map_answer_to_spans(doc, answer) if answer else []
                predictions.append(
                    PredictionRecord(
                        doc_id=doc.doc_id,
                        event_index=event_index,
                        role=question.role,
                        span=spans[0] if spans else None,
                        text=answer,
                        system_id=system_id,
                    )
                )
    return predictions
