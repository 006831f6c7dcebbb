"""Event-argument corpus model: documents, events, ontologies, coref sidecars.

Conventions used throughout the toolkit:

* annotation spans (triggers, arguments, coref mentions) are stored with an
  inclusive end index, both in memory and on disk;
* sentence ranges are half-open ``[start, end)`` pairs partitioning the
  token sequence;
* conversion between the two lives in :func:`span_slice` only.

The canonical on-disk format is one JSON object per line::

    {"doc_id": ..., "tokens": [...], "sentences": [[s, e), ...],
     "events": [{"event_type": ..., "trigger": [s, e],
                 "arguments": [{"role": ..., "start": s, "end": e}, ...]}]}

Import profiles for upstream corpus releases are declarative field-mapping
tables shipped as JSON under ``assets/profiles`` so that upstream schema
drift is a config fix, not a code change.
"""

import bisect
import json
import re
from collections import Counter
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .errors import ConfigError, DataError
from . import jsonl

PROFILE_NAMES = ("canonical", "rams", "wikievents")


@dataclass(frozen=True, order=True)
class Span:
    """Token span with inclusive first/last indexes."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise DataError(f"invalid span [{self.start}, {self.end}]")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end


def span_slice(span: Span) -> slice:
    """The one inclusive-to-half-open conversion point."""
    return slice(span.start, span.end + 1)


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    def text(self) -> str:
        return " ".join(self.tokens)

    def span_tokens(self, span: Span) -> tuple[str, ...]:
        return self.tokens[span_slice(span)]

    def span_text(self, span: Span) -> str:
        return " ".join(self.span_tokens(span))

    def sentence_tokens(self, index: int) -> tuple[str, ...]:
        start, end = self.sentences[index]
        return self.tokens[start:end]


@dataclass(frozen=True)
class ArgumentAnnotation:
    role: str
    span: Span


@dataclass(frozen=True)
class EventInstance:
    event_type: str
    trigger: Span
    arguments: tuple[ArgumentAnnotation, ...] = ()


@dataclass(frozen=True)
class CorefMention:
    span: Span
    text: str


@dataclass(frozen=True)
class CorefChain:
    doc_id: str
    mentions: tuple[CorefMention, ...]


@dataclass(frozen=True)
class Ontology:
    """Map event type -> ordered argument role list."""

    roles_by_event: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        for event_type, roles in self.roles_by_event.items():
            if not event_type:
                raise DataError("ontology contains an empty event type key")
            if not roles:
                raise DataError(f"ontology event type '{event_type}' has no roles")
            if len(set(roles)) != len(roles):
                raise DataError(f"ontology event type '{event_type}' has duplicate roles")

    def roles_for(self, event_type: str) -> tuple[str, ...]:
        try:
            return self.roles_by_event[event_type]
        except KeyError:
            raise DataError(f"event type '{event_type}' not in ontology") from None

    def all_roles(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for roles in self.roles_by_event.values():
            for role in roles:
                seen.setdefault(role)
        return tuple(seen)

    @property
    def event_type_count(self) -> int:
        return len(self.roles_by_event)

    @property
    def role_count(self) -> int:
        return len(self.all_roles())

    @classmethod
    def load(cls, path: str) -> "Ontology":
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        if not isinstance(raw, dict):
            raise DataError("ontology file must be a JSON object")
        return cls({key: tuple(value) for key, value in raw.items()})


class Corpus:
    """Ordered collection of (Document, events) pairs indexed by doc_id."""

    def __init__(self, entries: Sequence[tuple[Document, Sequence[EventInstance]]]):
        self._entries: list[tuple[Document, tuple[EventInstance, ...]]] = []
        self._by_id: dict[str, int] = {}
        for doc, events in entries:
            if doc.doc_id in self._by_id:
                raise DataError(f"duplicate doc_id '{doc.doc_id}'")
            self._by_id[doc.doc_id] = len(self._entries)
            self._entries.append((doc, tuple(events)))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[tuple[Document, tuple[EventInstance, ...]]]:
        return iter(self._entries)

    def __getitem__(self, index: int) -> tuple[Document, tuple[EventInstance, ...]]:
        return self._entries[index]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def document(self, doc_id: str) -> Document:
        return self.entry(doc_id)[0]

    def events(self, doc_id: str) -> tuple[EventInstance, ...]:
        return self.entry(doc_id)[1]

    def entry(self, doc_id: str) -> tuple[Document, tuple[EventInstance, ...]]:
        try:
            return self._entries[self._by_id[doc_id]]
        except KeyError:
            raise DataError(f"unknown doc_id '{doc_id}'") from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._entries == other._entries


@dataclass(frozen=True)
class Violation:
    invariant: str
    location: str
    message: str


@dataclass
class CorpusStats:
    documents: int = 0
    events: int = 0
    arguments: int = 0
    event_types: int = 0
    role_types: int = 0
    intra_sentential: int = 0
    inter_sentential: int = 0
    arguments_by_distance: dict[int, int] = field(default_factory=dict)
    ontology_event_types: int | None = None
    ontology_role_types: int | None = None

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "documents": self.documents,
            "events": self.events,
            "arguments": self.arguments,
            "event_types": self.event_types,
            "role_types": self.role_types,
            "intra_sentential": self.intra_sentential,
            "inter_sentential": self.inter_sentential,
            "arguments_by_distance": {str(k): v for k, v in sorted(self.arguments_by_distance.items())},
        }
        if self.ontology_event_types is not None:
            out["ontology_event_types"] = self.ontology_event_types
            out["ontology_role_types"] = self.ontology_role_types
        return out


def find_token_matches(tokens: Sequence[str], query: Sequence[str]) -> list[Span]:
    """All occurrences of ``query`` as a token subsequence, exact first,
    falling back to case-insensitive matching when exact finds nothing."""
    if not query:
        return []

    def scan(hay: Sequence[str], needle: list[str]) -> list[Span]:
        n = len(needle)
        return [
            Span(i, i + n - 1)
            for i in range(len(hay) - n + 1)
            if list(hay[i : i + n]) == needle
        ]

    matches = scan(tokens, list(query))
    if not matches:
        matches = scan([t.casefold() for t in tokens], [q.casefold() for q in query])
    return matches


def sentence_of(doc: Document, token_index: int) -> int:
    """Sentence index containing ``token_index``."""
    if not 0 <= token_index < doc.token_count:
        raise DataError(
            f"token index {token_index} out of range for document "
            f"'{doc.doc_id}' with {doc.token_count} tokens"
        )
    starts = [start for start, _ in doc.sentences]
    return bisect.bisect_right(starts, token_index) - 1


def argument_distance(doc: Document, event: EventInstance, arg: ArgumentAnnotation) -> int:
    """Signed sentence distance from trigger to argument; 0 = intra-sentential."""
    return sentence_of(doc, arg.span.start) - sentence_of(doc, event.trigger.start)


def validate_document(
    doc: Document,
    events: Sequence[EventInstance] = (),
    ontology: Ontology | None = None,
) -> list[Violation]:
    """Check every type invariant; violations are returned, never raised."""
    violations: list[Violation] = []
    where = f"doc '{doc.doc_id}'"

    if not doc.tokens:
        violations.append(Violation("non-empty tokens", where, "document has no tokens"))
    cursor = 0
    for i, (start, end) in enumerate(doc.sentences):
        if end <= start:
            violations.append(
                Violation("sentence non-empty", f"{where} sentence {i}", f"empty range [{start}, {end})")
            )
        if start != cursor:
            violations.append(
                Violation(
                    "sentence coverage",
                    f"{where} sentence {i}",
                    f"range starts at {start}, expected {cursor}",
                )
            )
        cursor = max(cursor, end)
    if doc.sentences and cursor != doc.token_count:
        violations.append(
            Violation(
                "sentence coverage",
                where,
                f"sentences cover [0, {cursor}) but document has {doc.token_count} tokens",
            )
        )
    if not doc.sentences and doc.tokens:
        violations.append(Violation("sentence coverage", where, "document has no sentences"))

    def check_span(span: Span, what: str) -> None:
        if span.end >= doc.token_count:
            violations.append(
                Violation(
                    "span bounds",
                    f"{where} {what}",
                    f"span [{span.start}, {span.end}] exceeds token count {doc.token_count}",
                )
            )

    for ei, event in enumerate(events):
        check_span(event.trigger, f"event {ei} trigger")
        for ai, arg in enumerate(event.arguments):
            check_span(arg.span, f"event {ei} argument {ai} ({arg.role})")
            if ontology is not None:
                try:
                    roles = ontology.roles_for(event.event_type)
                except DataError:
                    violations.append(
                        Violation(
                            "event type in ontology",
                            f"{where} event {ei}",
                            f"event type '{event.event_type}' not in ontology",
                        )
                    )
                    continue
                if arg.role not in roles:
                    violations.append(
                        Violation(
                            "role not in ontology",
                            f"{where} event {ei} argument {ai}",
                            f"role '{arg.role}' not listed for event type '{event.event_type}'",
                        )
                    )
    return violations


def corpus_stats(corpus: Corpus, ontology: Ontology | None = None) -> CorpusStats:
    stats = CorpusStats()
    event_types: set[str] = set()
    role_types: set[str] = set()
    by_distance: Counter[int] = Counter()
    for doc, events in corpus:
        stats.documents += 1
        for event in events:
            stats.events += 1
            event_types.add(event.event_type)
            for arg in event.arguments:
                stats.arguments += 1
                role_types.add(arg.role)
                d = argument_distance(doc, event, arg)
                by_distance[d] += 1
                if d == 0:
                    stats.intra_sentential += 1
                else:
                    stats.inter_sentential += 1
    stats.event_types = len(event_types)
    stats.role_types = len(role_types)
    stats.arguments_by_distance = dict(by_distance)
    if ontology is not None:
        stats.ontology_event_types = ontology.event_type_count
        stats.ontology_role_types = ontology.role_count
    return stats


def distance_flags(corpus: Corpus, lo: int = -2, hi: int = 2) -> list[tuple[str, int, int, int]]:
    """Arguments whose distance falls outside the analysis buckets.

    Returns (doc_id, event index, argument index, distance) tuples; flagged
    arguments stay in the corpus, this is reporting only.
    """
    flagged = []
    for doc, events in corpus:
        for ei, event in enumerate(events):
            for ai, arg in enumerate(event.arguments):
                d = argument_distance(doc, event, arg)
                if not lo <= d <= hi:
                    flagged.append((doc.doc_id, ei, ai, d))
    return flagged


# ---------------------------------------------------------------------------
# Parsing


def _load_profile(name: str) -> dict[str, Any]:
    if name not in PROFILE_NAMES:
        raise ConfigError(f"unknown profile '{name}'; expected one of {', '.join(PROFILE_NAMES)}")
    if name == "canonical":
        return {"name": "canonical"}
    ref = resources.files("eaqa").joinpath(f"assets/profiles/{name}.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def _require(record: Mapping[str, Any], key: str, lineno: int) -> Any:
    if key not in record:
        raise DataError("missing field", line=lineno, field=key)
    return record[key]


def _span_from_pair(raw: Any, *, inclusive: bool, lineno: int, fieldname: str) -> Span:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) < 2
        or not all(isinstance(v, int) for v in raw[:2])
    ):
        raise DataError("expected [start, end] pair", line=lineno, field=fieldname)
    start, end = raw[0], raw[1]
    if not inclusive:
        end -= 1
    if start < 0 or end < start:
        raise DataError(f"invalid span [{raw[0]}, {raw[1]}]", line=lineno, field=fieldname)
    return Span(start, end)


def _check_entry_spans(doc: Document, events: Sequence[EventInstance], lineno: int) -> None:
    for ei, event in enumerate(events):
        if event.trigger.end >= doc.token_count:
            raise DataError(
                f"trigger span [{event.trigger.start}, {event.trigger.end}] out of bounds "
                f"(document has {doc.token_count} tokens)",
                line=lineno,
                field=f"events[{ei}].trigger",
            )
        for ai, arg in enumerate(event.arguments):
            if arg.span.end >= doc.token_count:
                raise DataError(
                    f"argument span [{arg.span.start}, {arg.span.end}] out of bounds "
                    f"(document has {doc.token_count} tokens)",
                    line=lineno,
                    field=f"events[{ei}].arguments[{ai}]",
                )
    violations = validate_document(doc, events)
    if violations:
        v = violations[0]
        raise DataError(f"{v.invariant} violated at {v.location}: {v.message}", line=lineno)


def _parse_canonical_record(record: Mapping[str, Any], lineno: int) -> tuple[Document, list[EventInstance]]:
    doc_id = _require(record, "doc_id", lineno)
    raw_tokens = _require(record, "tokens", lineno)
    if not isinstance(raw_tokens, list):
        raise DataError("expected an array of strings", line=lineno, field="tokens")
    raw_sentences = _require(record, "sentences", lineno)
    if not isinstance(raw_sentences, list):
        raise DataError("expected an array of [start, end) pairs", line=lineno, field="sentences")
    tokens = tuple(str(t) for t in raw_tokens)
    sentences = []
    for pair in raw_sentences:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise DataError("expected a [start, end) pair", line=lineno, field="sentences")
        sentences.append((pair[0], pair[1]))
    doc = Document(doc_id=str(doc_id), tokens=tokens, sentences=tuple(sentences))
    events = []
    for ei, raw_event in enumerate(record.get("events", [])):
        trigger = _span_from_pair(
            _require(raw_event, "trigger", lineno), inclusive=True, lineno=lineno,
            fieldname=f"events[{ei}].trigger",
        )
        args = []
        for ai, raw_arg in enumerate(raw_event.get("arguments", [])):
            fieldname = f"events[{ei}].arguments[{ai}]"
            span = _span_from_pair(
                [_require(raw_arg, "start", lineno), _require(raw_arg, "end", lineno)],
                inclusive=True, lineno=lineno, fieldname=fieldname,
            )
            args.append(ArgumentAnnotation(role=str(_require(raw_arg, "role", lineno)), span=span))
        events.append(
            EventInstance(
                event_type=str(_require(raw_event, "event_type", lineno)),
                trigger=trigger,
                arguments=tuple(args),
            )
        )
    return doc, events


def _tokens_and_sentences(
    record: Mapping[str, Any], profile: Mapping[str, Any], lineno: int
) -> tuple[tuple[str, ...], tuple[tuple[int, int], ...]]:
    spec = profile["tokens"]
    raw = _require(record, spec["field"], lineno)
    if spec.get("nested"):
        tokens: list[str] = []
        sentences: list[tuple[int, int]] = []
        for sent in raw:
            start = len(tokens)
            tokens.extend(str(t) for t in sent)
            sentences.append((start, len(tokens)))
        return tuple(tokens), tuple(sentences)
    tokens = tuple(str(t) for t in raw)
    sent_field = profile.get("sentences_field")
    if sent_field and sent_field in record:
        sentences = tuple((pair[0], pair[1]) for pair in record[sent_field])
    else:
        sentences = ((0, len(tokens)),) if tokens else ()
    return tuple(tokens), tuple(sentences)


def _parse_trigger_links_events(
    record: Mapping[str, Any], spec: Mapping[str, Any], inclusive: bool, lineno: int
) -> list[EventInstance]:
    # Upstream style: triggers listed once, arguments attached via
    # (trigger span, argument span, coded role) link triples.
    role_pattern = re.compile(spec["role_pattern"]) if spec.get("role_pattern") else None
    triggers = []
    for ti, raw in enumerate(record.get(spec["triggers_field"], [])):
        span = _span_from_pair(raw, inclusive=inclusive, lineno=lineno,
                               fieldname=f"{spec['triggers_field']}[{ti}]")
        type_entries = raw[2]
        event_type = str(type_entries[0][0]) if type_entries else "unknown"
        triggers.append((span, event_type))
    args_by_trigger: dict[Span, list[ArgumentAnnotation]] = {span: [] for span, _ in triggers}
    for li, link in enumerate(record.get(spec["links_field"], [])):
        fieldname = f"{spec['links_field']}[{li}]"
        trig_span = _span_from_pair(link[0], inclusive=inclusive, lineno=lineno, fieldname=fieldname)
        arg_span = _span_from_pair(link[1], inclusive=inclusive, lineno=lineno, fieldname=fieldname)
        role = str(link[2])
        if role_pattern is not None:
            match = role_pattern.match(role)
            if match is None:
                raise DataError(f"role label '{role}' does not match profile pattern",
                                line=lineno, field=fieldname)
            role = match.group("role")
        if trig_span not in args_by_trigger:
            raise DataError("link references an unlisted trigger", line=lineno, field=fieldname)
        args_by_trigger[trig_span].append(ArgumentAnnotation(role=role, span=arg_span))
    return [
        EventInstance(event_type=event_type, trigger=span, arguments=tuple(args_by_trigger[span]))
        for span, event_type in triggers
    ]


def _parse_event_mentions(
    record: Mapping[str, Any], spec: Mapping[str, Any], inclusive: bool, lineno: int
) -> list[EventInstance]:
    # Upstream style: self-contained event mentions whose arguments point at
    # entity mentions by id.
    entities: dict[str, Span] = {}
    for raw in record.get(spec["entities_field"], []):
        span = _span_from_pair(
            [raw[spec["entity_start"]], raw[spec["entity_end"]]],
            inclusive=inclusive, lineno=lineno, fieldname=spec["entities_field"],
        )
        entities[str(raw[spec["entity_id_field"]])] = span
    events = []
    for ei, raw_event in enumerate(record.get(spec["field"], [])):
        trig = _require(raw_event, spec["trigger_field"], lineno)
        trigger = _span_from_pair(
            [trig[spec["trigger_start"]], trig[spec["trigger_end"]]],
            inclusive=inclusive, lineno=lineno, fieldname=f"{spec['field']}[{ei}].{spec['trigger_field']}",
        )
        args = []
        for ai, raw_arg in enumerate(raw_event.get(spec["arguments_field"], [])):
            fieldname = f"{spec['field']}[{ei}].{spec['arguments_field']}[{ai}]"
            entity_id = str(_require(raw_arg, spec["entity_ref_field"], lineno))
            if entity_id not in entities:
                raise DataError(f"unknown entity id '{entity_id}'", line=lineno, field=fieldname)
            args.append(
                ArgumentAnnotation(role=str(_require(raw_arg, spec["role_field"], lineno)),
                                   span=entities[entity_id])
            )
        events.append(
            EventInstance(
                event_type=str(_require(raw_event, spec["type_field"], lineno)),
                trigger=trigger,
                arguments=tuple(args),
            )
        )
    return events


def parse_corpus(path: str, profile: str = "canonical") -> Corpus:
    """Parse a line-delimited corpus file into validated documents.

    Every span is validated against its document; problems are reported with
    the offending line number and field.
    """
    table = _load_profile(profile)
    entries: list[tuple[Document, list[EventInstance]]] = []
    for lineno, record in jsonl.read_records(path):
        if table["name"] == "canonical":
            doc, events = _parse_canonical_record(record, lineno)
        else:
            doc_id = str(_require(record, table["doc_id_field"], lineno))
            tokens, sentences = _tokens_and_sentences(record, table, lineno)
            doc = Document(doc_id=doc_id, tokens=tokens, sentences=sentences)
            spec = table["events"]
            inclusive = table.get("annotation_spans", "inclusive") == "inclusive"
            if spec["style"] == "trigger_links":
                events = _parse_trigger_links_events(record, spec, inclusive, lineno)
            elif spec["style"] == "event_mentions":
                events = _parse_event_mentions(record, spec, inclusive, lineno)
            else:
                raise ConfigError(f"unknown event mapping style '{spec['style']}'")
        _check_entry_spans(doc, events, lineno)
        entries.append((doc, events))
    return Corpus(entries)


def corpus_to_records(corpus: Corpus) -> Iterator[dict[str, Any]]:
    for doc, events in corpus:
        yield {
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


def write_corpus(corpus: Corpus, path: str) -> None:
    """Write the canonical JSONL representation (round-trips via parse_corpus)."""
    jsonl.write_records(path, corpus_to_records(corpus))


def load_coref_chains(path: str, corpus: Corpus) -> dict[str, list[CorefChain]]:
    """Load the coreference sidecar and validate every mention span.

    Chains come from an external tool; this toolkit only ingests them.
    Sidecar schema: ``{"doc_id": ..., "chains": [[{"start", "end"}, ...], ...]}``.
    """
    chains_by_doc: dict[str, list[CorefChain]] = {}
    for lineno, record in jsonl.read_records(path):
        doc_id = str(_require(record, "doc_id", lineno))
        if doc_id not in corpus:
            raise DataError(f"unknown doc_id '{doc_id}'", line=lineno)
        doc = corpus.document(doc_id)
        for ci, raw_chain in enumerate(_require(record, "chains", lineno)):
            if not raw_chain:
                raise DataError("chain has no mentions", line=lineno, field=f"chains[{ci}]")
            mentions = []
            for mi, raw in enumerate(raw_chain):
                fieldname = f"chains[{ci}][{mi}]"
                span = _span_from_pair(
                    [raw["start"], raw["end"]], inclusive=True, lineno=lineno, fieldname=fieldname,
                )
                if span.end >= doc.token_count:
                    raise DataError(
                        f"mention span [{span.start}, {span.end}] out of bounds in doc '{doc_id}'",
                        line=lineno, field=fieldname,
                    )
                mentions.append(CorefMention(span=span, text=doc.span_text(span)))
            chains_by_doc.setdefault(doc_id, []).append(
                CorefChain(doc_id=doc_id, mentions=tuple(mentions))
            )
    return chains_by_doc
