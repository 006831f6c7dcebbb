"""Data augmentation that turns intra-sentential arguments into
inter-sentential ones while producing new training instances.

Three families:

* swapping — move the argument tokens (``simple_swap``) or a generated
  carrier sentence (``verbose_swap``) to a randomly chosen sentence
  boundary;
* coreference — relocate the annotation to another mention of the same
  chain (``coref_replace``), random or longest-mention ("meaningful");
* paraphrase alignment — re-anchor annotations inside externally
  paraphrased text (``align_paraphrase``).

All operations are pure given the per-call seed. Grammaticality of the
output is explicitly not a goal; span bookkeeping is.
"""

import logging
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from enum import Enum

from .corpus import (
    ArgumentAnnotation,
    CorefChain,
    Document,
    EventInstance,
    Span,
    argument_distance,
    find_token_matches,
    sentence_of,
    validate_document,
)
from .errors import AugmentError, DataError

logger = logging.getLogger(__name__)

_TERMINALS = ".!?"
_CLOSERS = "\"')]}”’»"


class AugmentMethod(str, Enum):
    SIMPLE_SWAP = "simple_swap"
    VERBOSE_SWAP = "verbose_swap"
    COREF_RANDOM = "coref_random"
    COREF_MEANINGFUL = "coref_meaningful"
    PARA_SENTENCE = "para_sentence"
    PARA_DOCUMENT = "para_document"


@dataclass(frozen=True)
class Provenance:
    method: AugmentMethod
    source_doc_id: str
    event_index: int
    argument_index: int | None
    moved_role: str | None
    original_distance: int | None
    new_distance: int | None
    seed: int | None


@dataclass(frozen=True)
class AugmentedInstance:
    document: Document
    events: tuple[EventInstance, ...]
    provenance: Provenance


@dataclass(frozen=True)
class Unalignable:
    """Alignment outcome when a surface form vanished from the paraphrase."""

    doc_id: str
    missing: str
    detail: str = ""


def boundary_positions(doc: Document) -> list[int]:
    """Token offsets of the S+1 candidate positions for a document with S
    sentences: the gap before each sentence plus the document end.  The end
    of sentence i and the beginning of sentence i+1 are the same position.
    """
    return [start for start, _ in doc.sentences] + [doc.token_count]


def _check_swappable(doc: Document, event: EventInstance, arg: ArgumentAnnotation) -> None:
    if sentence_of(doc, arg.span.start) != sentence_of(doc, arg.span.end):
        raise AugmentError(
            f"argument '{arg.role}' spans a sentence boundary and cannot be swapped"
        )
    if argument_distance(doc, event, arg) != 0:
        raise AugmentError(f"argument '{arg.role}' is already inter-sentential")
    if arg.span.overlaps(event.trigger):
        raise AugmentError(f"argument '{arg.role}' overlaps the event trigger")


def _map_spans(
    events: Sequence[EventInstance],
    removed: Span,
    insert_at: int,
    insert_len: int,
    nested_target: int,
    skip: tuple[int, int],
) -> list[EventInstance]:
    """Re-index all event spans after removing ``removed`` and inserting
    ``insert_len`` tokens at post-removal offset ``insert_at``.

    Spans nested inside the removed region relocate to ``nested_target``
    (the moved argument's new location); the moved argument itself
    (``skip``) is handled by the caller.
    """
    removed_len = len(removed)

    def map_span(span: Span, what: str) -> Span:
        if removed.contains(span):
            offset = span.start - removed.start
            return Span(nested_target + offset, nested_target + offset + len(span) - 1)
        if span.overlaps(removed):
            raise AugmentError(f"{what} partially overlaps the moved argument")
        start, end = span.start, span.end
        if start > removed.end:
            start -= removed_len
            end -= removed_len
        if start >= insert_at:
            start += insert_len
            end += insert_len
        elif end >= insert_at:
            raise AugmentError(f"{what} is split by the insertion point")
        return Span(start, end)

    mapped = []
    for ei, event in enumerate(events):
        trigger = map_span(event.trigger, f"event {ei} trigger")
        args = []
        for ai, arg in enumerate(event.arguments):
            if (ei, ai) == skip:
                args.append(arg)  # placeholder, replaced by the caller
                continue
            args.append(replace(arg, span=map_span(arg.span, f"event {ei} argument '{arg.role}'")))
        mapped.append(replace(event, trigger=trigger, arguments=tuple(args)))
    return mapped


def _finish(
    doc: Document,
    tokens: list[str],
    sentences: list[tuple[int, int]],
    events: list[EventInstance],
    provenance: Provenance,
) -> AugmentedInstance:
    derived = Document(doc_id=doc.doc_id, tokens=tuple(tokens), sentences=tuple(sentences))
    violations = validate_document(derived, events)
    if violations:
        v = violations[0]
        raise AugmentError(f"derived document is invalid ({v.invariant} at {v.location}): {v.message}")
    return AugmentedInstance(document=derived, events=tuple(events), provenance=provenance)


def _sentence_lengths(doc: Document) -> list[int]:
    return [end - start for start, end in doc.sentences]


def _starts_from_lengths(lengths: Sequence[int]) -> list[tuple[int, int]]:
    ranges = []
    cursor = 0
    for length in lengths:
        ranges.append((cursor, cursor + length))
        cursor += length
    return ranges


def simple_swap(
    doc: Document,
    events: Sequence[EventInstance],
    event_index: int,
    argument_index: int,
    seed: int,
    *,
    strict_inter: bool = False,
) -> AugmentedInstance:
    """Move an intra-sentential argument's tokens to a random sentence boundary.

    A document with S sentences offers S+1 candidate positions; one is drawn
    uniformly. The inserted tokens attach to the sentence following the
    boundary (the last sentence for the document-end position). Token
    multiset is preserved; every other span is re-indexed in place.
    """
    event = events[event_index]
    arg = event.arguments[argument_index]
    _check_swappable(doc, event, arg)

    source_sentence = sentence_of(doc, arg.span.start)
    positions = boundary_positions(doc)
    sentence_count = doc.sentence_count
    candidates = list(range(len(positions)))
    if strict_inter:
        candidates = [
            bi for bi in candidates
            if (bi if bi < sentence_count else sentence_count - 1) != source_sentence
        ]
        if not candidates:
            raise AugmentError("no candidate position yields an inter-sentential argument")
    choice = candidates[random.Random(seed).randrange(len(candidates))]

    arg_len = len(arg.span)
    boundary = positions[choice]
    insert_at = boundary if boundary <= arg.span.start else boundary - arg_len
    attach_sentence = choice if choice < sentence_count else sentence_count - 1

    arg_tokens = list(doc.span_tokens(arg.span))
    tokens = list(doc.tokens)
    del tokens[arg.span.start : arg.span.end + 1]
    tokens[insert_at:insert_at] = arg_tokens

    lengths = _sentence_lengths(doc)
    lengths[source_sentence] -= arg_len
    lengths[attach_sentence] += arg_len

    new_span = Span(insert_at, insert_at + arg_len - 1)
    mapped = _map_spans(events, arg.span, insert_at, arg_len,
                        nested_target=insert_at, skip=(event_index, argument_index))
    moved = replace(arg, span=new_span)
    new_args = list(mapped[event_index].arguments)
    new_args[argument_index] = moved
    mapped[event_index] = replace(mapped[event_index], arguments=tuple(new_args))

    instance = _finish(
        doc, tokens, _starts_from_lengths(lengths), mapped,
        Provenance(
            method=AugmentMethod.SIMPLE_SWAP,
            source_doc_id=doc.doc_id,
            event_index=event_index,
            argument_index=argument_index,
            moved_role=arg.role,
            original_distance=0,
            new_distance=0,
            seed=seed,
        ),
    )
    new_distance = argument_distance(
        instance.document, instance.events[event_index],
        instance.events[event_index].arguments[argument_index],
    )
    return replace(instance, provenance=replace(instance.provenance, new_distance=new_distance))


def verbose_swap(
    doc: Document,
    events: Sequence[EventInstance],
    event_index: int,
    argument_index: int,
    seed: int,
    *,
    strict_inter: bool = False,
) -> AugmentedInstance:
    """Like simple_swap, but insert a standalone carrier sentence
    "The {role} of the event {trigger} is {argument} ." at the chosen
    boundary; the annotation points at the argument inside it and the
    original argument tokens are removed.
    """
    event = events[event_index]
    arg = event.arguments[argument_index]
    _check_swappable(doc, event, arg)

    source_sentence = sentence_of(doc, arg.span.start)
    positions = boundary_positions(doc)
    candidates = list(range(len(positions)))
    # The carrier sentence is always distinct from the trigger's sentence,
    # so every candidate is inter-sentential; strict_inter never filters.
    choice = candidates[random.Random(seed).randrange(len(candidates))]

    arg_tokens = list(doc.span_tokens(arg.span))
    trigger_tokens = list(doc.span_tokens(event.trigger))
    carrier = ["The", arg.role, "of", "the", "event", *trigger_tokens, "is", *arg_tokens, "."]
    arg_offset = 6 + len(trigger_tokens)

    arg_len = len(arg.span)
    boundary = positions[choice]
    insert_at = boundary if boundary <= arg.span.start else boundary - arg_len

    tokens = list(doc.tokens)
    del tokens[arg.span.start : arg.span.end + 1]
    tokens[insert_at:insert_at] = carrier

    lengths = _sentence_lengths(doc)
    lengths[source_sentence] -= arg_len
    lengths.insert(choice, len(carrier))

    new_span = Span(insert_at + arg_offset, insert_at + arg_offset + arg_len - 1)
    mapped = _map_spans(events, arg.span, insert_at, len(carrier),
                        nested_target=new_span.start, skip=(event_index, argument_index))
    moved = replace(arg, span=new_span)
    new_args = list(mapped[event_index].arguments)
    new_args[argument_index] = moved
    mapped[event_index] = replace(mapped[event_index], arguments=tuple(new_args))

    instance = _finish(
        doc, tokens, _starts_from_lengths(lengths), mapped,
        Provenance(
            method=AugmentMethod.VERBOSE_SWAP,
            source_doc_id=doc.doc_id,
            event_index=event_index,
            argument_index=argument_index,
            moved_role=arg.role,
            original_distance=0,
            new_distance=0,
            seed=seed,
        ),
    )
    new_distance = argument_distance(
        instance.document, instance.events[event_index],
        instance.events[event_index].arguments[argument_index],
    )
    return replace(instance, provenance=replace(instance.provenance, new_distance=new_distance))


def coref_replace(
    doc: Document,
    events: Sequence[EventInstance],
    event_index: int,
    argument_index: int,
    chains: Sequence[CorefChain],
    mode: str,
    seed: int | None = None,
) -> AugmentedInstance:
    """Relocate the argument annotation to another mention of its coref chain.

    ``mode='random'`` draws uniformly among the other mentions;
    ``mode='meaningful'`` takes the mention with the most tokens (earliest
    wins ties). The document text never changes.
    """
    if mode not in ("random", "meaningful"):
        raise DataError(f"mode must be 'random' or 'meaningful', got '{mode}'")
    event = events[event_index]
    arg = event.arguments[argument_index]
    chain = next(
        (c for c in chains if any(m.span == arg.span for m in c.mentions)),
        None,
    )
    if chain is None:
        raise AugmentError(f"no coreference chain covers argument '{arg.role}' at "
                           f"[{arg.span.start}, {arg.span.end}]")
    others = [m for m in chain.mentions if m.span != arg.span]
    if not others:
        raise AugmentError("chain has only the original mention")
    if mode == "random":
        if seed is None:
            raise DataError("random mode requires a seed")
        mention = others[random.Random(seed).randrange(len(others))]
    else:
        mention = min(others, key=lambda m: (-len(m.span), m.span.start, m.span.end))

    original_distance = argument_distance(doc, event, arg)
    new_args = list(event.arguments)
    new_args[argument_index] = replace(arg, span=mention.span)
    new_events = list(events)
    new_events[event_index] = replace(event, arguments=tuple(new_args))
    method = AugmentMethod.COREF_RANDOM if mode == "random" else AugmentMethod.COREF_MEANINGFUL
    return AugmentedInstance(
        document=doc,
        events=tuple(new_events),
        provenance=Provenance(
            method=method,
            source_doc_id=doc.doc_id,
            event_index=event_index,
            argument_index=argument_index,
            moved_role=arg.role,
            original_distance=original_distance,
            new_distance=argument_distance(doc, new_events[event_index], new_args[argument_index]),
            seed=seed,
        ),
    )


def _split_sentences(tokens: Sequence[str]) -> list[tuple[int, int]]:
    """Sentence ranges from terminal punctuation (closing quotes tolerated)."""
    ranges = []
    start = 0
    for i, token in enumerate(tokens):
        core = token.rstrip(_CLOSERS)
        if core and core[-1] in _TERMINALS:
            ranges.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        ranges.append((start, len(tokens)))
    return ranges


def _locate(
    tokens: Sequence[str], surface: Sequence[str], what: str, taken: dict[Span, str]
) -> Span | None:
    matches = find_token_matches(tokens, surface)
    if not matches:
        return None
    span = matches[0]
    if span in taken and taken[span] != what:
        logger.warning("alignment collision: %s and %s both resolve to [%d, %d]",
                       taken[span], what, span.start, span.end)
    taken[span] = what
    return span


def align_paraphrase(
    doc: Document,
    events: Sequence[EventInstance],
    paraphrased_text: str,
    scope: str,
    sentence_index: int | None = None,
) -> AugmentedInstance | Unalignable:
    """Re-anchor trigger and argument annotations inside paraphrased text.

    ``scope='document'`` treats the text as a full replacement document
    (whitespace-tokenized, sentence-split on terminal punctuation);
    ``scope='sentence'`` replaces the single sentence ``sentence_index``
    and leaves every other sentence untouched. Surface forms are located by
    exact token-subsequence match with a case-insensitive fallback; the
    first occurrence wins. A missing trigger or argument yields
    :class:`Unalignable` naming it — that is a result, not an error.
    """
    if not paraphrased_text.strip():
        raise DataError("paraphrased text is empty")
    if scope not in ("document", "sentence"):
        raise DataError(f"scope must be 'document' or 'sentence', got '{scope}'")

    if scope == "document":
        tokens = paraphrased_text.split()
        sentences = _split_sentences(tokens)
        taken: dict[Span, str] = {}
        new_events = []
        for ei, event in enumerate(events):
            trigger_surface = doc.span_tokens(event.trigger)
            trigger = _locate(tokens, trigger_surface, f"event {ei} trigger", taken)
            if trigger is None:
                return Unalignable(doc.doc_id, " ".join(trigger_surface), f"event {ei} trigger not found")
            args = []
            for arg in event.arguments:
                surface = doc.span_tokens(arg.span)
                span = _locate(tokens, surface, f"event {ei} argument '{arg.role}'", taken)
                if span is None:
                    return Unalignable(doc.doc_id, " ".join(surface), f"argument '{arg.role}' not found")
                args.append(replace(arg, span=span))
            new_events.append(replace(event, trigger=trigger, arguments=tuple(args)))
        return _finish(
            doc, tokens, sentences, new_events,
            Provenance(
                method=AugmentMethod.PARA_DOCUMENT,
                source_doc_id=doc.doc_id,
                event_index=0,
                argument_index=None,
                moved_role=None,
                original_distance=None,
                new_distance=None,
                seed=None,
            ),
        )

    if sentence_index is None or not 0 <= sentence_index < doc.sentence_count:
        raise DataError(f"sentence scope requires a valid sentence_index, got {sentence_index!r}")
    old_start, old_end = doc.sentences[sentence_index]
    new_sent = paraphrased_text.split()
    delta = len(new_sent) - (old_end - old_start)
    tokens = list(doc.tokens[:old_start]) + new_sent + list(doc.tokens[old_end:])
    sentences = [
        (s + delta, e + delta) if s >= old_end else ((s, e) if e <= old_start else (old_start, old_end + delta))
        for s, e in doc.sentences
    ]

    def remap(span: Span, what: str, surface: Sequence[str]) -> Span | Unalignable:
        if span.end < old_start:
            return span
        if span.start >= old_end:
            return Span(span.start + delta, span.end + delta)
        if span.start >= old_start and span.end < old_end:
            matches = find_token_matches(new_sent, surface)
            if not matches:
                return Unalignable(doc.doc_id, " ".join(surface), f"{what} not found in paraphrased sentence")
            hit = matches[0]
            return Span(old_start + hit.start, old_start + hit.end)
        return Unalignable(doc.doc_id, " ".join(surface), f"{what} crosses the paraphrased sentence boundary")

    new_events = []
    for ei, event in enumerate(events):
        trigger = remap(event.trigger, f"event {ei} trigger", doc.span_tokens(event.trigger))
        if isinstance(trigger, Unalignable):
            return trigger
        args = []
        for arg in event.arguments:
            span = remap(arg.span, f"argument '{arg.role}'", doc.span_tokens(arg.span))
            if isinstance(span, Unalignable):
                return span
            args.append(replace(arg, span=span))
        new_events.append(replace(event, trigger=trigger, arguments=tuple(args)))
    return _finish(
        doc, tokens, sentences, new_events,
        Provenance(
            method=AugmentMethod.PARA_SENTENCE,
            source_doc_id=doc.doc_id,
            event_index=0,
            argument_index=None,
            moved_role=None,
            original_distance=None,
            new_distance=None,
            seed=None,
        ),
    )


def inter_sentential_rate(
    items: Iterable[tuple[Document, Sequence[EventInstance]] | AugmentedInstance],
) -> float:
    """Fraction of arguments whose sentence distance from the trigger is nonzero."""
    total = 0
    inter = 0
    for item in items:
        if isinstance(item, AugmentedInstance):
            doc, events = item.document, item.events
        else:
            doc, events = item
        for event in events:
            for arg in event.arguments:
                total += 1
                if argument_distance(doc, event, arg) != 0:
                    inter += 1
    return inter / total if total else 0.0
