"""Single pipeline entry point.

Subcommands: ingest, stats, genq, qg-prompts, augment, build-qa,
llm-extract, score, analyze. Runs are driven by an optional config file
(YAML or JSON key-value tree) with command-line flags winning on conflict.
Every subcommand writes a run manifest (input digests, seed, timestamp,
tool version) next to its artifacts; the artifacts themselves are
byte-deterministic for offline subcommands.

Exit codes: 0 success, 2 config error, 3 data error, 4 network error.
"""

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
import zlib
from typing import Any

import yaml

from . import __version__, jsonl
from .augment import (
    AugmentMethod,
    Unalignable,
    align_paraphrase,
    coref_replace,
    simple_swap,
    verbose_swap,
)
from .corpus import (
    Corpus,
    Ontology,
    corpus_stats,
    corpus_to_records,
    load_coref_chains,
    parse_corpus,
    write_corpus,
)
from .errors import AugmentError, ConfigError, DataError, EaqaError, NetworkError
from .llmclient import (
    CompletionCache,
    EndpointConfig,
    run_extraction,
)
from .qadata import (
    MixPolicy,
    QuestionSources,
    build_qa_dataset,
    dataset_report,
    write_qa_dataset,
)
from .questiongen import (
    QuestionStrategy,
    build_qg_training_set,
    emit_contextualized_qg_prompt,
    emit_role_prompt,
    export_squad_qg_triples,
    generate_template_question,
    instantiate_bank_question,
    load_contextualized_questions,
    load_question_bank,
    write_qg_training_set,
)
from .scoring import (
    attach_span_text,
    evaluate,
    pool_confusion,
    read_predictions,
    score_lenient,
    score_strict,
    write_error_cases,
    write_predictions,
    write_report,
)

logger = logging.getLogger("eaqa")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NETWORK = 4

_METHODS = {
    "swap": AugmentMethod.SIMPLE_SWAP,
    "verbose-swap": AugmentMethod.VERBOSE_SWAP,
    "coref-random": AugmentMethod.COREF_RANDOM,
    "coref-meaningful": AugmentMethod.COREF_MEANINGFUL,
    "para-align": AugmentMethod.PARA_DOCUMENT,
}


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir: str, inputs: list[str], outputs: list[str],
                    seed: int | None = None, extra: dict[str, Any] | None = None) -> None:
    manifest = {
        "tool": "eaqa",
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "seed": seed,
        "inputs": {path: _sha256(path) for path in inputs if path and os.path.exists(path)},
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_run_config(path: str) -> dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"config file '{path}' does not exist")
    with open(path, encoding="utf-8") as handle:
        if path.endswith((".yaml", ".yml")):
            raw = yaml.safe_load(handle)
        else:
            raw = json.load(handle)
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a key-value mapping")
    return raw


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Config file supplies defaults; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    config = load_run_config(args.config)
    for key, value in config.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)
    return args


def _require_args(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")
    for name in ("input", "ontology", "coref", "gold", "pred", "bank", "questions"):
        value = getattr(args, name, None)
        if isinstance(value, str) and not os.path.exists(value):
            raise ConfigError(f"file for --{name} does not exist: {value}")


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _strategy(name: str) -> QuestionStrategy:
    try:
        return QuestionStrategy(name.replace("-", "_"))
    except ValueError:
        raise ConfigError(f"unknown question strategy '{name}'") from None


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_ingest(args: argparse.Namespace) -> int:
    _require_args(args, "input", "out")
    corpus = parse_corpus(args.input, args.profile)
    outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
    write_corpus(corpus, args.out)
    _write_manifest(outdir, [args.input], [args.out],
                    extra={"stage": "ingest", "profile": args.profile, "documents": len(corpus)})
    logger.info("stage=ingest documents=%d out=%s", len(corpus), args.out)
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    _require_args(args, "input")
    corpus = parse_corpus(args.input, args.profile)
    ontology = Ontology.load(args.ontology) if args.ontology else None
    stats = corpus_stats(corpus, ontology)
    payload = stats.to_json_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        _write_manifest(outdir, [args.input, args.ontology or ""], [args.out],
                        extra={"stage": "stats"})
    return EXIT_OK


def _load_sources(args: argparse.Namespace, corpus: Corpus, ontology: Ontology) -> QuestionSources:
    banks = {}
    for spec in args.bank or []:
        name, _, path = spec.partition("=")
        strategy = _strategy(name)
        banks[strategy] = load_question_bank(path, strategy, ontology)
    contextualized = {}
    for spec in args.questions or []:
        name, _, path = spec.partition("=")
        strategy = _strategy(name)
        contextualized[strategy] = load_contextualized_questions(path, corpus, strategy)
    lexicon = None
    if args.wh_lexicon:
        with open(args.wh_lexicon, encoding="utf-8") as handle:
            lexicon = json.load(handle)
    return QuestionSources(banks=banks, contextualized=contextualized, wh_lexicon=lexicon)


def _cmd_genq(args: argparse.Namespace) -> int:
    if args.squad_triples:
        _require_args(args, "out")
        if not os.path.exists(args.squad_triples):
            raise ConfigError(f"file for --squad-triples does not exist: {args.squad_triples}")
        triples = list(export_squad_qg_triples(args.squad_triples))
        outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
        jsonl.write_records(args.out, triples)
        _write_manifest(outdir, [args.squad_triples], [args.out],
                        extra={"stage": "genq", "triples": len(triples)})
        logger.info("stage=genq triples=%d out=%s", len(triples), args.out)
        return EXIT_OK

    _require_args(args, "input", "ontology", "out")
    corpus = parse_corpus(args.input, args.profile)
    ontology = Ontology.load(args.ontology)
    outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
    inputs = [args.input, args.ontology]

    if args.qg_training:
        if not args.questions:
            raise ConfigError("--qg-training requires --questions strategy=path")
        sources = _load_sources(args, corpus, ontology)
        strategy, questions = next(iter(sources.contextualized.items()))
        examples = build_qg_training_set(corpus, questions)
        write_qg_training_set(examples, args.out)
        inputs.extend(spec.partition("=")[2] for spec in args.questions)
        _write_manifest(outdir, inputs, [args.out],
                        extra={"stage": "genq", "examples": len(examples),
                               "strategy": strategy.value})
        logger.info("stage=genq examples=%d out=%s", len(examples), args.out)
        return EXIT_OK

    strategy = _strategy(args.strategy or "template")
    sources = _load_sources(args, corpus, ontology)
    records = []
    for doc, events in corpus:
        for event_index, event in enumerate(events):
            trigger_text = doc.span_text(event.trigger)
            for role in ontology.roles_for(event.event_type):
                if strategy is QuestionStrategy.TEMPLATE:
                    question = generate_template_question(
                        trigger_text, role, sources.wh_lexicon, event_type=event.event_type)
                else:
                    bank = sources.banks.get(strategy)
                    if bank is None:
                        raise ConfigError(f"--bank {strategy.value}=PATH is required")
                    question = instantiate_bank_question(
                        bank, trigger_text, role, event_type=event.event_type)
                records.append({
                    "doc_id": doc.doc_id,
                    "event_index": event_index,
                    "event_type": event.event_type,
                    "trigger": trigger_text,
                    "role": role,
                    "strategy": strategy.value,
                    "question": question.text,
                })
    jsonl.write_records(args.out, records)
    inputs.extend(spec.partition("=")[2] for spec in args.bank or [])
    _write_manifest(outdir, inputs, [args.out],
                    extra={"stage": "genq", "questions": len(records), "strategy": strategy.value})
    logger.info("stage=genq questions=%d out=%s", len(records), args.out)
    return EXIT_OK


def _cmd_qg_prompts(args: argparse.Namespace) -> int:
    _require_args(args, "ontology")
    ontology = Ontology.load(args.ontology)
    if args.mode in ("zero", "few"):
        exemplars = []
        if args.exemplars:
            with open(args.exemplars, encoding="utf-8") as handle:
                exemplars = [tuple(pair) for pair in json.load(handle)]
        text = emit_role_prompt(ontology, args.mode, exemplars)
        prompts = [text]
    elif args.mode == "contextual":
        _require_args(args, "input")
        corpus = parse_corpus(args.input, args.profile)
        prompts = []
        for doc, events in corpus:
            for event in events:
                for role in ontology.roles_for(event.event_type):
                    prompts.append(emit_contextualized_qg_prompt(doc, event, role))
    else:
        raise ConfigError(f"unknown prompt mode '{args.mode}'")
    payload = "\n===\n".join(prompts)
    if args.out:
        outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(payload)
        _write_manifest(outdir, [args.ontology, args.input or ""], [args.out],
                        extra={"stage": "qg-prompts", "mode": args.mode, "prompts": len(prompts)})
    else:
        print(payload)
    return EXIT_OK


def _item_seed(master: int, doc_id: str, event_index: int, arg_index: int) -> int:
    material = f"{master}:{doc_id}:{event_index}:{arg_index}".encode("utf-8")
    return zlib.crc32(material)


def _cmd_augment(args: argparse.Namespace) -> int:
    _require_args(args, "input", "method", "out")
    if args.seed is None:
        args.seed = 0
    method = _METHODS.get(args.method)
    if method is None:
        raise ConfigError(f"unknown augmentation method '{args.method}'")
    corpus = parse_corpus(args.input, args.profile)
    chains = {}
    if method in (AugmentMethod.COREF_RANDOM, AugmentMethod.COREF_MEANINGFUL):
        _require_args(args, "coref")
        chains = load_coref_chains(args.coref, corpus)
    paraphrases = {}
    if method is AugmentMethod.PARA_DOCUMENT:
        _require_args(args, "paraphrases")
        for lineno, record in jsonl.read_records(args.paraphrases):
            if "doc_id" not in record or "text" not in record:
                raise DataError("paraphrase record needs doc_id and text", line=lineno)
            paraphrases[record["doc_id"]] = record["text"]

    def augment_entry(entry):
        """Original record plus augmented copies for one document.

        Pure given the master seed, so results are identical no matter how
        the pool schedules documents.
        """
        doc, events = entry
        out = [next(iter(corpus_to_records(Corpus([(doc, events)]))))]
        local_skipped = 0
        k = 0
        if method is AugmentMethod.PARA_DOCUMENT:
            if doc.doc_id not in paraphrases:
                return out, 0
            outcome = align_paraphrase(doc, events, paraphrases[doc.doc_id], args.scope,
                                       sentence_index=args.sentence_index)
            if isinstance(outcome, Unalignable):
                logger.warning("stage=augment doc_id=%s unalignable=%s",
                               doc.doc_id, outcome.missing)
                return out, 1
            out.append(_augmented_record(outcome, 1))
            return out, 0
        for event_index, event in enumerate(events):
            for arg_index in range(len(event.arguments)):
                seed = _item_seed(args.seed, doc.doc_id, event_index, arg_index)
                try:
                    if method is AugmentMethod.SIMPLE_SWAP:
                        instance = simple_swap(doc, events, event_index, arg_index, seed,
                                               strict_inter=args.strict_inter)
                    elif method is AugmentMethod.VERBOSE_SWAP:
                        instance = verbose_swap(doc, events, event_index, arg_index, seed,
                                                strict_inter=args.strict_inter)
                    else:
                        mode = "random" if method is AugmentMethod.COREF_RANDOM else "meaningful"
                        instance = coref_replace(doc, events, event_index, arg_index,
                                                 chains.get(doc.doc_id, []), mode, seed)
                except AugmentError as exc:
                    logger.info("stage=augment doc_id=%s skipped: %s", doc.doc_id, exc)
                    local_skipped += 1
                    continue
                k += 1
                out.append(_augmented_record(instance, k))
        return out, local_skipped

    records = []
    skipped = 0
    augmented = 0
    for out, local_skipped in _parallel_map(augment_entry, list(corpus), args.jobs):
        records.extend(out)
        skipped += local_skipped
        augmented += len(out) - 1
    outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
    jsonl.write_records(args.out, records)
    _write_manifest(outdir, [args.input, args.coref or "", args.paraphrases or ""],
                    [args.out], seed=args.seed,
                    extra={"stage": "augment", "method": args.method,
                           "augmented": augmented, "skipped": skipped})
    logger.info("stage=augment method=%s augmented=%d skipped=%d", args.method, augmented, skipped)
    return EXIT_OK


def _parallel_map(fn, items, jobs):
    """Worker pool preserving input order; falls back to serial for jobs<=1."""
    if not jobs or jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _augmented_record(instance, counter: int) -> dict[str, Any]:
    derived = Corpus([(instance.document, instance.events)])
    record = next(iter(corpus_to_records(derived)))
    record["doc_id"] = f"{instance.document.doc_id}#aug{counter}"
    prov = dataclasses.asdict(instance.provenance)
    prov["method"] = instance.provenance.method.value
    record["provenance"] = prov
    return record


def _cmd_build_qa(args: argparse.Namespace) -> int:
    _require_args(args, "input", "ontology", "split", "out")
    corpus = parse_corpus(args.input, args.profile)
    ontology = Ontology.load(args.ontology)
    sources = _load_sources(args, corpus, ontology)
    train = frozenset(_strategy(s) for s in (args.train_strategies or "template").split(","))
    policy = MixPolicy(
        train_strategies=train,
        test_strategy=_strategy(args.test_strategy or "template"),
        contextualized_per_role_cap=args.cap if args.cap is not None else 5,
    )
    instances = build_qa_dataset(corpus, ontology, sources, policy, args.split,
                                 context_window=args.context_window)
    outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
    write_qa_dataset(instances, args.out)
    report = dataset_report(instances)
    print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    inputs = [args.input, args.ontology]
    inputs.extend(spec.partition("=")[2] for spec in (args.bank or []))
    inputs.extend(spec.partition("=")[2] for spec in (args.questions or []))
    _write_manifest(outdir, inputs, [args.out],
                    extra={"stage": "build-qa", "split": args.split,
                           "instances": report.total})
    return EXIT_OK


def _cmd_llm_extract(args: argparse.Namespace) -> int:
    _require_args(args, "input", "ontology", "endpoint_url", "model", "out")
    corpus = parse_corpus(args.input, args.profile)
    ontology = Ontology.load(args.ontology)
    config = EndpointConfig(
        base_url=args.endpoint_url,
        model=args.model,
        temperature=args.temperature if args.temperature is not None else 0.0,
        max_tokens=args.max_tokens if args.max_tokens is not None else 256,
        credential_env=args.credential_env or "EAQA_API_KEY",
        timeout=args.timeout if args.timeout is not None else 30.0,
        retries=args.retries if args.retries is not None else 3,
    )
    cache = CompletionCache(args.cache) if args.cache else None
    predictions = run_extraction(corpus, ontology, config, cache,
                                 one_per_call=args.one_per_call)
    outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
    write_predictions(predictions, args.out)
    _write_manifest(outdir, [args.input, args.ontology], [args.out],
                    extra={"stage": "llm-extract", "predictions": len(predictions)})
    logger.info("stage=llm-extract predictions=%d out=%s", len(predictions), args.out)
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    _require_args(args, "pred", "gold")
    corpus = parse_corpus(args.gold, args.profile)
    preds = read_predictions(args.pred)
    if args.lenient:
        report = score_lenient(attach_span_text(preds, corpus), corpus)
        title = "lenient"
    else:
        report = score_strict(preds, corpus)
        title = "strict"
    print(report.table(title))
    if args.out:
        outdir = _outdir(os.path.dirname(os.path.abspath(args.out)) or ".")
        write_report(report, args.out)
        _write_manifest(outdir, [args.pred, args.gold], [args.out],
                        extra={"stage": "score", "mode": title})
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    _require_args(args, "pred", "gold", "outdir")
    corpus = parse_corpus(args.gold, args.profile)
    preds = read_predictions(args.pred)
    chains = load_coref_chains(args.coref, corpus) if args.coref else None
    report, confusion, errors = evaluate(preds, corpus, chains=chains,
                                         top_k=args.top_k if args.top_k is not None else 15)
    outdir = _outdir(args.outdir)
    report_path = os.path.join(outdir, "report.json")
    write_report(report, report_path)
    confusion_path = os.path.join(outdir, "confusion.csv")
    role_count = len(confusion.labels)
    pool_confusion(confusion, corpus, top_k=args.top_k if args.top_k is not None else 15) \
        .to_csv(confusion_path)
    errors_path = os.path.join(outdir, "errors.jsonl")
    write_error_cases(errors, errors_path)
    print(report.table("strict"))
    print(f"confusion roles={role_count} diagonal={confusion.diagonal_sum()}")
    summary = dict(sorted(errors.histogram.items()))
    if not errors.chains_available:
        summary["note"] = "chains unavailable: alternative spans fold into partial/wrong"
    print(json.dumps({"errors": summary}, indent=2))
    _write_manifest(outdir, [args.pred, args.gold, args.coref or ""],
                    [report_path, confusion_path, errors_path],
                    extra={"stage": "analyze"})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eaqa",
        description="Event-argument QA pipeline: corpora to questions, "
                    "augmentation, extraction and scoring.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="YAML/JSON config file; flags override it")
        p.add_argument("--profile", default="canonical",
                       choices=("canonical", "rams", "wikievents"))
        p.add_argument("--jobs", type=int, default=os.cpu_count(),
                       help="worker pool size for per-document stages")
        p.add_argument("--log-level", default="INFO")

    p = sub.add_parser("ingest", help="parse an upstream corpus into the canonical format")
    common(p)
    p.add_argument("--input")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("stats", help="corpus statistics")
    common(p)
    p.add_argument("--input")
    p.add_argument("--ontology")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("genq", help="generate questions or the QG training set")
    common(p)
    p.add_argument("--input")
    p.add_argument("--ontology")
    p.add_argument("--strategy")
    p.add_argument("--bank", action="append", metavar="STRATEGY=PATH")
    p.add_argument("--questions", action="append", metavar="STRATEGY=PATH")
    p.add_argument("--wh-lexicon")
    p.add_argument("--qg-training", action="store_true")
    p.add_argument("--squad-triples", metavar="SQUAD_JSON",
                   help="export (context, answer, question) triples instead")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_genq)

    p = sub.add_parser("qg-prompts", help="emit LLM prompts for question generation")
    common(p)
    p.add_argument("--mode", choices=("zero", "few", "contextual"), default="zero")
    p.add_argument("--ontology")
    p.add_argument("--input")
    p.add_argument("--exemplars", help="JSON list of [role, question] pairs (few mode)")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_qg_prompts)

    p = sub.add_parser("augment", help="produce augmented training instances")
    common(p)
    p.add_argument("--input")
    p.add_argument("--method", choices=sorted(_METHODS))
    p.add_argument("--seed", type=int)
    p.add_argument("--coref")
    p.add_argument("--paraphrases", help="JSONL of {doc_id, text}")
    p.add_argument("--scope", choices=("document", "sentence"), default="document")
    p.add_argument("--sentence-index", type=int)
    p.add_argument("--strict-inter", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_augment)

    p = sub.add_parser("build-qa", help="assemble a QA dataset split")
    common(p)
    p.add_argument("--input")
    p.add_argument("--ontology")
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--train-strategies", help="comma-separated strategy names")
    p.add_argument("--test-strategy")
    p.add_argument("--cap", type=int)
    p.add_argument("--context-window", type=int)
    p.add_argument("--bank", action="append", metavar="STRATEGY=PATH")
    p.add_argument("--questions", action="append", metavar="STRATEGY=PATH")
    p.add_argument("--wh-lexicon")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_build_qa)

    p = sub.add_parser("llm-extract", help="zero/few-shot extraction via a completion endpoint")
    common(p)
    p.add_argument("--input")
    p.add_argument("--ontology")
    p.add_argument("--endpoint-url")
    p.add_argument("--model")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--credential-env")
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--cache")
    p.add_argument("--one-per-call", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_llm_extract)

    p = sub.add_parser("score", help="score predictions against gold")
    common(p)
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("analyze", help="breakdowns, confusion matrix and error taxonomy")
    common(p)
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--coref")
    p.add_argument("--top-k", type=int)
    p.add_argument("--outdir")
    p.set_defaults(handler=_cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(levelname)s %(name)s %(message)s",
    )
    try:
        args = _merge_config(args)
        return args.handler(args)
    except ConfigError as exc:
        logger.error("stage=%s config error: %s", args.command, exc)
        return EXIT_CONFIG
    except NetworkError as exc:
        logger.error("stage=%s network error: %s", args.command, exc)
        return EXIT_NETWORK
    except (DataError, EaqaError) as exc:
        logger.error("stage=%s data error: %s", args.command, exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
