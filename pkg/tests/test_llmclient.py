import json

import pytest

from eaqa.corpus import Corpus, Span
from eaqa.errors import AuthError, DataError, RateLimitError, TransientError
from eaqa.llmclient import (
    CompletionCache,
    EndpointConfig,
    FewShotExemplar,
    build_few_shot_prompt,
    build_zero_shot_prompt,
    call_completion,
    map_answer_to_spans,
    parse_completion,
    run_extraction,
    sample_exemplars,
)
from eaqa.questiongen import generate_template_question

from conftest import make_doc


@pytest.fixture
def question_set(importing_doc):
    doc, events = importing_doc
    questions = [
        generate_template_question("importing", role)
        for role in ("artifact", "origin", "destination")
    ]
    return doc, events[0], questions


@pytest.fixture
def exemplar_pair():
    ex_doc1 = make_doc(
        [["Rebels", "seized", "the", "port", "."], ["Aid", "stopped", "flowing", "."]],
        doc_id="train-1",
    )
    ex1 = FewShotExemplar(
        exemplar_id="train-1#e0",
        doc=ex_doc1,
        questions=tuple(
            generate_template_question("seized", r) for r in ("attacker", "place", "instrument")
        ),
        answers={"attacker": "Rebels", "place": "the port", "instrument": None},
    )
    ex_doc2 = make_doc(
        [["The", "bank", "paid", "fines", "."], ["Regulators", "approved", "."]],
        doc_id="train-2",
    )
    ex2 = FewShotExemplar(
        exemplar_id="train-2#e0",
        doc=ex_doc2,
        questions=tuple(
            generate_template_question("paid", r) for r in ("giver", "recipient", "money")
        ),
        answers={"giver": "The bank", "recipient": None, "money": "fines"},
    )
    return ex1, ex2


class StubTransport:
    """Scriptable endpoint double that records every network call."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def __call__(self, url, headers, body, timeout):
        self.calls += 1
        step = self.script.pop(0) if len(self.script) > 1 else self.script[0]
        if step == "timeout":
            raise TimeoutError("stubbed timeout")
        status, answer = step
        payload = json.dumps({"choices": [{"text": answer}]})
        return status, payload


def _config(**overrides):
    params = {
        "base_url": "https://example.invalid/v1/completions",
        "model": "stub-model",
        "backoff": 0.0,
    }
    params.update(overrides)
    return EndpointConfig(**params)


# ---------------------------------------------------------------------------
# prompt building


def test_zero_shot_prompt_golden(question_set):
    doc, event, questions = question_set
    bundle = build_zero_shot_prompt(doc, event, questions)
    golden = open("tests/data/golden_zero_shot.txt", encoding="utf-8").read()
    assert bundle.prompt == golden
    assert [role for role, _ in bundle.questions] == ["artifact", "origin", "destination"]


def test_few_shot_prompt_golden(question_set, exemplar_pair):
    doc, event, questions = question_set
    bundle = build_few_shot_prompt(doc, event, questions, list(exemplar_pair))
    golden = open("tests/data/golden_few_shot.txt", encoding="utf-8").read()
    assert bundle.prompt == golden
    assert bundle.prompt.count("Document:") == 3
    assert bundle.exemplar_ids == ("train-1#e0", "train-2#e0")


def test_zero_shot_requires_questions(question_set):
    doc, event, _ = question_set
    with pytest.raises(DataError):
        build_zero_shot_prompt(doc, event, [])


def test_few_shot_rejects_wrong_exemplar_count(question_set, exemplar_pair):
    doc, event, questions = question_set
    with pytest.raises(DataError):
        build_few_shot_prompt(doc, event, questions, [exemplar_pair[0]])
    with pytest.raises(DataError):
        build_few_shot_prompt(doc, event, questions, list(exemplar_pair) * 2)


def test_few_shot_warns_without_no_answer(question_set, exemplar_pair):
    doc, event, questions = question_set
    ex1, ex2 = exemplar_pair
    all_answered = FewShotExemplar(
        exemplar_id=ex1.exemplar_id, doc=ex1.doc, questions=ex1.questions,
        answers={"attacker": "Rebels", "place": "the port", "instrument": "boats"},
    )
    other = FewShotExemplar(
        exemplar_id=ex2.exemplar_id, doc=ex2.doc, questions=ex2.questions,
        answers={"giver": "The bank", "recipient": "the state", "money": "fines"},
    )
    with pytest.warns(UserWarning):
        build_few_shot_prompt(doc, event, questions, [all_answered, other])


def test_prompt_determinism(question_set, exemplar_pair):
    doc, event, questions = question_set
    a = build_few_shot_prompt(doc, event, questions, list(exemplar_pair))
    b = build_few_shot_prompt(doc, event, questions, list(exemplar_pair))
    assert a == b


def test_sample_exemplars_deterministic(exemplar_pair):
    pool = list(exemplar_pair) * 3
    assert sample_exemplars(pool, seed=1) == sample_exemplars(pool, seed=1)
    with pytest.raises(DataError):
        sample_exemplars([exemplar_pair[0]], seed=1)


# ---------------------------------------------------------------------------
# completion calls


def test_cache_hit_skips_network(tmp_path, monkeypatch):
    monkeypatch.setenv("EAQA_API_KEY", "k")
    cache = CompletionCache(str(tmp_path / "cache"))
    transport = StubTransport([(200, "artifact: oil")])
    config = _config()
    first = call_completion(config, "prompt text", cache, transport)
    assert first == "artifact: oil"
    assert transport.calls == 1
    second = call_completion(config, "prompt text", cache, transport)
    assert second == first
    assert transport.calls == 1  # served from cache


def test_missing_credential(tmp_path, monkeypatch):
    monkeypatch.delenv("EAQA_API_KEY", raising=False)
    with pytest.raises(AuthError) as err:
        call_completion(_config(), "p", None, StubTransport([(200, "x")]))
    assert "EAQA_API_KEY" in str(err.value)


def test_auth_rejection_names_env_var(monkeypatch):
    monkeypatch.setenv("EAQA_API_KEY", "bad")
    with pytest.raises(AuthError) as err:
        call_completion(_config(), "p", None, StubTransport([(401, "denied")]))
    assert "EAQA_API_KEY" in str(err.value)
    assert err.value.status == 401


def test_retry_on_429_then_success(tmp_path, monkeypatch):
    monkeypatch.setenv("EAQA_API_KEY", "k")
    cache = CompletionCache(str(tmp_path / "cache"))
    transport = StubTransport([(429, ""), (200, "ok")])
    text = call_completion(_config(), "p", cache, transport)
    assert text == "ok"
    assert transport.calls == 2
    entries = list((tmp_path / "cache").glob("*.json"))
    assert len(entries) == 1


def test_rate_limit_exhaustion(monkeypatch):
    monkeypatch.setenv("EAQA_API_KEY", "k")
    with pytest.raises(RateLimitError) as err:
        call_completion(_config(retries=2), "p", None, StubTransport([(429, "")]))
    assert err.value.status == 429


def test_timeout_exhaustion(monkeypatch):
    monkeypatch.setenv("EAQA_API_KEY", "k")
    with pytest.raises(TransientError):
        call_completion(_config(retries=1), "p", None, StubTransport(["timeout"]))


def test_config_validation():
    with pytest.raises(DataError):
        _config(timeout=0)
    with pytest.raises(DataError):
        _config(retries=-1)


# ---------------------------------------------------------------------------
# completion parsing


def test_parse_three_labeled_lines():
    parsed = parse_completion(
        "artifact: oil\norigin: Syria and Iraq\ndestination: No answer",
        ["artifact", "origin", "destination"],
    )
    assert parsed.answers == {
        "artifact": "oil",
        "origin": "Syria and Iraq",
        "destination": None,
    }
    assert parsed.warnings == []


def test_parse_ordinal_lines():
    parsed = parse_completion("1. oil\n2) Syria\n3: No answer", ["artifact", "origin", "destination"])
    assert parsed.answers == {"artifact": "oil", "origin": "Syria", "destination": None}


def test_parse_missing_line_degrades_to_no_answer():
    parsed = parse_completion("artifact: oil\ndestination: nowhere",
                              ["artifact", "origin", "destination"])
    assert parsed.answers["origin"] is None
    assert any("origin" in w for w in parsed.warnings)


def test_parse_extra_prose_flagged():
    parsed = parse_completion("oil\nSyria\nNo answer\nHope that helps!",
                              ["artifact", "origin", "destination"])
    assert parsed.answers["artifact"] == "oil"
    assert parsed.answers["destination"] is None
    assert any("trailing" in w for w in parsed.warnings)


def test_parse_totality_always_covers_roles():
    for text in ("", "garbage", "a: b", "1. x\n2. y\n3. z\n4. w"):
        parsed = parse_completion(text, ["r1", "r2", "r3"])
        assert set(parsed.answers) == {"r1", "r2", "r3"}


# ---------------------------------------------------------------------------
# span mapping


def test_map_answer_single_occurrence(importing_doc):
    doc, _ = importing_doc
    spans = map_answer_to_spans(doc, "Syria and Iraq")
    assert spans == [Span(22, 24)]
    assert doc.span_text(spans[0]) == "Syria and Iraq"


def test_map_answer_two_occurrences(importing_doc):
    doc, _ = importing_doc
    spans = map_answer_to_spans(doc, "oil")
    assert spans == [Span(9, 9), Span(19, 19)]


def test_map_answer_absent(importing_doc):
    doc, _ = importing_doc
    assert map_answer_to_spans(doc, "uranium") == []


def test_map_answer_case_fallback(importing_doc):
    doc, _ = importing_doc
    spans = map_answer_to_spans(doc, "SYRIA AND IRAQ")
    assert spans == [Span(22, 24)]


def test_map_answer_empty_rejected(importing_doc):
    doc, _ = importing_doc
    with pytest.raises(DataError):
        map_answer_to_spans(doc, "   ")


# ---------------------------------------------------------------------------
# extraction pipeline


def test_run_extraction_emits_one_record_per_role(tmp_path, monkeypatch, importing_doc,
                                                  tiny_ontology):
    monkeypatch.setenv("EAQA_API_KEY", "k")
    corpus = Corpus([importing_doc])
    transport = StubTransport(
        [(200, "artifact: oil\norigin: Syria and Iraq\ndestination: No answer")]
    )
    cache = CompletionCache(str(tmp_path / "cache"))
    preds = run_extraction(corpus, tiny_ontology, _config(), cache, transport=transport)
    assert len(preds) == 3
    by_role = {p.role: p for p in preds}
    assert by_role["artifact"].span == Span(9, 9)
    assert by_role["origin"].span == Span(22, 24)
    assert by_role["destination"].span is None
    assert by_role["artifact"].text == "oil"
    # replay: same predictions, zero new network calls
    calls_before = transport.calls
    replay = run_extraction(corpus, tiny_ontology, _config(), cache, transport=transport)
    assert replay == preds
    assert transport.calls == calls_before
