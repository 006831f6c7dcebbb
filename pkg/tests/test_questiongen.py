import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eaqa.corpus import Corpus, Ontology
from eaqa.errors import DataError
from eaqa.questiongen import (
    Question,
    QuestionStrategy,
    YesNoQuestionWarning,
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

from conftest import make_doc, make_event

TEMPLATE_GRAMMAR = re.compile(r"^(What|Where|Who|How) is the .+ of the event .+\?$")


# ---------------------------------------------------------------------------
# template questions


def test_template_question_golden():
    q = generate_template_question("importing", "artifact")
    assert q.text == "What is the artifact of the event importing?"
    assert q.strategy is QuestionStrategy.TEMPLATE
    assert q.doc_id is None


def test_template_question_where():
    q = generate_template_question("agreement", "place", {"place": "where"})
    assert q.text == "Where is the place of the event agreement?"


def test_template_question_who():
    q = generate_template_question("paying", "recipient")
    assert q.text == "Who is the recipient of the event paying?"


def test_template_rejects_bad_wh():
    with pytest.raises(DataError):
        generate_template_question("paying", "recipient", {"recipient": "whom"})


@settings(max_examples=200, deadline=None)
@given(
    trigger=st.text(alphabet="abcdefg ", min_size=1).filter(str.strip),
    role=st.text(alphabet="hijklmn", min_size=1),
)
def test_template_grammar_property(trigger, role):
    q = generate_template_question(trigger, role)
    assert TEMPLATE_GRAMMAR.match(q.text), q.text


def test_question_strategy_context_flag_consistency():
    # doc_id present <=> contextualized strategy
    with pytest.raises(DataError):
        Question(text="Q?", strategy=QuestionStrategy.TEMPLATE, role="r", doc_id="d")
    with pytest.raises(DataError):
        Question(text="Q?", strategy=QuestionStrategy.WEAK_LLM_QG, role="r")
    Question(text="Q?", strategy=QuestionStrategy.WEAK_LLM_QG, role="r", doc_id="d")
    Question(text="Q?", strategy=QuestionStrategy.TEMPLATE, role="r")


# ---------------------------------------------------------------------------
# role prompts (zero / few)


def _wide_ontology(n_roles=65):
    roles = tuple(f"role{i:02d}" for i in range(n_roles))
    return Ontology({"type.a": roles[:33], "type.b": roles[33:]}), roles


def test_zero_shot_role_prompt_lists_all_roles():
    ontology, roles = _wide_ontology()
    prompt = emit_role_prompt(ontology, "zero")
    assert len(roles) == 65
    for role in roles:
        assert f"- {role}\n" in prompt
    assert "Examples:" not in prompt


def test_few_shot_role_prompt_appends_ten_exemplars():
    ontology, _ = _wide_ontology()
    exemplars = [(f"role{i:02d}", f"What is the role{i:02d} of the event [X]?") for i in range(10)]
    zero = emit_role_prompt(ontology, "zero")
    few = emit_role_prompt(ontology, "few", exemplars)
    assert few.startswith(zero.rstrip("\n"))
    assert few.count("of the event [X]?") == 10


def test_few_shot_role_prompt_wrong_count():
    ontology, _ = _wide_ontology()
    exemplars = [(f"r{i}", "q") for i in range(9)]
    with pytest.raises(DataError):
        emit_role_prompt(ontology, "few", exemplars)


def test_role_prompt_deterministic():
    ontology, _ = _wide_ontology()
    assert emit_role_prompt(ontology, "zero") == emit_role_prompt(ontology, "zero")


# ---------------------------------------------------------------------------
# question banks


def _bank_file(tmp_path, mapping):
    path = tmp_path / "bank.json"
    path.write_text(json.dumps(mapping))
    return str(path)


def test_load_question_bank_ok(tmp_path, tiny_ontology):
    mapping = {role: f"What {role} is related to the event [X]?"
               for role in tiny_ontology.all_roles()}
    bank = load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_ZERO,
                              tiny_ontology)
    assert set(bank.roles()) == set(tiny_ontology.all_roles())


def test_load_question_bank_missing_role(tmp_path, tiny_ontology):
    mapping = {role: "What is it in [X]?" for role in tiny_ontology.all_roles() if role != "origin"}
    with pytest.raises(DataError) as err:
        load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_ZERO,
                           tiny_ontology)
    assert "origin" in str(err.value)


def test_load_question_bank_duplicate_role(tmp_path, tiny_ontology):
    roles = tiny_ontology.all_roles()
    body = "{" + ", ".join(f'"{r}": "What about [X]?"' for r in roles) \
        + f', "{roles[0]}": "Again [X]?"' + "}"
    path = tmp_path / "dup.json"
    path.write_text(body)
    with pytest.raises(DataError) as err:
        load_question_bank(str(path), QuestionStrategy.PROMPT_ZERO, tiny_ontology)
    assert "duplicate" in str(err.value)


def test_load_question_bank_yes_no_warns(tmp_path, tiny_ontology):
    mapping = {role: f"What {role} in [X]?" for role in tiny_ontology.all_roles()}
    mapping["artifact"] = "Is the [X] an artifact?"
    with pytest.warns(YesNoQuestionWarning):
        bank = load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_ZERO,
                                  tiny_ontology)
    assert bank.templates["artifact"] == "Is the [X] an artifact?"


def test_instantiate_bank_question_examples(tmp_path, tiny_ontology):
    mapping = {role: f"What {role} is related to the event [X]?"
               for role in tiny_ontology.all_roles()}
    mapping["origin"] = "What artifact or object is related to the event [X]?"
    bank = load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_FEW,
                              tiny_ontology)
    q2 = instantiate_bank_question(bank, "importing", "artifact")
    assert q2.text == "What artifact is related to the event importing?"
    q3 = instantiate_bank_question(bank, "importing", "origin")
    assert q3.text == "What artifact or object is related to the event importing?"
    assert q3.strategy is QuestionStrategy.PROMPT_FEW


def test_instantiate_without_placeholder(tmp_path, tiny_ontology):
    mapping = {role: "Who is involved here?" for role in tiny_ontology.all_roles()}
    bank = load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_ZERO,
                              tiny_ontology)
    q = instantiate_bank_question(bank, "importing", "artifact")
    assert q.text == "Who is involved here?"


def test_instantiate_unknown_role(tmp_path, tiny_ontology):
    mapping = {role: "What of [X]?" for role in tiny_ontology.all_roles()}
    bank = load_question_bank(_bank_file(tmp_path, mapping), QuestionStrategy.PROMPT_ZERO,
                              tiny_ontology)
    with pytest.raises(DataError):
        instantiate_bank_question(bank, "importing", "mystery")


# ---------------------------------------------------------------------------
# contextualized QG prompts


def test_contextual_prompt_contents(importing_doc):
    doc, events = importing_doc
    prompt = emit_contextualized_qg_prompt(doc, events[0], "artifact")
    assert doc.text() in prompt
    assert '"artifact"' in prompt
    assert '"importing"' in prompt
    assert "five" in prompt.lower()


def test_contextual_prompt_never_marks_gold_span(importing_doc):
    doc, events = importing_doc
    for role in ("artifact", "origin"):
        prompt = emit_contextualized_qg_prompt(doc, events[0], role)
        # the document appears verbatim, with no answer highlighting added
        assert doc.text() in prompt
        for marker in ("<arg>", "[ANS]", "**"):
            assert marker not in prompt


def test_contextual_prompt_deterministic(importing_doc):
    doc, events = importing_doc
    a = emit_contextualized_qg_prompt(doc, events[0], "artifact")
    b = emit_contextualized_qg_prompt(doc, events[0], "artifact")
    assert a == b


# ---------------------------------------------------------------------------
# contextualized question ingestion


def _questions_file(tmp_path, records, header=None):
    path = tmp_path / "questions.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        if header is not None:
            handle.write(json.dumps(header) + "\n")
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return str(path)


def test_load_contextualized_questions(tmp_path, importing_doc):
    corpus = Corpus([importing_doc])
    texts = [
        "What did Russia destroy 500 trucks with?",
        "What was imported through the border?",
        "What product moved across the border?",
        "What goods funded the smuggling?",
        "What is being imported from ISIS-held territory in Syria and Iraq?",
    ]
    path = _questions_file(
        tmp_path,
        [{"doc_id": "rams-importing-1", "event_index": 0, "role": "artifact", "questions": texts}],
    )
    loaded = load_contextualized_questions(path, corpus)
    questions = loaded[("rams-importing-1", 0, "artifact")]
    assert len(questions) == 5
    assert questions[-1].text == "What is being imported from ISIS-held territory in Syria and Iraq?"
    assert all(q.strategy is QuestionStrategy.WEAK_LLM_QG for q in questions)
    assert all(q.doc_id == "rams-importing-1" for q in questions)


def test_load_contextualized_questions_header_strategy(tmp_path, importing_doc):
    corpus = Corpus([importing_doc])
    path = _questions_file(
        tmp_path,
        [{"doc_id": "rams-importing-1", "event_index": 0, "role": "artifact",
          "questions": ["What was imported?"]}],
        header={"strategy": "squad_qg"},
    )
    loaded = load_contextualized_questions(path, corpus)
    assert loaded[("rams-importing-1", 0, "artifact")][0].strategy is QuestionStrategy.SQUAD_QG


def test_load_contextualized_questions_empty_list(tmp_path, importing_doc):
    path = _questions_file(
        tmp_path,
        [{"doc_id": "rams-importing-1", "event_index": 0, "role": "artifact", "questions": []}],
    )
    with pytest.raises(DataError):
        load_contextualized_questions(path, Corpus([importing_doc]))


def test_load_contextualized_questions_unknown_doc(tmp_path, importing_doc):
    path = _questions_file(
        tmp_path,
        [{"doc_id": "ghost", "event_index": 0, "role": "artifact", "questions": ["Q?"]}],
    )
    with pytest.raises(DataError) as err:
        load_contextualized_questions(path, Corpus([importing_doc]))
    assert "ghost" in str(err.value)


# ---------------------------------------------------------------------------
# QG training set


def test_build_qg_training_set_five_per_question(tmp_path, importing_doc):
    corpus = Corpus([importing_doc])
    questions = {
        ("rams-importing-1", 0, "artifact"): [
            Question(text=f"Q{i}?", strategy=QuestionStrategy.WEAK_LLM_QG, role="artifact",
                     doc_id="rams-importing-1", trigger_text="importing")
            for i in range(5)
        ]
    }
    examples = build_qg_training_set(corpus, questions)
    assert len(examples) == 5
    assert len({(ex.document_text, ex.trigger_text, ex.role) for ex in examples}) == 1
    out = tmp_path / "qg.jsonl"
    write_qg_training_set(examples, str(out))
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records[0]["target"] == "Q0?"
    # answer spans never leak into the generator input
    for record in records:
        assert set(record["input"]) == {"document", "trigger", "role"}
        assert "start" not in json.dumps(record["input"])


def test_build_qg_training_set_empty():
    assert build_qg_training_set(Corpus([]), {}) == []


def test_qg_training_set_scale_500_docs(tmp_path):
    """500 prompted samples with ~3.6 roles each and 5 questions per role
    land near the expected 9,000 examples."""
    entries = []
    questions = {}
    rng_roles = ["artifact", "origin", "destination", "giver", "recipient"]
    expected = 0
    for d in range(500):
        doc = make_doc([[f"w{d}", "acted", "here", "."]], doc_id=f"doc{d}")
        entries.append((doc, [make_event("t", (1, 1), [])]))
        n_roles = 3 + (d % 2)  # alternates 3/4 → 3.5 roles per doc on average
        for role in rng_roles[:n_roles]:
            questions[(f"doc{d}", 0, role)] = [
                Question(text=f"Q {d} {role} {i}?", strategy=QuestionStrategy.WEAK_LLM_QG,
                         role=role, doc_id=f"doc{d}", trigger_text="acted")
                for i in range(5)
            ]
            expected += 5
    corpus = Corpus(entries)
    examples = build_qg_training_set(corpus, questions)
    assert len(examples) == expected
    assert 8000 <= len(examples) <= 10000


# ---------------------------------------------------------------------------
# SQuAD exporter


def test_export_squad_triples(tmp_path):
    squad = {
        "data": [
            {
                "paragraphs": [
                    {
                        "context": "Oil moved across the border at night.",
                        "qas": [
                            {"question": "What moved across the border?",
                             "answers": [{"text": "Oil", "answer_start": 0}],
                             "is_impossible": False},
                            {"question": "Who watched?", "answers": [], "is_impossible": True},
                        ],
                    }
                ]
            }
        ]
    }
    path = tmp_path / "squad.json"
    path.write_text(json.dumps(squad))
    triples = list(export_squad_qg_triples(str(path)))
    assert triples == [
        {
            "context": "Oil moved across the border at night.",
            "answer": "Oil",
            "question": "What moved across the border?",
        }
    ]
