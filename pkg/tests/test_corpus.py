from __future__ import annotations

import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from facetrec.corpus import (
    AuthorRecord,
    LabeledCorpus,
    LabeledDocument,
    NormalizationTable,
    NormRule,
    assign_labels,
    build_documents,
    default_normalization_table,
    load_corpus,
    load_normalization_table,
    normalize,
    tokenize,
)
from facetrec.errors import ConfigError, ValidationError
from facetrec.inventory import FACET_NAMES, FacetScores, InventoryResponse


def rec(aid, posts):
    return AuthorRecord(
        author_id=aid, posts=tuple(posts), inventory=InventoryResponse(items=(3,) * 44)
    )


def fs(default=3.0, **per):
    return FacetScores(domains={}, facets={f: float(per.get(f, default)) for f in FACET_NAMES})


def table(*pairs):
    return NormalizationTable(rules=tuple(NormRule(pattern=p, token=t) for p, t in pairs))


# --- normalization ---------------------------------------------------------


def test_default_table_collapses_laughter():
    t = default_normalization_table()
    assert normalize("hahaha que bom", t) == "$LAUGH$ que bom"
    for lit in ["haha", "hahaha", "hahah", "hehe", "kkkk", "kkkkk", "rsrs", "rsrsrs", "jajaja"]:
        assert normalize(lit, t) == "$LAUGH$", lit


def test_normalize_is_case_insensitive():
    t = default_normalization_table()
    assert normalize("HAHAHA", t) == "$LAUGH$"
    assert normalize("KkKk", t) == "$LAUGH$"


def test_normalize_respects_word_boundaries():
    t = default_normalization_table()
    assert normalize("bahaha", t) == "bahaha"
    assert normalize("khaki", t) == "khaki"


def test_normalize_prefers_longest_match_at_same_start():
    t = table((r"ha", "$A$"), (r"haha", "$B$"))
    assert normalize("haha", t) == "$B$"


def test_normalize_breaks_ties_by_rule_order():
    t = table((r"ha", "$A$"), (r"ha", "$B$"))
    assert normalize("ha", t) == "$A$"


def test_normalize_prefers_leftmost_match():
    t = table((r"bb", "$B$"), (r"aa", "$A$"))
    assert normalize("aa bb", t) == "$A$ $B$"


def test_normalize_is_single_pass():
    # The replacement text is never rescanned, even when another rule
    # would match inside it.
    t = table((r"aha", "$HA$"), (r"HA", "$X$"))
    assert normalize("aha", t) == "$HA$"
    # Scanning resumes after the replaced span, not at the string start.
    t = table((r"aha", "$HA$"))
    assert normalize("ahaha", t) == "$HA$ha"


def test_normalize_empty_and_no_match():
    t = default_normalization_table()
    assert normalize("", t) == ""
    assert normalize("nothing to do", t) == "nothing to do"


def test_norm_rule_rejects_bad_pattern_and_token():
    with pytest.raises(ConfigError, match="pattern"):
        NormRule(pattern="(unclosed", token="$X$")
    with pytest.raises(ConfigError, match="survive"):
        NormRule(pattern="ok", token="two words")
    with pytest.raises(ConfigError, match="survive"):
        NormRule(pattern="ok", token="$lower$")


# --- tokenization ----------------------------------------------------------


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("Hello, world!") == ["hello", "world"]
    assert tokenize("don't stop") == ["don", "t", "stop"]
    assert tokenize("a1 b_2") == ["a1", "b_2"]
    assert tokenize("") == []


def test_tokenize_preserves_placeholders():
    assert tokenize("$LAUGH$ ok") == ["$LAUGH$", "ok"]
    assert tokenize("so $LAUGH$!") == ["so", "$LAUGH$"]
    # Lowercase dollar-words are not placeholders.
    assert tokenize("$laugh$") == ["laugh"]


# --- documents -------------------------------------------------------------


def test_build_documents_joins_posts_with_single_space():
    t = default_normalization_table()
    docs = build_documents([rec("u1", ["kk", "kk"]), rec("u2", ["kkkk"])], t)
    assert docs[0] == ("u1", ("kk", "kk"))
    assert docs[1] == ("u2", ("$LAUGH$",))


def test_build_documents_excludes_zero_token_authors(caplog):
    t = default_normalization_table()
    with caplog.at_level(logging.WARNING):
        docs = build_documents([rec("u1", ["!!!"]), rec("u2", ["fine"])], t)
    assert [aid for aid, _ in docs] == ["u2"]
    assert any("u1" in m for m in caplog.messages)


def test_labeled_document_validation():
    labels = {f: 0 for f in FACET_NAMES}
    with pytest.raises(ValidationError, match="no tokens"):
        LabeledDocument(author_id="a", tokens=(), labels=labels)
    with pytest.raises(ValidationError, match="10 facets"):
        LabeledDocument(author_id="a", tokens=("x",), labels={"Anxiety": 1})


# --- labeling --------------------------------------------------------------


def test_assign_labels_strictly_above_mean():
    docs = [("a", ("x",)), ("b", ("x",)), ("c", ("x",))]
    scores = {"a": fs(3.0), "b": fs(4.0), "c": fs(5.0)}
    corpus = assign_labels(docs, scores)
    for facet in FACET_NAMES:
        assert corpus.labels(facet).tolist() == [0, 0, 1]
        assert corpus.label_thresholds[facet] == 4.0
    assert corpus.degenerate == ()


def test_assign_labels_tie_at_mean_is_negative():
    docs = [("a", ("x",)), ("b", ("x",)), ("c", ("x",))]
    corpus = assign_labels(docs, {"a": fs(1.0), "b": fs(2.0), "c": fs(3.0)})
    assert corpus.labels("Anxiety").tolist() == [0, 0, 1]


def test_assign_labels_two_points():
    docs = [("a", ("x",)), ("b", ("x",))]
    corpus = assign_labels(docs, {"a": fs(1.0), "b": fs(5.0)})
    for facet in FACET_NAMES:
        assert corpus.labels(facet).tolist() == [0, 1]


def test_assign_labels_identical_scores_degenerate(caplog):
    docs = [("a", ("x",)), ("b", ("x",))]
    with caplog.at_level(logging.WARNING):
        corpus = assign_labels(docs, {"a": fs(3.0), "b": fs(3.0)})
    assert corpus.degenerate == FACET_NAMES
    assert corpus.active_facets == ()
    for facet in FACET_NAMES:
        assert corpus.labels(facet).tolist() == [0, 0]
    assert any("single-class" in m for m in caplog.messages)


def test_assign_labels_per_facet_independence():
    docs = [("a", ("x",)), ("b", ("x",)), ("c", ("x",))]
    scores = {
        "a": fs(3.0, Anxiety=5.0),
        "b": fs(4.0, Anxiety=1.0),
        "c": fs(5.0, Anxiety=1.0),
    }
    corpus = assign_labels(docs, scores)
    assert corpus.labels("Anxiety").tolist() == [1, 0, 0]
    assert corpus.labels("Order").tolist() == [0, 0, 1]


def test_assign_labels_missing_scores_is_an_error():
    docs = [("a", ("x",)), ("b", ("x",))]
    with pytest.raises(ValidationError, match="missing facet scores.*b"):
        assign_labels(docs, {"a": fs(3.0)})
    with pytest.raises(ValidationError, match="no documents"):
        assign_labels([], {})


@given(
    st.lists(st.integers(0, 10), min_size=2, max_size=8),
    st.integers(1, 5),
    st.integers(-20, 20),
)
def test_assign_labels_invariant_under_positive_affine_maps(vals, m, t):
    docs = [(f"a{i}", ("x",)) for i in range(len(vals))]
    raw = {f"a{i}": fs(v) for i, v in enumerate(vals)}
    mapped = {f"a{i}": fs(m * v + t) for i, v in enumerate(vals)}
    la = assign_labels(docs, raw)
    lb = assign_labels(docs, mapped)
    for facet in FACET_NAMES:
        assert la.labels(facet).tolist() == lb.labels(facet).tolist()


def test_labels_rejects_unknown_facet():
    corpus = assign_labels([("a", ("x",)), ("b", ("x",))], {"a": fs(1.0), "b": fs(2.0)})
    with pytest.raises(ValidationError, match="unknown facet"):
        corpus.labels("Wit")


def test_active_facets_keeps_canonical_order():
    corpus = LabeledCorpus(
        documents=(
            LabeledDocument(author_id="a", tokens=("x",), labels={f: 0 for f in FACET_NAMES}),
        ),
        label_thresholds={f: 0.0 for f in FACET_NAMES},
        degenerate=("Activity", "Ideas"),
    )
    assert corpus.active_facets == tuple(
        f for f in FACET_NAMES if f not in ("Activity", "Ideas")
    )


# --- corpus file loading ---------------------------------------------------


def _write(tmp_path, lines):
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _line(aid="u1", posts=("hi",), items=None):
    import json

    return json.dumps(
        {"author_id": aid, "posts": list(posts), "bfi44": list(items or [3] * 44)}
    )


def test_load_corpus_round_trip(tmp_path):
    path = _write(tmp_path, [_line("u1"), "", _line("u2", posts=("a", "b"))])
    records = load_corpus(path)
    assert [r.author_id for r in records] == ["u1", "u2"]
    assert records[1].posts == ("a", "b")
    assert records[0].inventory.items == (3,) * 44


def test_load_corpus_reports_line_numbers(tmp_path):
    path = _write(tmp_path, [_line("u1"), "{not json"])
    with pytest.raises(ValidationError, match=r":2: invalid JSON"):
        load_corpus(path)


def test_load_corpus_rejects_non_objects(tmp_path):
    path = _write(tmp_path, ["[1, 2]"])
    with pytest.raises(ValidationError, match=r":1: expected a JSON object"):
        load_corpus(path)


def test_load_corpus_rejects_missing_or_empty_author(tmp_path):
    path = _write(tmp_path, ['{"posts": [], "bfi44": []}'])
    with pytest.raises(ValidationError, match="author_id"):
        load_corpus(path)
    path = _write(tmp_path, [_line(aid="")])
    with pytest.raises(ValidationError, match="author_id"):
        load_corpus(path)


def test_load_corpus_rejects_duplicate_author(tmp_path):
    path = _write(tmp_path, [_line("u1"), _line("u1")])
    with pytest.raises(ValidationError, match=r":2: duplicate author_id"):
        load_corpus(path)


def test_load_corpus_rejects_bad_posts(tmp_path):
    path = _write(tmp_path, ['{"author_id": "u1", "posts": "hi", "bfi44": []}'])
    with pytest.raises(ValidationError, match="posts"):
        load_corpus(path)
    path = _write(tmp_path, ['{"author_id": "u1", "posts": [1], "bfi44": []}'])
    with pytest.raises(ValidationError, match="posts"):
        load_corpus(path)


def test_load_corpus_rejects_bad_inventory(tmp_path):
    path = _write(tmp_path, [_line(items=[3] * 43)])
    with pytest.raises(ValidationError, match="44"):
        load_corpus(path)
    path = _write(tmp_path, [_line(items=[3] * 43 + ["3"])])
    with pytest.raises(ValidationError, match=r":1: .*not an integer"):
        load_corpus(path)


def test_load_corpus_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_corpus(tmp_path / "absent.jsonl")


# --- normalization table loading -------------------------------------------


def test_load_normalization_table(tmp_path):
    path = tmp_path / "norm.yaml"
    path.write_text("rules:\n  - pattern: 'x+'\n    token: $X$\n", encoding="utf-8")
    t = load_normalization_table(path)
    assert normalize("xxx y", t) == "$X$ y"


def test_load_normalization_table_errors(tmp_path):
    path = tmp_path / "norm.yaml"
    path.write_text("nope: 1\n")
    with pytest.raises(ConfigError, match="rules"):
        load_normalization_table(path)
    path.write_text("rules:\n  - pattern: 'x'\n")
    with pytest.raises(ConfigError):
        load_normalization_table(path)
    path.write_text("rules:\n  - pattern: '('\n    token: $X$\n")
    with pytest.raises(ConfigError, match="pattern"):
        load_normalization_table(path)
