import math

import pytest
from hypothesis import given, strategies as st

from gender_rewrite.evaluation import (
    GID,
    REWRITE,
    SELECT,
    Edit,
    LengthMismatch,
    NormalizationTable,
    attribute_errors,
    bleu_corpus,
    extract_edits,
    f_beta,
    m2_score,
    normalize_text,
)


def test_normalize_examples():
    assert normalize_text("أحمد إلى آخر") == "احمد الي اخر"
    assert normalize_text("مدرسة") == "مدرسه"
    assert normalize_text("كتب") == "كتب"


@given(st.text(alphabet=st.characters(min_codepoint=0x0600, max_codepoint=0x06FF)))
def test_normalize_idempotent(s):
    assert normalize_text(normalize_text(s)) == normalize_text(s)


def test_table_rejects_chains():
    with pytest.raises(ValueError):
        NormalizationTable({"a": "b", "b": "c"})


def test_edits_examples():
    assert extract_edits("a b".split(), "a b".split()) == []
    assert extract_edits("a b c".split(), "a X c".split()) == [Edit(1, 2, ("X",))]
    assert extract_edits("a b".split(), "a x y".split()) == [Edit(1, 2, ("x", "y"))]
    assert extract_edits("a b c".split(), "a c".split()) == [Edit(1, 2, ())]


def test_f_beta_paper_rows():
    assert f_beta(0.8822, 0.7122) == pytest.approx(0.8420, abs=5e-4)
    assert f_beta(0.8886, 0.8669) == pytest.approx(0.8842, abs=5e-4)
    for p in (0.0, 0.3, 1.0):
        assert f_beta(p, 0.0) == 0.0
    with pytest.raises(ValueError):
        f_beta(1.2, 0.5)


def test_m2_do_nothing():
    src = [["أنا", "سعيد"]]
    ref = [[["أنا", "سعيدة"]]]
    r = m2_score(src, src, ref)
    assert (r.precision, r.recall, r.f_beta) == (1.0, 0.0, 0.0)


def test_m2_perfect():
    src = [["أنا", "سعيد"], ["هنا"]]
    refs = [["أنا", "سعيدة"], ["هنا"]]
    r = m2_score(src, refs, [[x] for x in refs])
    assert (r.precision, r.recall, r.f_beta) == (1.0, 1.0, 1.0)


def test_m2_half():
    src = [["a", "b", "c", "d"]]
    ref = [[["a", "B", "c", "D"]]]
    r = m2_score(src, [["a", "B", "C", "d"]], ref)
    assert (r.precision, r.recall, r.f_beta) == (0.5, 0.5, 0.5)


def test_m2_reference_choice():
    src = [["a", "b"]]
    refs = [[["x", "b"], ["a", "y"]]]
    assert m2_score(src, [["a", "y"]], refs).matched == 1
    # no match possible: the reference with more gold edits is used
    r = m2_score(src, [["q", "b"]], [[["x", "b"], ["x", "y"]]])
    assert (r.matched, r.gold_count) == (0, 2)


def test_m2_normalization_toggle():
    src = [["احمد"]]
    hyp = [["أحمد"]]
    assert m2_score(src, hyp, [[["احمد"]]], normalize=True).system_count == 0
    assert m2_score(src, hyp, [[["احمد"]]], normalize=False).system_count == 1


def test_m2_length_mismatch():
    with pytest.raises(LengthMismatch):
        m2_score([["a"]], [], [[["a"]]])


def test_bleu_identity():
    h = [["a", "b", "c", "d", "e"], ["x", "y"]]
    assert bleu_corpus(h, h) == 100.0


def test_bleu_hand_fixture():
    # 1-4 gram precisions 5/6, 3/5, 2/4, 1/3; hyp 6 words vs ref 7
    hyp, ref = "a b c d e f".split(), "a b c d x f g".split()
    want = 100 * math.exp(1 - 7 / 6) * (5 / 6 * 3 / 5 * 2 / 4 * 1 / 3) ** 0.25
    assert bleu_corpus([hyp], [ref]) == pytest.approx(want, abs=1e-9)
    assert round(bleu_corpus([hyp], [ref]), 4) == 45.4802


def test_bleu_brevity():
    long = "a b c d e".split()
    assert bleu_corpus([long[:4]], [long]) < 100.0


def test_bleu_smoothing():
    # no 3- or 4-gram matches: those orders use 1/(total+1)
    hyp, ref = "a b x d".split(), "a b c d".split()
    want = 100 * (3 / 4 * 1 / 3 * 1 / 3 * 1 / 2) ** 0.25
    assert bleu_corpus([hyp], [ref]) == pytest.approx(want)


def test_bleu_no_unigram_match():
    assert bleu_corpus([["x"]], [["y"]]) == 0.0


def test_attribution():
    src = ["أنا", "سعيد", "و", "أعرفكم"]
    gold = ["أنا", "سعيدة", "و", "أعرفكن"]
    gl = ["B+B", "1F+B", "B+B", "B+2F"]
    # position 1 mislabeled; position 3 labeled right but gold never proposed
    counts = attribute_errors(src, gl, ["B+B", "B+B", "B+B", "B+2F"], {3: ["أعرفكم"]}, src, gold)
    assert counts == {GID: 1, REWRITE: 1, SELECT: 0}
    counts = attribute_errors(src, gl, gl, {1: ["سعيدة"], 3: ["أعرفكن", "أعرفكم"]}, src, gold)
    assert counts == {GID: 0, REWRITE: 0, SELECT: 2}
