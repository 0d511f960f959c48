import itertools
import math
import random

import pytest

from gender_rewrite.rewrite import Candidate, CandidateSet
from gender_rewrite.selection import (
    EmptyCandidateList,
    NgramScorer,
    SentenceCandidate,
    choose,
    expand_candidates,
    load_scorer,
    pll_score,
    select_best,
    train_lm,
)


def _cs(*items):
    return CandidateSet.build([Candidate(s, sc, "corpusr") for s, sc in items])


def test_expand_two_by_two():
    out = expand_candidates(["a", "b", "c"], {0: _cs(("x", 0.6), ("y", 0.4)), 2: _cs(("z", 0.7), ("w", 0.3))})
    assert len(out) == 4
    assert out[0].tokens == ("x", "b", "z")
    assert {c.tokens for c in out} == {("x", "b", "z"), ("x", "b", "w"), ("y", "b", "z"), ("y", "b", "w")}


def test_expand_nothing():
    assert expand_candidates(["a", "b"], {}) == [SentenceCandidate(("a", "b"))]


def test_expand_cap_matches_brute_force():
    rng = random.Random(0)
    sentence = [f"w{i}" for i in range(10)]
    per_word = {i: _cs(*[(f"w{i}_{j}", rng.choice([0.1, 0.2, 0.5, 0.9])) for j in range(3)]) for i in range(10)}
    got = expand_candidates(sentence, per_word, cap=512)
    assert len(got) == 512
    options = [per_word[i].candidates for i in range(10)]
    every = []
    for idx in itertools.product(range(3), repeat=10):
        every.append((-sum(options[k][i].score for k, i in enumerate(idx)), idx))
    every.sort()
    want = [tuple(options[k][i].surface for k, i in enumerate(idx)) for _, idx in every[:512]]
    assert [c.tokens for c in got] == want


def test_expand_changed_positions():
    out = expand_candidates(["a", "b"], {0: _cs(("a", 0.9), ("x", 0.1))})
    assert out[0].changed_positions == frozenset()
    assert out[1].changed_positions == {0}


def test_expand_validates():
    with pytest.raises(ValueError):
        expand_candidates(["a"], {}, cap=0)


def test_lm_hand_probability():
    lm = train_lm([["a", "b"]], n=2, k=1.0, vocabulary={"a", "b"})
    assert lm.prob("b", ["a"]) == 0.5
    assert pll_score(lm, ["a", "b"]) == pytest.approx(math.log(lm.prob("a", [])) + math.log(0.5))
    # P(a | <s>) = (1 + 1) / (1 + 3)
    assert lm.prob("a", []) == 0.5


def test_lm_empty_is_uniform():
    lm = NgramScorer(3, 0.5, {"a", "b", "c"})
    for w in ["a", "b", "zzz"]:
        assert lm.prob(w, ["a"]) == pytest.approx(1 / 4)


def test_single_token_sentence():
    lm = train_lm([["a", "b"], ["b"]], n=3, k=0.1)
    assert pll_score(lm, ["b"]) == math.log(lm.prob("b", []))


def test_lm_save_load(tmp_path):
    lm = train_lm([["a", "b", "c"], ["a", "c"]], n=3, k=0.1)
    lm.save(tmp_path / "lm.json")
    again = load_scorer(tmp_path / "lm.json")
    for s in (["a", "b"], ["c", "x", "a"]):
        assert again.score(s) == lm.score(s)
    with pytest.raises(ValueError):
        load_scorer(tmp_path / "lm.json", "bert")


def test_unseen_word_loses():
    lm = train_lm([["أنا", "سعيد", "هنا"], ["أنا", "سعيدة", "جدا"]], n=3, k=0.1)
    good = SentenceCandidate(("أنا", "سعيد", "هنا"))
    bad = SentenceCandidate(("أنا", "سعيدو", "هنا"))
    assert select_best([bad, good], lm).tokens == good.tokens


def test_tie_prefers_fewer_changes():
    a = SentenceCandidate(("x", "y"), frozenset(), 0.0, -2.0)
    b = SentenceCandidate(("x", "z"), frozenset({1}), 0.0, -2.0)
    assert choose([b, a]) is a


def test_tie_then_normalized_text():
    a = SentenceCandidate(("ب",), frozenset({0}), 0.0, -1.0)
    b = SentenceCandidate(("أ",), frozenset({0}), 0.0, -1.0)
    assert choose([a, b]) is b


def test_singleton_and_empty():
    only = SentenceCandidate(("a",))
    lm = train_lm([["a"]])
    assert select_best([only], lm).tokens == ("a",)
    with pytest.raises(EmptyCandidateList):
        select_best([], lm)


def test_candidate_dict_roundtrip():
    c = SentenceCandidate(("a", "b"), frozenset({1}), 0.5, -3.25)
    assert SentenceCandidate.from_dict(c.to_dict()) == c


def test_probabilities_sum_to_one():
    lm = train_lm([["a", "b", "c"], ["b", "a"], ["c", "c", "a"]], n=3, k=0.1)
    rng = random.Random(1)
    for _ in range(20):
        history = [rng.choice(["a", "b", "c", "<s>", "zz"]) for _ in range(2)]
        total = sum(lm.prob(w, history) for w in sorted(lm.vocabulary) + ["<unk>"])
        assert total == pytest.approx(1.0, abs=1e-9)


def test_order_matters():
    lm = train_lm([["a", "b"]], n=2, k=1.0, vocabulary={"a", "b"})
    assert pll_score(lm, ["a", "b"]) != pll_score(lm, ["b", "a"])
    assert pll_score(lm, []) == 0


def test_selection_ignores_list_order():
    lm = train_lm([["أنا", "سعيد", "هنا"], ["أنا", "سعيدة", "هنا"], ["أنا", "سعيدة", "جدا"]])
    cands = expand_candidates(["أنا", "سعيد", "هنا"], {1: _cs(("سعيد", 0.5), ("سعيدة", 0.5), ("سعيدو", 0.1))})
    best = select_best(cands, lm)
    rng = random.Random(0)
    for _ in range(5):
        rng.shuffle(cands)
        assert select_best(cands, lm) == best
