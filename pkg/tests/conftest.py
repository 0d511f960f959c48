import random

import pytest

from gender_rewrite.corpus import RewritePair, START
from gender_rewrite.labels import GenderSlot, WordLabel
from gender_rewrite.rewrite import NeuralConfig

from toycorpus import toy_corpus

# filled by test_acceptance, echoed in the terminal summary
ACCEPTANCE_RESULTS: list[str] = []

LETTERS = "بتثجحخدذرزسشصضطظعغفقلمنهو"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def small_neural_config(**kw) -> NeuralConfig:
    """Sized for memorization tests on one CPU core."""
    base = dict(embedding_size=32, hidden_size=96, layers=1, dropout=0.0, learning_rate=3e-3,
                epochs=40, batch_size=16, early_stopping=40, lr_patience=5)
    base.update(kw)
    return NeuralConfig(**base)


def synthetic_pairs(n: int, seed: int = 0) -> list[RewritePair]:
    """Unique (word, target label) -> word pairs following regular suffix and enclitic patterns."""
    rng = random.Random(seed)
    pairs, seen = [], set()
    kinds = [
        # (source suffix, target suffix, target label)
        ("", "ة", WordLabel(GenderSlot.F1, GenderSlot.B)),
        ("ة", "", WordLabel(GenderSlot.M1, GenderSlot.B)),
        ("كم", "كن", WordLabel(GenderSlot.B, GenderSlot.F2)),
        ("كن", "كم", WordLabel(GenderSlot.B, GenderSlot.M2)),
    ]
    while len(pairs) < n:
        stem = "".join(rng.choice(LETTERS) for _ in range(rng.randint(3, 5)))
        src_suf, tgt_suf, label = rng.choice(kinds)
        key = (stem + src_suf, label)
        if key in seen:
            continue
        seen.add(key)
        pairs.append(RewritePair(stem + src_suf, START, stem + tgt_suf, label))
    return pairs


@pytest.fixture(scope="session")
def corpus():
    return toy_corpus(50, seed=0)
