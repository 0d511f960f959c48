"""Corpus-based rewriter: bigram maximum likelihood lookup with unigram backoff.

Raw counts are stored and normalized at query time, so probabilities are
exact count ratios and models trained on separate shards can be merged.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from ..corpus import RewritePair
from ..labels import WordLabel, parse_word_label
from .candidates import CORPUSR, Candidate, CandidateSet

FORMAT_VERSION = 1


class CorpusRewriter:
    def __init__(self):
        self.bigram: dict[tuple[str, str, WordLabel], Counter] = defaultdict(Counter)
        self.unigram: dict[tuple[str, WordLabel], Counter] = defaultdict(Counter)
        self.vocabulary: set[str] = set()

    def add(self, pair: RewritePair, count: int = 1) -> None:
        self.bigram[pair.source, pair.prev, pair.target_label][pair.target_surface] += count
        self.unigram[pair.source, pair.target_label][pair.target_surface] += count
        self.vocabulary.add(pair.source)

    def merge(self, other: "CorpusRewriter") -> "CorpusRewriter":
        for key, ys in other.bigram.items():
            self.bigram[key].update(ys)
        for key, ys in other.unigram.items():
            self.unigram[key].update(ys)
        self.vocabulary |= other.vocabulary
        return self

    def __len__(self):
        return sum(sum(c.values()) for c in self.bigram.values())

    def _counts(self, word: str, prev: str, g: WordLabel) -> tuple[Optional[Counter], str]:
        ys = self.bigram.get((word, prev, g))
        if ys:
            return ys, "bigram"
        ys = self.unigram.get((word, g))
        if ys:
            return ys, "unigram"
        return None, "none"

    def distribution(self, word: str, prev: str, g: WordLabel) -> dict[str, Fraction]:
        """Exact P(y | word, prev, g) at the first observed backoff level."""
        ys, _ = self._counts(word, prev, g)
        if ys is None:
            return {}
        total = sum(ys.values())
        return {y: Fraction(c, total) for y, c in ys.items()}

    def backoff_level(self, word: str, prev: str, g: WordLabel) -> str:
        return self._counts(word, prev, g)[1]

    def candidates(self, word: str, prev: str, g: WordLabel) -> CandidateSet:
        ys, _ = self._counts(word, prev, g)
        if ys is None:
            return CandidateSet.passthrough(word, CORPUSR)
        total = sum(ys.values())
        return CandidateSet.build(Candidate(y, c / total, CORPUSR) for y, c in ys.items())

    # serialization
    def to_dict(self) -> dict:
        rows = []
        for (w, prev, g), ys in sorted(self.bigram.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))):
            for y, c in sorted(ys.items()):
                rows.append([w, prev, str(g), y, c])
        return {"format": "corpusr", "version": FORMAT_VERSION, "counts": rows}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusRewriter":
        if data.get("format") != "corpusr" or data.get("version") != FORMAT_VERSION:
            raise ValueError("not a CorpusR model file (or unsupported version)")
        model = cls()
        for w, prev, g, y, c in data["counts"]:
            model.add(RewritePair(w, prev, y, parse_word_label(g)), c)
        return model

    @classmethod
    def load(cls, path) -> "CorpusRewriter":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_corpusr(pairs: Iterable[RewritePair]) -> CorpusRewriter:
    model = CorpusRewriter()
    for pair in pairs:
        model.add(pair)
    return model


def corpusr_candidates(model: CorpusRewriter, word: str, prev: str, g: WordLabel) -> CandidateSet:
    return model.candidates(word, prev, g)
