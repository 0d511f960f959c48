"""In-context ranking and selection of full-sentence candidates.

Per-word candidate sets are expanded into sentence candidates, each sentence is
scored with a fluency scorer, and the best one is kept. Any object with a
``score(tokens) -> float`` method (higher is better) can act as the scorer;
the reference backend is an add-k smoothed n-gram model.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .evaluation import normalize_text
from .rewrite.candidates import CandidateSet

FORMAT_VERSION = 1
PAD = "<s>"
UNK = "<unk>"
LOG_FLOOR = -1e9


class EmptyCandidateList(ValueError):
    pass


class SentenceScorer(Protocol):
    def score(self, tokens: Sequence[str]) -> float: ...


@dataclass(frozen=True)
class SentenceCandidate:
    tokens: tuple[str, ...]
    changed_positions: frozenset = frozenset()
    local_score: float = 0.0
    pll: Optional[float] = None

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens), "changed": sorted(self.changed_positions),
                "local_score": self.local_score, "pll": self.pll}

    @classmethod
    def from_dict(cls, d: dict) -> "SentenceCandidate":
        return cls(tuple(d["tokens"]), frozenset(d["changed"]), d["local_score"], d["pll"])


def expand_candidates(sentence: Sequence[str], per_word: Mapping[int, CandidateSet],
                      cap: int = 512, per_word_k: int = 3) -> list[SentenceCandidate]:
    """Best ``cap`` combinations of per-word candidates, by summed word score.

    Order is by descending local score, ties by candidate index tuple, which
    is what a full enumeration sorted on that key would give. The search is
    lazy, so large lattices are never materialized.
    """
    if cap < 1 or per_word_k < 1:
        raise ValueError("cap and per_word_k must be >= 1")
    sentence = tuple(sentence)
    positions = sorted(p for p, cs in per_word.items() if len(cs))
    if not positions:
        return [SentenceCandidate(sentence)]
    options = [per_word[p].candidates[:per_word_k] for p in positions]

    def total(idx):
        return sum(options[k][i].score for k, i in enumerate(idx))

    start = (0,) * len(options)
    heap = [(-total(start), start)]
    seen = {start}
    out = []
    while heap and len(out) < cap:
        neg, idx = heapq.heappop(heap)
        tokens = list(sentence)
        changed = set()
        for k, i in enumerate(idx):
            surface = options[k][i].surface
            tokens[positions[k]] = surface
            if surface != sentence[positions[k]]:
                changed.add(positions[k])
        out.append(SentenceCandidate(tuple(tokens), frozenset(changed), -neg))
        for k in range(len(idx)):
            if idx[k] + 1 < len(options[k]):
                nxt = idx[:k] + (idx[k] + 1,) + idx[k + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-total(nxt), nxt))
    return out


class NgramScorer:
    """Add-k smoothed n-gram model over a closed vocabulary plus UNK.

    P(w | h) = (c(h, w) + k) / (c(h) + k * (|V| + 1))
    """

    def __init__(self, n: int = 3, k: float = 0.1, vocabulary: Iterable[str] = ()):
        if n < 1:
            raise ValueError("n must be >= 1")
        if not k > 0:
            raise ValueError("k must be > 0")
        self.n = n
        self.k = k
        self.vocabulary = frozenset(vocabulary) - {PAD, UNK}
        self.ngrams: Counter = Counter()
        self.contexts: Counter = Counter()

    def _map(self, w: str) -> str:
        return w if w in self.vocabulary else UNK

    def _history(self, tokens: Sequence[str], i: int) -> tuple[str, ...]:
        padded = [PAD] * (self.n - 1) + [self._map(t) for t in tokens]
        return tuple(padded[i: i + self.n - 1])

    def add_sentence(self, tokens: Sequence[str]) -> None:
        for i, w in enumerate(tokens):
            h = self._history(tokens, i)
            self.ngrams[h + (self._map(w),)] += 1
            self.contexts[h] += 1

    def prob(self, word: str, history: Sequence[str]) -> float:
        h = ()
        if self.n > 1:
            mapped = [PAD] * (self.n - 1) + [t if t == PAD else self._map(t) for t in history]
            h = tuple(mapped[-(self.n - 1):])
        num = self.ngrams[h + (self._map(word),)] + self.k
        den = self.contexts[h] + self.k * (len(self.vocabulary) + 1)
        return num / den

    def logprob(self, word: str, history: Sequence[str]) -> float:
        p = self.prob(word, history)
        return math.log(p) if p > 0 else LOG_FLOOR

    def score(self, tokens: Sequence[str]) -> float:
        return pll_score(self, tokens)

    # serialization
    def to_dict(self) -> dict:
        return {
            "format": "ngram", "version": FORMAT_VERSION, "n": self.n, "k": self.k,
            "vocabulary": sorted(self.vocabulary),
            "ngrams": sorted([list(g), c] for g, c in self.ngrams.items()),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "NgramScorer":
        if d.get("format") != "ngram" or d.get("version") != FORMAT_VERSION:
            raise ValueError("not an n-gram scorer file (or unsupported version)")
        model = cls(d["n"], d["k"], d["vocabulary"])
        for g, c in d["ngrams"]:
            g = tuple(g)
            model.ngrams[g] += c
            model.contexts[g[:-1]] += c
        return model

    @classmethod
    def load(cls, path) -> "NgramScorer":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_lm(sentences: Iterable[Sequence[str]], n: int = 3, k: float = 0.1,
             vocabulary: Optional[Iterable[str]] = None) -> NgramScorer:
    """Estimate counts; the vocabulary defaults to every training word."""
    sentences = [list(s) for s in sentences]
    if vocabulary is None:
        vocabulary = {w for s in sentences for w in s}
    model = NgramScorer(n, k, vocabulary)
    for s in sentences:
        model.add_sentence(s)
    return model


def pll_score(scorer: NgramScorer, tokens: Sequence[str]) -> float:
    """Sum of per-token log-probabilities given the preceding n-1 tokens."""
    tokens = list(tokens)
    return sum(scorer.logprob(w, tokens[max(0, i - scorer.n + 1): i]) for i, w in enumerate(tokens))


SCORER_BACKENDS = {"ngram": NgramScorer.load}


def load_scorer(path, backend: str = "ngram") -> SentenceScorer:
    try:
        loader = SCORER_BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown scorer backend {backend!r}; known: {sorted(SCORER_BACKENDS)}") from None
    return loader(path)


def _rank_key(c: SentenceCandidate):
    text = " ".join(c.tokens)
    return (-c.pll, len(c.changed_positions), normalize_text(text), text)


def choose(candidates: Sequence[SentenceCandidate]) -> SentenceCandidate:
    """Pick among already-scored candidates: highest pll, fewest edits, then text order."""
    if not candidates:
        raise EmptyCandidateList("no candidates to select from")
    return min(candidates, key=_rank_key)


def score_candidates(candidates: Sequence[SentenceCandidate], scorer: SentenceScorer) -> list[SentenceCandidate]:
    return [replace(c, pll=scorer.score(c.tokens)) for c in candidates]


def select_best(candidates: Sequence[SentenceCandidate], scorer: SentenceScorer) -> SentenceCandidate:
    if not candidates:
        raise EmptyCandidateList("no candidates to select from")
    return choose(score_candidates(candidates, scorer))
