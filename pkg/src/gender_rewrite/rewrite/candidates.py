from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

CORPUSR = "corpusr"
MORPHR = "morphr"
NEURALR = "neuralr"
PASS = "pass"


@dataclass(frozen=True)
class Candidate:
    surface: str
    score: float
    provenance: str


@dataclass(frozen=True)
class CandidateSet:
    """Word alternatives ordered by score (descending), then surface."""

    candidates: tuple[Candidate, ...]
    pass_through: bool = False

    @classmethod
    def build(cls, items: Iterable[Candidate]) -> "CandidateSet":
        items = sorted(items, key=lambda c: (-c.score, c.surface))
        if not items:
            raise ValueError("a productive candidate set needs at least one candidate")
        return cls(tuple(items), False)

    @classmethod
    def passthrough(cls, word: str, provenance: str = PASS) -> "CandidateSet":
        return cls((Candidate(word, 0.0, provenance),), True)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)

    @property
    def surfaces(self) -> list[str]:
        return [c.surface for c in self.candidates]

    def top(self, k: int) -> "CandidateSet":
        return CandidateSet(self.candidates[:k], self.pass_through)

    def productive_for(self, word: str) -> bool:
        """False when the set offers nothing other than ``word`` itself."""
        return not self.pass_through and any(c.surface != word for c in self.candidates)

    def to_dict(self) -> dict:
        return {
            "pass_through": self.pass_through,
            "candidates": [[c.surface, c.score, c.provenance] for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateSet":
        return cls(tuple(Candidate(s, float(sc), p) for s, sc, p in data["candidates"]), data["pass_through"])
