"""End-to-end rewriting: identify labels, rewrite words out of context, select in context."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import START
from .gid import LabelPredictor
from .labels import SentenceTarget, WordLabel, needs_rewrite, parse_word_label, required_word_target
from .rewrite import CandidateSet, CorpusRewriter, MorphRuleTable, NeuralRewriter, cascade_rewrite
from .selection import SentenceCandidate, SentenceScorer, choose, expand_candidates, score_candidates


@dataclass
class RewriteTrace:
    source: list[str]
    target: str
    labels: list[str]
    required: dict[int, str] = field(default_factory=dict)
    candidates: dict[int, CandidateSet] = field(default_factory=dict)
    sentences: list[SentenceCandidate] = field(default_factory=list)
    output: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "labels": self.labels,
            "required": {str(k): v for k, v in sorted(self.required.items())},
            "candidates": {str(k): v.to_dict() for k, v in sorted(self.candidates.items())},
            "sentences": [s.to_dict() for s in self.sentences],
            "output": self.output,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RewriteTrace":
        return cls(
            source=list(d["source"]),
            target=d["target"],
            labels=list(d["labels"]),
            required={int(k): v for k, v in d["required"].items()},
            candidates={int(k): CandidateSet.from_dict(v) for k, v in d["candidates"].items()},
            sentences=[SentenceCandidate.from_dict(s) for s in d["sentences"]],
            output=list(d["output"]),
        )


def replay(trace: RewriteTrace) -> list[str]:
    """Recompute the output from a trace alone."""
    if not trace.sentences:
        return list(trace.source)
    return list(choose(trace.sentences).tokens)


class GenderRewriter:
    """The full multi-step system.

    Rewriters may be switched off by passing None; at least one is required
    whenever some word needs rewriting.
    """

    def __init__(self, gid: LabelPredictor, scorer: SentenceScorer,
                 corpusr: Optional[CorpusRewriter] = None,
                 morphr: Optional[MorphRuleTable] = None,
                 neuralr: Optional[NeuralRewriter] = None,
                 cap: int = 512, per_word_k: int = 3):
        self.gid = gid
        self.scorer = scorer
        self.corpusr = corpusr
        self.morphr = morphr
        self.neuralr = neuralr
        self.cap = cap
        self.per_word_k = per_word_k

    def word_candidates(self, words: Sequence[str], labels: Sequence[WordLabel],
                        target: SentenceTarget) -> tuple[dict[int, WordLabel], dict[int, CandidateSet]]:
        required, cands = {}, {}
        for i, (word, label) in enumerate(zip(words, labels)):
            if not needs_rewrite(label, target):
                continue
            g = required_word_target(label, target)
            prev = words[i - 1] if i > 0 else START
            required[i] = g
            cands[i] = cascade_rewrite(word, prev, label, g, self.corpusr, self.morphr, self.neuralr)
        return required, cands

    def rewrite(self, words: Sequence[str], target: SentenceTarget,
                labels: Optional[Sequence[WordLabel]] = None) -> tuple[list[str], RewriteTrace]:
        words = list(words)
        if labels is None:
            labels = self.gid.predict(words)
        trace = RewriteTrace(words, str(target), [str(l) for l in labels])
        required, cands = self.word_candidates(words, labels, target)
        trace.required = {i: str(g) for i, g in required.items()}
        trace.candidates = cands
        if not cands:
            trace.output = list(words)
            return trace.output, trace
        sentences = expand_candidates(words, cands, self.cap, self.per_word_k)
        trace.sentences = score_candidates(sentences, self.scorer)
        trace.output = list(choose(trace.sentences).tokens)
        return trace.output, trace

    def __call__(self, words: Sequence[str], target: SentenceTarget) -> list[str]:
        return self.rewrite(words, target)[0]


def trace_labels(trace: RewriteTrace) -> list[WordLabel]:
    return [parse_word_label(l) for l in trace.labels]
