"""Backoff cascade: CorpusR >> MorphR >> NeuralR."""

from __future__ import annotations

from typing import Optional

from ..labels import WordLabel
from .candidates import PASS, CandidateSet
from .corpusr import CorpusRewriter
from .morphr import MorphRuleTable, morphr_candidates
from .neuralr import NeuralRewriter


class NoRewriterSupplied(ValueError):
    pass


def cascade_rewrite(word: str, prev: str, predicted: WordLabel, target: WordLabel,
                    corpusr: Optional[CorpusRewriter] = None,
                    morphr: Optional[MorphRuleTable] = None,
                    neuralr: Optional[NeuralRewriter] = None) -> CandidateSet:
    """Return the first productive candidate set, querying rewriters in fixed order.

    A rewriter is skipped when it passes the word through or only proposes the
    word itself. NeuralR, being last, is never skipped.
    """
    if corpusr is None and morphr is None and neuralr is None:
        raise NoRewriterSupplied("cascade_rewrite needs at least one rewriter")
    stages = []
    if corpusr is not None:
        stages.append(lambda: corpusr.candidates(word, prev, target))
    if morphr is not None:
        stages.append(lambda: morphr_candidates(morphr, word, predicted, target))
    if neuralr is not None:
        stages.append(lambda: neuralr.kbest(word, target))
    for stage in stages:
        result = stage()
        if result.productive_for(word):
            return result
    if neuralr is not None:
        # last resort; NeuralR always produces output
        return result
    return CandidateSet.passthrough(word, PASS)
