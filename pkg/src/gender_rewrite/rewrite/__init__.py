from .candidates import CORPUSR, MORPHR, NEURALR, PASS, Candidate, CandidateSet
from .cascade import NoRewriterSupplied, cascade_rewrite
from .corpusr import CorpusRewriter, corpusr_candidates, train_corpusr
from .morphr import MorphRuleTable, SuffixRule, default_rule_table, load_rule_table, morphr_candidates
from .neuralr import (
    EmptyTrainingSet,
    NeuralConfig,
    NeuralRewriter,
    UnknownCharacter,
    control_token,
    neuralr_kbest,
    train_neuralr,
)
