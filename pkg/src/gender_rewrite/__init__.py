"""Multi-step Arabic gender rewriting: word-level gender identification, a
CorpusR >> MorphR >> NeuralR rewriting cascade and in-context selection."""

from .labels import (
    ALL_LABELS,
    BB,
    SLOTS,
    TARGETS,
    EncliticTable,
    GenderSlot,
    MalformedLabel,
    SentenceTarget,
    WordLabel,
    format_word_label,
    needs_rewrite,
    parse_target,
    parse_word_label,
    required_word_target,
)
from .pipeline import GenderRewriter, RewriteTrace, replay

__version__ = "0.1.0"
