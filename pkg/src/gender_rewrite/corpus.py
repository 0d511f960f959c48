"""Five-way word-aligned parallel corpora.

On disk a corpus split is five TSV files, one per rendering::

    <split>.input.tsv  <split>.1M_2M.tsv  <split>.1F_2M.tsv  <split>.1M_2F.tsv  <split>.1F_2F.tsv

Each file holds one token per line as ``surface<TAB>coarse<TAB>extended`` with
a blank line after every sentence. ``_`` marks a missing label.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .labels import (
    ALL_LABELS,
    BB,
    TARGETS,
    EncliticTable,
    GenderSlot,
    MalformedLabel,
    SentenceTarget,
    WordLabel,
    default_enclitic_table,
    parse_word_label,
    required_word_target,
    needs_rewrite,
)

log = logging.getLogger(__name__)

START = "<s>"
MISSING = "_"
SPLITS = ("train", "dev", "test")


class AlignmentError(ValueError):
    def __init__(self, sentence: int, position: Optional[int] = None, detail: str = ""):
        self.sentence = sentence
        self.position = position
        where = f"sentence {sentence}" + (f", position {position}" if position is not None else "")
        super().__init__(f"alignment mismatch at {where}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class Token:
    surface: str
    coarse: Optional[GenderSlot] = None
    extended: Optional[WordLabel] = None

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"token surface must be non-empty and whitespace-free: {self.surface!r}")
        if self.surface == START:
            raise ValueError(f"{START!r} is reserved")

    @property
    def label(self) -> WordLabel:
        """Extended label, falling back to the promoted coarse label, then B+B."""
        if self.extended is not None:
            return self.extended
        if self.coarse is not None:
            return WordLabel(self.coarse, GenderSlot.B)
        return BB


def tokens(words: Iterable[str]) -> tuple[Token, ...]:
    return tuple(Token(w) for w in words)


def surfaces(seq: Sequence[Token]) -> list[str]:
    return [t.surface for t in seq]


@dataclass(frozen=True)
class ParallelExample:
    input: tuple[Token, ...]
    targets: Mapping[SentenceTarget, tuple[Token, ...]]

    def __post_init__(self):
        missing = [str(t) for t in TARGETS if t not in self.targets]
        if missing:
            raise ValueError("missing target renderings: " + ", ".join(missing))

    def renderings(self) -> list[tuple[Token, ...]]:
        """Input followed by the four target renderings in canonical order."""
        return [self.input] + [self.targets[t] for t in TARGETS]

    def __len__(self):
        return len(self.input)


@dataclass(frozen=True)
class Corpus:
    examples: tuple[ParallelExample, ...] = ()
    split: str = "train"

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)


@dataclass(frozen=True)
class RewritePair:
    source: str
    prev: str
    target_surface: str
    target_label: WordLabel


def check_alignment(example: ParallelExample, index: int = 0) -> None:
    n = len(example.input)
    for seq in example.renderings()[1:]:
        if len(seq) != n:
            raise AlignmentError(index, min(n, len(seq)), f"lengths {n} vs {len(seq)}")


def label_violations(example: ParallelExample) -> list[tuple[SentenceTarget, int, WordLabel]]:
    """Positions whose extended label in a target rendering is incompatible with that target."""
    bad = []
    for target in TARGETS:
        for j, tok in enumerate(example.targets[target]):
            if tok.extended is not None and needs_rewrite(tok.extended, target):
                bad.append((target, j, tok.extended))
    return bad


# --- I/O -------------------------------------------------------------------

def corpus_paths(directory, split: str = "train") -> dict[str, Path]:
    directory = Path(directory)
    paths = {"input": directory / f"{split}.input.tsv"}
    for t in TARGETS:
        paths[str(t)] = directory / f"{split}.{t.file_tag}.tsv"
    return paths


def _parse_label_cols(cols: list[str], where: str):
    coarse = extended = None
    try:
        if len(cols) > 1 and cols[1] != MISSING:
            coarse = GenderSlot.parse(cols[1])
        if len(cols) > 2 and cols[2] != MISSING:
            extended = parse_word_label(cols[2])
    except MalformedLabel as e:
        raise MalformedLabel(f"{where}: {e}") from None
    return coarse, extended


def read_token_file(path) -> list[tuple[Token, ...]]:
    sentences, current = [], []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                sentences.append(tuple(current))
                current = []
                continue
            cols = line.split("\t")
            if len(cols) > 3:
                raise ValueError(f"{path}:{lineno}: too many columns")
            coarse, extended = _parse_label_cols(cols, f"{path}:{lineno}")
            current.append(Token(cols[0], coarse, extended))
    if current:
        sentences.append(tuple(current))
    return sentences


def parse_corpus(paths: "Mapping[str, str | Path] | str | Path", split: str = "train") -> Corpus:
    """Read five parallel token files into a Corpus.

    ``paths`` is either a directory (standard file names) or a mapping from
    ``"input"`` and each target string (``"1M/2M"`` ...) to a file.
    """
    if not isinstance(paths, Mapping):
        paths = corpus_paths(paths, split)
    for key, p in paths.items():
        if not Path(p).exists():
            raise FileNotFoundError(f"corpus file for {key!r} not found: {p}")
    streams = [read_token_file(paths["input"])] + [read_token_file(paths[str(t)]) for t in TARGETS]
    count = len(streams[0])
    for s in streams[1:]:
        if len(s) != count:
            raise AlignmentError(min(count, len(s)), None, f"sentence counts {count} vs {len(s)}")
    examples = []
    for i in range(count):
        ex = ParallelExample(streams[0][i], {t: streams[k + 1][i] for k, t in enumerate(TARGETS)})
        check_alignment(ex, i)
        examples.append(ex)
    return Corpus(tuple(examples), split)


def _token_line(tok: Token) -> str:
    coarse = str(tok.coarse) if tok.coarse is not None else MISSING
    ext = str(tok.extended) if tok.extended is not None else MISSING
    return f"{tok.surface}\t{coarse}\t{ext}\n"


def write_corpus(corpus: Corpus, paths: "Mapping[str, str | Path] | str | Path") -> dict[str, Path]:
    if not isinstance(paths, Mapping):
        Path(paths).mkdir(parents=True, exist_ok=True)
        paths = corpus_paths(paths, corpus.split)
    keys = ["input"] + [str(t) for t in TARGETS]
    for k, key in enumerate(keys):
        with open(paths[key], "w", encoding="utf-8", newline="\n") as f:
            for ex in corpus.examples:
                for tok in ex.renderings()[k]:
                    f.write(_token_line(tok))
                f.write("\n")
    return {k: Path(paths[k]) for k in keys}


def read_sentences(path) -> list[list[str]]:
    """Plain text, one whitespace-tokenized sentence per line."""
    with open(path, encoding="utf-8") as f:
        return [line.split() for line in f.read().splitlines()]


def write_sentences(path, sentences: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            f.write(" ".join(s) + "\n")


# --- annotation extension ----------------------------------------------------

def _extend_position(words: list[Token], table: EncliticTable) -> list[WordLabel]:
    if len({t.surface for t in words}) == 1:
        # identical in every rendering: invariant in this sentence
        return [BB] * len(words)
    segs = [table.segment(t.surface) for t in words]
    stems = {stem for stem, _ in segs}
    enclitic_forms = {e.suffix if e else None for _, e in segs}
    labels = []
    for tok, (stem, entry) in zip(words, segs):
        if tok.coarse is None or tok.coarse is GenderSlot.B:
            labels.append(BB)
            continue
        enclitic = GenderSlot.B
        if entry is not None and len(enclitic_forms) > 1:
            enclitic = entry.slot
        base = GenderSlot.B if len(stems) == 1 else tok.coarse
        labels.append(WordLabel(base, enclitic))
    return labels


def extend_annotations(example: ParallelExample, table: Optional[EncliticTable] = None) -> ParallelExample:
    """Derive base+enclitic labels for every rendering from the coarse labels.

    Per aligned position: the enclitic slot comes from the enclitic table when
    the enclitic differs somewhere across the renderings; the base slot is B
    when the stem (word minus enclitic) is identical in all renderings and the
    coarse label otherwise. Words with a B or missing coarse label, and words
    identical across all renderings, get B+B.
    """
    if table is None:
        table = default_enclitic_table()
    check_alignment(example)
    rens = example.renderings()
    new = [list(seq) for seq in rens]
    for j in range(len(example.input)):
        column = [seq[j] for seq in rens]
        for k, label in enumerate(_extend_position(column, table)):
            new[k][j] = replace(column[k], extended=label)
    return ParallelExample(tuple(new[0]), {t: tuple(new[k + 1]) for k, t in enumerate(TARGETS)})


def extend_corpus(corpus: Corpus, table: Optional[EncliticTable] = None) -> Corpus:
    return Corpus(tuple(extend_annotations(ex, table) for ex in corpus.examples), corpus.split)


def has_extended_labels(corpus: Corpus) -> bool:
    return all(tok.extended is not None for ex in corpus for seq in ex.renderings() for tok in seq)


# --- training pairs and statistics -------------------------------------------

def extract_rewrite_pairs(corpus: Corpus) -> list[RewritePair]:
    pairs = []
    for ex in corpus.examples:
        for j, tok in enumerate(ex.input):
            label = tok.label
            if label.is_invariant:
                continue
            prev = ex.input[j - 1].surface if j > 0 else START
            for target in TARGETS:
                g = required_word_target(label, target)
                if g != label:
                    pairs.append(RewritePair(tok.surface, prev, ex.targets[target][j].surface, g))
    return pairs


@dataclass
class CorpusStats:
    sentences: int = 0
    words: int = 0
    gendered_words: int = 0
    gendered_sentences: int = 0
    label_counts: dict = field(default_factory=dict)

    @property
    def gendered_word_fraction(self) -> float:
        return self.gendered_words / self.words if self.words else 0.0

    @property
    def gendered_sentence_fraction(self) -> float:
        return self.gendered_sentences / self.sentences if self.sentences else 0.0

    @property
    def label_fractions(self) -> dict:
        if not self.words:
            return {k: 0.0 for k in self.label_counts}
        return {k: v / self.words for k, v in self.label_counts.items()}

    def to_dict(self) -> dict:
        return {
            "sentences": self.sentences,
            "words": self.words,
            "gendered_words": self.gendered_words,
            "gendered_word_fraction": self.gendered_word_fraction,
            "gendered_sentences": self.gendered_sentences,
            "gendered_sentence_fraction": self.gendered_sentence_fraction,
            "label_counts": self.label_counts,
            "label_fractions": self.label_fractions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Counts over the input side; a word is gendered if its label is not B+B."""
    counts = Counter()
    stats = CorpusStats()
    for ex in corpus.examples:
        stats.sentences += 1
        gendered = False
        for tok in ex.input:
            label = tok.label
            counts[label] += 1
            stats.words += 1
            if not label.is_invariant:
                stats.gendered_words += 1
                gendered = True
        stats.gendered_sentences += gendered
    stats.label_counts = {str(l): counts[l] for l in ALL_LABELS if counts[l]}
    return stats
