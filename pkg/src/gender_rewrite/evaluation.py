"""Evaluation: orthographic normalization, MaxMatch-style edit scoring, BLEU
and error attribution."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

# Alif variants -> bare Alif, Alif-Maqsura -> Ya, Ta-Marbuta -> Ha
DEFAULT_NORMALIZATION = {
    "آ": "ا",  # alif madda
    "أ": "ا",  # hamza above
    "إ": "ا",  # hamza below
    "ٱ": "ا",  # alif wasla
    "ى": "ي",  # alif maqsura
    "ة": "ه",  # ta marbuta
}


class LengthMismatch(ValueError):
    pass


class NormalizationTable:
    def __init__(self, mapping: Optional[Mapping[str, str]] = None):
        mapping = dict(DEFAULT_NORMALIZATION if mapping is None else mapping)
        for src, dst in mapping.items():
            if len(src) != 1 or len(dst) != 1:
                raise ValueError("normalization maps single characters to single characters")
            if dst in mapping and mapping[dst] != dst:
                raise ValueError(f"image character {dst!r} is itself remapped; table would not be idempotent")
        self.mapping = mapping
        self._trans = str.maketrans(mapping)

    def __call__(self, text: str) -> str:
        return text.translate(self._trans)


DEFAULT_TABLE = NormalizationTable()


def normalize_text(text: str, table: Optional[NormalizationTable] = None) -> str:
    return (table or DEFAULT_TABLE)(text)


def normalize_tokens(tokens: Sequence[str], table: Optional[NormalizationTable] = None) -> list[str]:
    return [normalize_text(t, table) for t in tokens]


# --- edits -----------------------------------------------------------------

@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    replacement: tuple[str, ...]

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


def _align(source: Sequence[str], hypothesis: Sequence[str]) -> list[tuple[str, int, int]]:
    """Unit-cost Levenshtein alignment; returns ops ('=', 'S', 'D', 'I') with positions.

    Backtrace prefers diagonal moves, then deletions, then insertions, which
    places differences as far left as the cost allows.
    """
    n, m = len(source), len(hypothesis)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = d[i - 1][j - 1] + (source[i - 1] != hypothesis[j - 1])
            d[i][j] = min(sub, d[i - 1][j] + 1, d[i][j - 1] + 1)
    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (source[i - 1] != hypothesis[j - 1]):
            ops.append(("=" if source[i - 1] == hypothesis[j - 1] else "S", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append(("D", i - 1, j))
            i -= 1
        else:
            ops.append(("I", i, j - 1))
            j -= 1
    ops.reverse()
    return ops


def extract_edits(source: Sequence[str], hypothesis: Sequence[str]) -> list[Edit]:
    """Token edits turning ``source`` into ``hypothesis``.

    Equal lengths give one substitution per differing position. Otherwise an
    alignment is computed and adjacent non-matching operations merge into one
    phrase edit.
    """
    source, hypothesis = list(source), list(hypothesis)
    if len(source) == len(hypothesis):
        return [Edit(i, i + 1, (h,)) for i, (s, h) in enumerate(zip(source, hypothesis)) if s != h]
    edits = []
    cur = None  # [start, end, replacement list]
    for op, i, j in _align(source, hypothesis):
        if op == "=":
            if cur:
                edits.append(Edit(cur[0], cur[1], tuple(cur[2])))
                cur = None
            continue
        if cur is None:
            cur = [i, i, []]
        if op in ("S", "D"):
            cur[1] = i + 1
        if op in ("S", "I"):
            cur[2].append(hypothesis[j])
    if cur:
        edits.append(Edit(cur[0], cur[1], tuple(cur[2])))
    return edits


# --- M2 --------------------------------------------------------------------

def f_beta(p: float, r: float, beta: float = 0.5) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise ValueError(f"precision and recall must lie in [0, 1], got {p}, {r}")
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return 0.0
    return (1 + b2) * p * r / denom


@dataclass(frozen=True)
class M2Result:
    precision: float
    recall: float
    f_beta: float
    matched: int
    system_count: int
    gold_count: int
    beta: float = 0.5

    def percent(self) -> dict:
        return {"P": round(100 * self.precision, 2), "R": round(100 * self.recall, 2),
                "F0.5": round(100 * self.f_beta, 2)}


def count_matches(system: Sequence[Edit], gold: Sequence[Edit]) -> int:
    """Size of the largest one-to-one matching between identical edits."""
    return sum((Counter(system) & Counter(gold)).values())


def m2_result(matched: int, system_count: int, gold_count: int, beta: float = 0.5) -> M2Result:
    p = matched / system_count if system_count else 1.0
    r = matched / gold_count if gold_count else 1.0
    return M2Result(p, r, f_beta(p, r, beta), matched, system_count, gold_count, beta)


def sentence_m2_counts(source: Sequence[str], hypothesis: Sequence[str],
                       references: Sequence[Sequence[str]]) -> tuple[int, int, int]:
    """(matched, system, gold) for one sentence against its best reference."""
    system = extract_edits(source, hypothesis)
    best = None
    for ref in references:
        gold = extract_edits(source, ref)
        key = (count_matches(system, gold), len(gold))
        if best is None or key > best:
            best = key
    if best is None:
        raise ValueError("every sentence needs at least one reference")
    return best[0], len(system), best[1]


def m2_score(sources: Sequence[Sequence[str]], hypotheses: Sequence[Sequence[str]],
             references: Sequence[Sequence[Sequence[str]]], normalize: bool = False,
             beta: float = 0.5, table: Optional[NormalizationTable] = None) -> M2Result:
    """Corpus precision/recall/F over system edits matched against gold edits.

    ``references[i]`` holds one or more reference token lists for sentence i.
    With ``normalize`` all text is mapped through the normalization table
    before edits are extracted.
    """
    if not (len(sources) == len(hypotheses) == len(references)):
        raise LengthMismatch(f"{len(sources)} sources, {len(hypotheses)} hypotheses, {len(references)} reference sets")
    matched = system = gold = 0
    for src, hyp, refs in zip(sources, hypotheses, references):
        if normalize:
            src, hyp = normalize_tokens(src, table), normalize_tokens(hyp, table)
            refs = [normalize_tokens(r, table) for r in refs]
        m, s, g = sentence_m2_counts(src, hyp, refs)
        matched += m
        system += s
        gold += g
    return m2_result(matched, system, gold, beta)


# --- BLEU ------------------------------------------------------------------

def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


def bleu_stats(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]], max_n: int = 4):
    """Corpus sums: (hyp_len, ref_len, matches per order, totals per order)."""
    matches, totals = [0] * max_n, [0] * max_n
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            h, r = _ngrams(hyp, n), _ngrams(ref, n)
            matches[n - 1] += sum((h & r).values())
            totals[n - 1] += sum(h.values())
    return hyp_len, ref_len, matches, totals


def bleu_corpus(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
                max_n: int = 4) -> float:
    """Corpus BLEU on a 0-100 scale with a single reference per hypothesis.

    Orders n >= 2 with zero matches use (0 + 1) / (total + 1).
    """
    if not hypotheses:
        raise ValueError("BLEU of an empty corpus is undefined")
    if len(hypotheses) != len(references):
        raise LengthMismatch(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    hyp_len, ref_len, matches, totals = bleu_stats(hypotheses, references, max_n)
    if hyp_len == 0 or matches[0] == 0:
        return 0.0
    log_p = 0.0
    for n in range(max_n):
        if matches[n] == 0:
            log_p += math.log(1.0 / (totals[n] + 1))
        else:
            log_p += math.log(matches[n] / totals[n])
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p / max_n)


# --- error attribution -------------------------------------------------------

GID, REWRITE, SELECT = "GID", "Rewrite", "Select"


def attribute_errors(source: Sequence[str], gold_labels: Sequence, predicted_labels: Sequence,
                     candidates: Mapping[int, Sequence[str]], selected: Sequence[str],
                     gold: Sequence[str]) -> dict[str, int]:
    """Blame each wrong output word on GID, the rewriters or the selector.

    ``candidates`` maps a position to the surfaces proposed there; positions
    without an entry only ever offered the source word.
    """
    n = len(source)
    if not (len(gold_labels) == len(predicted_labels) == len(selected) == len(gold) == n):
        raise LengthMismatch("attribute_errors needs aligned sequences")
    counts = {GID: 0, REWRITE: 0, SELECT: 0}
    for i in range(n):
        if selected[i] == gold[i]:
            continue
        if predicted_labels[i] != gold_labels[i]:
            counts[GID] += 1
        elif gold[i] not in candidates.get(i, (source[i],)):
            counts[REWRITE] += 1
        else:
            counts[SELECT] += 1
    return counts
