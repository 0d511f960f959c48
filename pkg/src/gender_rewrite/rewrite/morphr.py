"""Training-free rule-table rewriter.

Rule tables are UTF-8 text with three sections::

    [suffix]
    # stem-ending <TAB> source slot <TAB> target slot <TAB> replacement
    _	1M	1F	ة
    ة	1F	1M	_
    [lexical]
    # stem <TAB> target slot <TAB> replacement
    أخ	1F	أخت
    [enclitic]
    # same format as the enclitic table file
    كم	2M	alt:2F=كن

``_`` stands for the empty string. A missing ``[enclitic]`` section means the
default enclitic table.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional

from ..labels import (
    EncliticTable,
    GenderSlot,
    WordLabel,
    _content_lines,
    default_enclitic_table,
    parse_enclitic_line,
)
from .candidates import MORPHR, Candidate, CandidateSet

EMPTY = "_"


@dataclass(frozen=True)
class SuffixRule:
    match: str
    source: GenderSlot
    target: GenderSlot
    replacement: str

    def applies(self, stem: str, source: GenderSlot, target: GenderSlot) -> bool:
        return (self.source is source and self.target is target
                and stem.endswith(self.match) and len(stem) > len(self.match))

    def apply(self, stem: str) -> str:
        return stem[: len(stem) - len(self.match)] + self.replacement


@dataclass
class MorphRuleTable:
    suffix_rules: list[SuffixRule] = field(default_factory=list)
    lexical: dict[tuple[str, GenderSlot], list[str]] = field(default_factory=dict)
    enclitics: EncliticTable = field(default_factory=default_enclitic_table)

    def __post_init__(self):
        # longest match first; sort is stable so file order breaks ties
        self.suffix_rules = sorted(self.suffix_rules, key=lambda r: -len(r.match))

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "MorphRuleTable":
        section = None
        suffix, enclitic_entries = [], []
        lexical = defaultdict(list)
        saw_enclitic = False
        for n, line in _content_lines(lines):
            head = line.strip()
            if head.startswith("[") and head.endswith("]"):
                section = head[1:-1].strip().lower()
                if section not in ("suffix", "lexical", "enclitic"):
                    raise ValueError(f"line {n}: unknown section {head}")
                saw_enclitic |= section == "enclitic"
                continue
            cols = [_unempty(c) for c in line.split("\t")]
            if section == "suffix":
                if len(cols) != 4:
                    raise ValueError(f"line {n}: suffix rule needs 4 columns")
                suffix.append(SuffixRule(cols[0], GenderSlot.parse(cols[1]), GenderSlot.parse(cols[2]), cols[3]))
            elif section == "lexical":
                if len(cols) != 3:
                    raise ValueError(f"line {n}: lexical rule needs 3 columns")
                lexical[cols[0], GenderSlot.parse(cols[1])].append(cols[2])
            elif section == "enclitic":
                enclitic_entries.append(parse_enclitic_line(line, n))
            else:
                raise ValueError(f"line {n}: rule outside of a section")
        enclitics = EncliticTable(enclitic_entries) if saw_enclitic else default_enclitic_table()
        return cls(suffix, dict(lexical), enclitics)

    @classmethod
    def from_file(cls, path) -> "MorphRuleTable":
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f)

    def base_alternatives(self, stem: str, source: GenderSlot, target: GenderSlot) -> list[str]:
        """Ranked base forms for a base-slot change; lexical exceptions win over suffix rules."""
        forms = self.lexical.get((stem, target))
        if not forms:
            forms = [r.apply(stem) for r in self.suffix_rules if r.applies(stem, source, target)]
        out = []
        for f in forms:
            if f and f not in out:
                out.append(f)
        return out


def _unempty(col: str) -> str:
    col = col.strip()
    return "" if col == EMPTY else col


_DEFAULT: Optional[MorphRuleTable] = None


def default_rule_table() -> MorphRuleTable:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("gender_rewrite.data").joinpath("morph_rules.tsv").read_text(encoding="utf-8")
        _DEFAULT = MorphRuleTable.from_lines(text.splitlines())
    return _DEFAULT


def load_rule_table(path=None) -> MorphRuleTable:
    return default_rule_table() if path is None else MorphRuleTable.from_file(path)


def morphr_candidates(table: MorphRuleTable, word: str, source: WordLabel, target: WordLabel) -> CandidateSet:
    """Rewrite the base form, the enclitic, or both.

    Passes the word through when a required change has no rule.
    """
    base_change = source.base is not target.base
    encl_change = source.enclitic is not target.enclitic
    if not (base_change or encl_change):
        return CandidateSet.passthrough(word, MORPHR)

    if encl_change or source.enclitic is not GenderSlot.B:
        stem, entry = table.enclitics.segment(word)
    else:
        stem, entry = word, None

    if encl_change:
        new_enclitic = entry.form_for(target.enclitic) if entry is not None else None
        if new_enclitic is None:
            return CandidateSet.passthrough(word, MORPHR)
    else:
        new_enclitic = entry.suffix if entry is not None else ""

    if base_change:
        bases = table.base_alternatives(stem, source.base, target.base)
        if not bases:
            return CandidateSet.passthrough(word, MORPHR)
    else:
        bases = [stem]

    return CandidateSet.build(
        Candidate(base + new_enclitic, 1.0 / rank, MORPHR) for rank, base in enumerate(bases, 1))
