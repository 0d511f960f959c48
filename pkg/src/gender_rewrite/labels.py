"""Gender slots, word-level labels, sentence-level targets and enclitic tables.

A word carries two independent gender slots: one for its base form (stem plus
affixes) and one for an attached pronominal enclitic. Each slot is one of
``B`` (invariant/ambiguous), ``1M``, ``1F``, ``2M`` or ``2F``, which gives 25
word labels such as ``1F+2M``. A sentence target fixes the gender of the first
and second person, e.g. ``1F/2M``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional


class MalformedLabel(ValueError):
    pass


class GenderSlot(enum.Enum):
    B = "B"
    M1 = "1M"
    F1 = "1F"
    M2 = "2M"
    F2 = "2F"

    @property
    def person(self) -> Optional[int]:
        if self is GenderSlot.B:
            return None
        return int(self.value[0])

    @property
    def gender(self) -> Optional[str]:
        if self is GenderSlot.B:
            return None
        return self.value[1]

    @classmethod
    def parse(cls, text: str) -> "GenderSlot":
        try:
            return cls(text.strip())
        except ValueError:
            raise MalformedLabel(f"unknown gender slot {text!r}") from None

    @classmethod
    def of(cls, person: int, gender: str) -> "GenderSlot":
        return cls(f"{person}{gender}")

    def __str__(self) -> str:
        return self.value


# Enumeration order matters: it is the tie-break order used by classifiers.
SLOTS = (GenderSlot.B, GenderSlot.M1, GenderSlot.F1, GenderSlot.M2, GenderSlot.F2)


@dataclass(frozen=True)
class WordLabel:
    base: GenderSlot = GenderSlot.B
    enclitic: GenderSlot = GenderSlot.B

    def __str__(self) -> str:
        return f"{self.base}+{self.enclitic}"

    @property
    def is_invariant(self) -> bool:
        return self.base is GenderSlot.B and self.enclitic is GenderSlot.B

    def coarse(self) -> GenderSlot:
        """Collapse to a single slot: the base slot, or the enclitic slot if the base is B."""
        return self.base if self.base is not GenderSlot.B else self.enclitic


ALL_LABELS = tuple(WordLabel(b, e) for b, e in itertools.product(SLOTS, SLOTS))
BB = ALL_LABELS[0]


def parse_word_label(text: str) -> WordLabel:
    """Parse ``"1F+2M"``; a bare slot ``"1F"`` is promoted to ``1F+B``."""
    parts = text.strip().split("+")
    if len(parts) == 1:
        return WordLabel(GenderSlot.parse(parts[0]), GenderSlot.B)
    if len(parts) == 2:
        return WordLabel(GenderSlot.parse(parts[0]), GenderSlot.parse(parts[1]))
    raise MalformedLabel(f"word label must have one or two slots: {text!r}")


def format_word_label(label: WordLabel) -> str:
    return str(label)


@dataclass(frozen=True)
class SentenceTarget:
    first: str
    second: str

    def __post_init__(self):
        if self.first not in ("M", "F") or self.second not in ("M", "F"):
            raise MalformedLabel(f"bad sentence target genders {self.first!r}/{self.second!r}")

    def __str__(self) -> str:
        return f"1{self.first}/2{self.second}"

    @property
    def file_tag(self) -> str:
        """Filesystem-safe name, e.g. ``1F_2M``."""
        return f"1{self.first}_2{self.second}"

    def gender_for(self, person: int) -> str:
        return self.first if person == 1 else self.second


TARGETS = (
    SentenceTarget("M", "M"),
    SentenceTarget("F", "M"),
    SentenceTarget("M", "F"),
    SentenceTarget("F", "F"),
)


def parse_target(text: str) -> SentenceTarget:
    t = text.strip().replace("_", "/")
    for target in TARGETS:
        if str(target) == t:
            return target
    raise MalformedLabel(f"unknown sentence target {text!r}; expected one of "
                         + ", ".join(str(x) for x in TARGETS))


def _required_slot(slot: GenderSlot, target: SentenceTarget) -> GenderSlot:
    if slot is GenderSlot.B:
        return slot
    return GenderSlot.of(slot.person, target.gender_for(slot.person))


def required_word_target(label: WordLabel, target: SentenceTarget) -> WordLabel:
    """The label a word must carry to be compatible with ``target``."""
    return WordLabel(_required_slot(label.base, target), _required_slot(label.enclitic, target))


def needs_rewrite(label: WordLabel, target: SentenceTarget) -> bool:
    return required_word_target(label, target) != label


# --- enclitics -------------------------------------------------------------

@dataclass(frozen=True)
class EncliticEntry:
    suffix: str
    slot: GenderSlot
    alternatives: Mapping[GenderSlot, str] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.suffix, self.slot, tuple(sorted((k.value, v) for k, v in self.alternatives.items()))))

    def form_for(self, slot: GenderSlot) -> Optional[str]:
        if slot is self.slot:
            return self.suffix
        return self.alternatives.get(slot)


class EncliticTable:
    """Suffix table for pronominal enclitics, matched longest-first."""

    def __init__(self, entries: Iterable[EncliticEntry]):
        entries = list(entries)
        seen = {}
        for e in entries:
            if not e.suffix:
                raise ValueError("enclitic suffix must be non-empty")
            if e.suffix in seen and seen[e.suffix].slot is not e.slot:
                raise ValueError(f"enclitic {e.suffix!r} listed with conflicting classes")
            seen.setdefault(e.suffix, e)
        # stable sort keeps file order among equal lengths
        self.entries = tuple(sorted(seen.values(), key=lambda e: -len(e.suffix)))
        self._forms = frozenset(seen)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, EncliticTable) and self.entries == other.entries

    def segment(self, word: str) -> tuple[str, Optional[EncliticEntry]]:
        if word in self._forms:
            return word, None
        for entry in self.entries:
            if word.endswith(entry.suffix):
                return word[: -len(entry.suffix)], entry
        return word, None

    def to_tsv(self) -> str:
        lines = []
        for e in self.entries:
            alts = ",".join(f"{s}={e.alternatives[s]}" for s in SLOTS if s in e.alternatives)
            lines.append(f"{e.suffix}\t{e.slot}\talt:{alts}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "EncliticTable":
        return cls(parse_enclitic_line(line, n) for n, line in _content_lines(lines))

    @classmethod
    def from_file(cls, path) -> "EncliticTable":
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f)


def _content_lines(lines: Iterable[str]):
    for n, line in enumerate(lines, 1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield n, line


def parse_enclitic_line(line: str, lineno: int = 0) -> EncliticEntry:
    cols = line.split("\t")
    if len(cols) not in (2, 3):
        raise ValueError(f"line {lineno}: expected suffix<TAB>slot<TAB>alt:..., got {line!r}")
    suffix, slot = cols[0].strip(), GenderSlot.parse(cols[1])
    alternatives = {}
    if len(cols) == 3:
        alt = cols[2].strip()
        if not alt.startswith("alt:"):
            raise ValueError(f"line {lineno}: third column must start with 'alt:'")
        for item in filter(None, (x.strip() for x in alt[4:].split(","))):
            key, _, form = item.partition("=")
            alt_slot = GenderSlot.parse(key)
            if form:
                alternatives[alt_slot] = form
    return EncliticEntry(suffix, slot, alternatives)


def segment_enclitic(word: str, table: "EncliticTable | None" = None) -> tuple[str, Optional[EncliticEntry]]:
    """Split ``word`` into stem and the longest matching enclitic.

    A word that is itself an enclitic form is never split.
    """
    if table is None:
        table = default_enclitic_table()
    return table.segment(word)


_DEFAULT_TABLE: Optional[EncliticTable] = None


def default_enclitic_table() -> EncliticTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        text = resources.files("gender_rewrite.data").joinpath("enclitics.tsv").read_text(encoding="utf-8")
        _DEFAULT_TABLE = EncliticTable.from_lines(text.splitlines())
    return _DEFAULT_TABLE


def load_enclitic_table(path: "str | Path | None") -> EncliticTable:
    if path is None:
        return default_enclitic_table()
    return EncliticTable.from_file(path)
