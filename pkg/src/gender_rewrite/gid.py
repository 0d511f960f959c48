"""Word-level gender identification.

Anything with a ``predict(words) -> list[WordLabel]`` method can drive the
pipeline. The reference model here is an averaged multi-class perceptron over
sparse lexical and context features.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .corpus import START, Corpus
from .labels import ALL_LABELS, EncliticTable, WordLabel, default_enclitic_table, parse_word_label

FEATURE_TEMPLATE_VERSION = 1
END = "</s>"


class EmptyCorpus(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


class LabelPredictor(Protocol):
    def predict(self, words: Sequence[str]) -> list[WordLabel]: ...


def _position_bucket(position: int, length: int) -> str:
    if length == 1:
        return "only"
    if position == 0:
        return "first"
    if position == length - 1:
        return "last"
    return f"q{4 * position // length}"


def extract_features(sentence: Sequence[str], position: int,
                     table: Optional[EncliticTable] = None) -> dict[str, int]:
    """Sparse feature counts for the word at ``position``."""
    if not 0 <= position < len(sentence):
        raise IndexError(position)
    if table is None:
        table = default_enclitic_table()
    word = sentence[position]
    prev = sentence[position - 1] if position > 0 else START
    nxt = sentence[position + 1] if position + 1 < len(sentence) else END
    feats = [
        "bias",
        "w=" + word,
        "w-1=" + prev,
        "w+1=" + nxt,
        "w-1,w=" + prev + "|" + word,
        "pos=" + _position_bucket(position, len(sentence)),
    ]
    for k in range(1, 5):
        if len(word) >= k:
            feats.append(f"pre{k}={word[:k]}")
            feats.append(f"suf{k}={word[-k:]}")
    for k in (1, 2, 3):
        if prev != START and len(prev) >= k:
            feats.append(f"suf{k}-1={prev[-k:]}")
    stem, entry = table.segment(word)
    if entry is None:
        feats.append("encl=none")
    else:
        feats.append(f"encl={entry.slot}")
        feats.append("encl_form=" + entry.suffix)
        feats.append("stem=" + stem)
    vec: dict[str, int] = {}
    for f in feats:
        vec[f] = vec.get(f, 0) + 1
    return vec


class GidModel:
    """Linear multi-class scorer over sparse features (25 labels)."""

    def __init__(self, weights: Optional[dict] = None, table: Optional[EncliticTable] = None,
                 template_version: int = FEATURE_TEMPLATE_VERSION):
        self.weights: dict[str, dict[WordLabel, float]] = weights or {}
        self.table = table or default_enclitic_table()
        self.template_version = template_version
        self.labels = ALL_LABELS

    def scores(self, features: dict[str, int]) -> dict[WordLabel, float]:
        out = {label: 0.0 for label in self.labels}
        for feat, count in features.items():
            row = self.weights.get(feat)
            if not row:
                continue
            for label, w in row.items():
                out[label] += count * w
        return out

    def predict_one(self, features: dict[str, int]) -> WordLabel:
        scores = self.scores(features)
        best = self.labels[0]
        for label in self.labels[1:]:
            # strict > keeps the earliest label on ties
            if scores[label] > scores[best]:
                best = label
        return best

    def predict(self, words: Sequence[str]) -> list[WordLabel]:
        words = list(words)
        return [self.predict_one(extract_features(words, i, self.table)) for i in range(len(words))]

    # serialization
    def to_dict(self) -> dict:
        return {
            "format": "gid-perceptron",
            "template_version": self.template_version,
            "enclitics": self.table.to_tsv(),
            "weights": {f: {str(l): w for l, w in sorted(row.items(), key=lambda kv: ALL_LABELS.index(kv[0]))}
                        for f, row in sorted(self.weights.items())},
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "GidModel":
        if data.get("format") != "gid-perceptron":
            raise ModelFormatError("not a GID model file")
        if data.get("template_version") != FEATURE_TEMPLATE_VERSION:
            raise ModelFormatError(
                f"feature template version {data.get('template_version')} != {FEATURE_TEMPLATE_VERSION}")
        table = EncliticTable.from_lines(data["enclitics"].splitlines())
        weights = {f: {parse_word_label(l): w for l, w in row.items()} for f, row in data["weights"].items()}
        return cls(weights, table, data["template_version"])

    @classmethod
    def load(cls, path) -> "GidModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def predict_labels(model: LabelPredictor, sentence: Sequence[str]) -> list[WordLabel]:
    return model.predict(sentence)


def training_instances(corpus: Corpus, table: EncliticTable) -> list[tuple[dict[str, int], WordLabel]]:
    data = []
    for ex in corpus.examples:
        words = [t.surface for t in ex.input]
        for i, tok in enumerate(ex.input):
            data.append((extract_features(words, i, table), tok.label))
    return data


def train_gid(corpus: Corpus, epochs: int = 10, seed: int = 12345,
              table: Optional[EncliticTable] = None) -> GidModel:
    """Averaged perceptron; token order is reshuffled each epoch with ``seed``."""
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    table = table or default_enclitic_table()
    data = training_instances(corpus, table)
    if not data:
        raise EmptyCorpus("cannot train a GID model on an empty corpus")

    model = GidModel(table=table)
    weights = defaultdict(lambda: defaultdict(float))
    totals = defaultdict(lambda: defaultdict(float))
    stamps = defaultdict(lambda: defaultdict(int))
    step = 0

    def bump(feat, label, value):
        # lazy averaging: bring the running total up to date before changing the weight
        totals[feat][label] += (step - stamps[feat][label]) * weights[feat][label]
        stamps[feat][label] = step
        weights[feat][label] += value

    rng = random.Random(seed)
    order = list(range(len(data)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            feats, gold = data[idx]
            model.weights = weights
            guess = model.predict_one(feats)
            if guess != gold:
                for f, c in feats.items():
                    bump(f, gold, c)
                    bump(f, guess, -c)
            step += 1

    averaged = {}
    for feat, row in weights.items():
        avg_row = {}
        for label, w in row.items():
            total = totals[feat][label] + (step - stamps[feat][label]) * w
            avg = total / step
            if avg:
                avg_row[label] = avg
        if avg_row:
            averaged[feat] = avg_row
    return GidModel(averaged, table)


def label_accuracy(model: LabelPredictor, corpus: Corpus) -> float:
    right = total = 0
    for ex in corpus.examples:
        pred = model.predict([t.surface for t in ex.input])
        for p, tok in zip(pred, ex.input):
            right += p == tok.label
            total += 1
    return right / total if total else 0.0
