"""Pipeline configuration, read from an INI file with one section per component."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .rewrite.neuralr import NeuralConfig


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    # [general]
    seed: int = 12345
    model_dir: str = "models"
    normalize: bool = True
    # [corpus]
    corpus_dir: Optional[str] = None
    train_split: str = "train"
    dev_split: str = "dev"
    # [labels]
    enclitic_table: Optional[str] = None
    # [gid]
    gid_epochs: int = 10
    # [rewrite]; the cascade order is fixed, the toggles only drop stages
    use_corpusr: bool = True
    use_morphr: bool = True
    use_neuralr: bool = True
    rule_table: Optional[str] = None
    neural: NeuralConfig = field(default_factory=NeuralConfig)
    # [select]
    scorer_backend: str = "ngram"
    lm_order: int = 3
    lm_k: float = 0.1
    cap: int = 512
    per_word_k: int = 3

    base_dir: Path = field(default_factory=Path.cwd, repr=False)

    def path(self, value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def models(self) -> Path:
        return self.path(self.model_dir)

    @property
    def cascade(self) -> list[str]:
        return [name for name, on in (("corpusr", self.use_corpusr), ("morphr", self.use_morphr),
                                      ("neuralr", self.use_neuralr)) if on]


# (section, key) -> attribute
_KEYS = {
    ("general", "seed"): "seed",
    ("general", "model_dir"): "model_dir",
    ("general", "normalize"): "normalize",
    ("corpus", "dir"): "corpus_dir",
    ("corpus", "train_split"): "train_split",
    ("corpus", "dev_split"): "dev_split",
    ("labels", "enclitic_table"): "enclitic_table",
    ("gid", "epochs"): "gid_epochs",
    ("rewrite", "corpusr"): "use_corpusr",
    ("rewrite", "morphr"): "use_morphr",
    ("rewrite", "neuralr"): "use_neuralr",
    ("rewrite", "rule_table"): "rule_table",
    ("select", "backend"): "scorer_backend",
    ("select", "n"): "lm_order",
    ("select", "k"): "lm_k",
    ("select", "cap"): "cap",
    ("select", "per_word_k"): "per_word_k",
}


def _convert(raw: str, like, where: str):
    try:
        if isinstance(like, bool):
            return configparser.ConfigParser.BOOLEAN_STATES[raw.strip().lower()]
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float):
            return float(raw)
    except (KeyError, ValueError):
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None
    raw = raw.strip()
    return raw or None


def load_config(path=None) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read(path, encoding="utf-8")
    cfg.base_dir = path.parent.resolve()
    defaults = PipelineConfig()
    neural_defaults = NeuralConfig()
    neural_fields = {f.name for f in fields(NeuralConfig)}
    for section in parser.sections():
        for key, raw in parser.items(section):
            where = f"{section}.{key}"
            if (section, key) in _KEYS:
                attr = _KEYS[section, key]
                setattr(cfg, attr, _convert(raw, getattr(defaults, attr) if getattr(defaults, attr) is not None else "", where))
            elif section == "neuralr" and key in neural_fields:
                setattr(cfg.neural, key, _convert(raw, getattr(neural_defaults, key), where))
            else:
                raise ConfigError(f"unknown config key {where}")
    return cfg


def dump_config(cfg: PipelineConfig) -> str:
    parser = configparser.ConfigParser()
    for (section, key), attr in _KEYS.items():
        value = getattr(cfg, attr)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, "" if value is None else str(value).lower() if isinstance(value, bool) else str(value))
    parser.add_section("neuralr")
    for f in fields(NeuralConfig):
        value = getattr(cfg.neural, f.name)
        parser.set("neuralr", f.name, str(value).lower() if isinstance(value, bool) else str(value))
    import io
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
