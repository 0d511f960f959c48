"""Command-line entry point: train, rewrite, evaluate, augment, post-edit, stats.

Text input and output is one whitespace-tokenized sentence per line, UTF-8.
Failures print a single JSON line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .config import ConfigError, PipelineConfig, load_config
from .corpus import (
    Corpus,
    ParallelExample,
    Token,
    check_alignment,
    corpus_paths,
    corpus_stats,
    extend_annotations,
    extend_corpus,
    extract_rewrite_pairs,
    has_extended_labels,
    label_violations,
    parse_corpus,
    read_sentences,
    write_corpus,
    write_sentences,
)
from .evaluation import LengthMismatch, bleu_corpus, m2_score, normalize_tokens
from .gid import GidModel, label_accuracy, train_gid
from .labels import TARGETS, SentenceTarget, load_enclitic_table, parse_target, required_word_target
from .pipeline import GenderRewriter
from .rewrite import CorpusRewriter, NeuralRewriter, load_rule_table, train_corpusr, train_neuralr
from .selection import load_scorer, train_lm

log = logging.getLogger("gender_rewrite")

GID_FILE = "gid.json"
CORPUSR_FILE = "corpusr.json"
NEURALR_FILE = "neuralr.pt"
LM_FILE = "lm.json"

PRONOUNS = re.compile(r"\b(i|me|my|mine|myself|you|your|yours|yourself)\b", re.IGNORECASE)


class ComponentError(RuntimeError):
    def __init__(self, component: str, cause: Exception):
        self.component = component
        self.cause = cause
        super().__init__(f"{component}: {cause}")


def _corpus_dir(cfg: PipelineConfig) -> Path:
    if cfg.corpus_dir is None:
        raise ConfigError("corpus.dir: no corpus directory configured")
    path = cfg.path(cfg.corpus_dir)
    if not path.is_dir():
        raise ConfigError(f"corpus.dir: path not found: {path}")
    return path


def load_training_corpus(cfg: PipelineConfig, split: Optional[str] = None) -> Corpus:
    corpus = parse_corpus(_corpus_dir(cfg), split or cfg.train_split)
    if not has_extended_labels(corpus):
        corpus = extend_corpus(corpus, load_enclitic_table(cfg.path(cfg.enclitic_table)))
    return corpus


def _dev_pairs(cfg: PipelineConfig):
    directory = _corpus_dir(cfg)
    if not all(p.exists() for p in corpus_paths(directory, cfg.dev_split).values()):
        return None
    return extract_rewrite_pairs(load_training_corpus(cfg, cfg.dev_split)) or None


def cmd_train(cfg: PipelineConfig) -> dict:
    """Train every enabled component and write the model files into ``cfg.models``."""
    corpus = load_training_corpus(cfg)
    table = load_enclitic_table(cfg.path(cfg.enclitic_table))
    out = cfg.models
    out.mkdir(parents=True, exist_ok=True)
    summary = {"examples": len(corpus), "model_dir": str(out)}

    try:
        gid = train_gid(corpus, cfg.gid_epochs, cfg.seed, table)
    except Exception as e:
        raise ComponentError("gid", e) from e
    gid.save(out / GID_FILE)
    summary["gid"] = {"features": len(gid.weights), "train_accuracy": round(label_accuracy(gid, corpus), 4)}

    pairs = extract_rewrite_pairs(corpus)
    summary["rewrite_pairs"] = len(pairs)
    if cfg.use_corpusr:
        corpusr = train_corpusr(pairs)
        corpusr.save(out / CORPUSR_FILE)
        summary["corpusr"] = {"entries": len(corpusr)}
    if cfg.use_neuralr:
        unique = sorted(set(pairs), key=lambda p: (p.source, str(p.target_label), p.target_surface, p.prev))
        try:
            neural = train_neuralr(unique, cfg.neural, cfg.seed, _dev_pairs(cfg))
        except Exception as e:
            raise ComponentError("neuralr", e) from e
        neural.save(out / NEURALR_FILE)
        summary["neuralr"] = {"pairs": len(unique), "epochs": len(neural.history),
                              "final_loss": round(neural.history[-1], 4) if neural.history else None}

    try:
        sentences = [[t.surface for t in r] for ex in corpus.examples for r in ex.renderings()]
        lm = train_lm(sentences, cfg.lm_order, cfg.lm_k)
    except Exception as e:
        raise ComponentError("lm", e) from e
    lm.save(out / LM_FILE)
    summary["lm"] = {"n": lm.n, "vocabulary": len(lm.vocabulary)}
    return summary


def load_system(cfg: PipelineConfig) -> GenderRewriter:
    out = cfg.models

    def need(name):
        path = out / name
        if not path.exists():
            raise FileNotFoundError(f"model file missing: {path} (run 'train' first)")
        return path

    try:
        gid = GidModel.load(need(GID_FILE))
        scorer = load_scorer(need(LM_FILE), cfg.scorer_backend)
        corpusr = CorpusRewriter.load(need(CORPUSR_FILE)) if cfg.use_corpusr else None
        morphr = load_rule_table(cfg.path(cfg.rule_table)) if cfg.use_morphr else None
        neuralr = NeuralRewriter.load(need(NEURALR_FILE)) if cfg.use_neuralr else None
    except FileNotFoundError:
        raise
    except Exception as e:
        raise ComponentError("model-load", e) from e
    return GenderRewriter(gid, scorer, corpusr, morphr, neuralr, cfg.cap, cfg.per_word_k)


def cmd_rewrite(cfg: PipelineConfig, sentences: Sequence[Sequence[str]], target: SentenceTarget,
                emit_trace: bool = False, system: Optional[GenderRewriter] = None):
    """Rewrite every sentence toward ``target``; returns (outputs, traces or None)."""
    system = system or load_system(cfg)
    outputs, traces = [], []
    for words in sentences:
        out, trace = system.rewrite(words, target)
        outputs.append(out)
        traces.append(trace)
    return outputs, (traces if emit_trace else None)


def _scores(sources, hyps, refsets, normalize: bool) -> dict:
    m2 = m2_score(sources, hyps, refsets, normalize=normalize)
    first = [r[0] for r in refsets]
    if normalize:
        hyps = [normalize_tokens(h) for h in hyps]
        first = [normalize_tokens(r) for r in first]
    report = m2.percent()
    report["BLEU"] = round(bleu_corpus(hyps, first), 2)
    report["matched"], report["system"], report["gold"] = m2.matched, m2.system_count, m2.gold_count
    return report


def cmd_evaluate(cfg: PipelineConfig, sources: Sequence[Sequence[str]],
                 hypotheses: Mapping[str, Sequence[Sequence[str]]],
                 references: Mapping[str, Sequence[Sequence[Sequence[str]]]]) -> dict:
    """M2 and BLEU per target and pooled over targets.

    ``references[t]`` is a list of reference files, each a list of sentences.
    BLEU uses the first reference file.
    """
    report = {}
    all_src, all_hyp, all_refs = [], [], []
    for tag in hypotheses:
        if tag not in references:
            raise ValueError(f"no references for target {tag}")
        hyps = hypotheses[tag]
        files = references[tag]
        refsets = [list(r) for r in zip(*files)] if files else []
        if not (len(sources) == len(hyps) == len(refsets)) or any(len(f) != len(sources) for f in files):
            raise LengthMismatch(f"target {tag}: {len(sources)} sources, {len(hyps)} hypotheses, "
                                 f"reference lengths {[len(f) for f in files]}")
        report[tag] = _scores(sources, hyps, refsets, cfg.normalize)
        all_src += list(sources)
        all_hyp += list(hyps)
        all_refs += refsets
    if report:
        report["overall"] = _scores(all_src, all_hyp, all_refs, cfg.normalize)
    return report


def filter_pool(pool: Sequence[tuple[str, Sequence[str]]]) -> list[tuple[str, list[str]]]:
    """Keep pairs whose source-language side mentions a first or second person pronoun."""
    return [(src, list(tgt)) for src, tgt in pool if PRONOUNS.search(src)]


def cmd_augment(cfg: PipelineConfig, pool: Sequence[tuple[str, Sequence[str]]],
                system: Optional[GenderRewriter] = None) -> tuple[Corpus, Corpus]:
    """Generate four renderings for each retained pool sentence.

    Returns (augmented training corpus, new examples only). Labels on the
    generated examples are re-derived with ``extend_annotations``; examples
    whose labels still disagree with their renderings are dropped.
    """
    system = system or load_system(cfg)
    table = load_enclitic_table(cfg.path(cfg.enclitic_table))
    new = []
    for index, (_, words) in enumerate(filter_pool(pool)):
        labels = system.gid.predict(words)
        source = tuple(Token(w, l.coarse()) for w, l in zip(words, labels))
        targets = {}
        for target in TARGETS:
            out, _ = system.rewrite(words, target, labels)
            targets[target] = tuple(Token(w, required_word_target(l, target).coarse())
                                    for w, l in zip(out, labels))
        example = ParallelExample(source, targets)
        check_alignment(example, index)  # raises AlignmentError naming the pool sentence
        example = extend_annotations(example, table)
        if label_violations(example):
            log.warning("augment: dropping pool sentence %d, labels inconsistent after re-annotation", index)
            continue
        new.append(example)
    base = load_training_corpus(cfg).examples if cfg.corpus_dir is not None else []
    return Corpus(list(base) + new, cfg.train_split), Corpus(new, "augmented")


def cmd_post_edit(cfg: PipelineConfig, mt: Sequence[Sequence[str]],
                  references: Optional[Mapping[str, Sequence[Sequence[str]]]] = None,
                  system: Optional[GenderRewriter] = None) -> tuple[dict, dict]:
    """Re-target MT output to all four contexts.

    Returns ({target: outputs}, {target: {"mt": BLEU, "post_edited": BLEU}});
    BLEU is computed in the normalized space and only for targets with references.
    """
    system = system or load_system(cfg)
    outputs = {}
    for target in TARGETS:
        outputs[str(target)], _ = cmd_rewrite(cfg, mt, target, system=system)
    table = {}
    for tag, refs in (references or {}).items():
        tag = str(parse_target(tag))
        refs = [normalize_tokens(r) for r in refs]
        table[tag] = {
            "mt": round(bleu_corpus([normalize_tokens(s) for s in mt], refs), 2),
            "post_edited": round(bleu_corpus([normalize_tokens(s) for s in outputs[tag]], refs), 2),
        }
    return outputs, table


# --- argument handling -------------------------------------------------------

def _target_files(items: Optional[Sequence[str]]) -> dict[str, list[Path]]:
    """Parse repeated ``TARGET=PATH`` options; a target may repeat for several references."""
    out: dict[str, list[Path]] = {}
    for item in items or []:
        tag, sep, path = item.partition("=")
        if not sep:
            raise ValueError(f"expected TARGET=PATH, got {item!r}")
        out.setdefault(str(parse_target(tag)), []).append(Path(path))
    return out


def _read_pool(path) -> list[tuple[str, list[str]]]:
    pool = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            src, sep, tgt = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'source<TAB>target'")
            pool.append((src, tgt.split()))
    return pool


def _apply_overrides(cfg: PipelineConfig, args) -> PipelineConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.normalize is not None:
        cfg.normalize = args.normalize
    if getattr(args, "model_dir", None):
        cfg.model_dir = str(Path(args.model_dir).resolve())
    if getattr(args, "corpus", None):
        cfg.corpus_dir = str(Path(args.corpus).resolve())
    return cfg


def _print(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, indent=2))


class _Parser(argparse.ArgumentParser):
    """Usage errors also follow the one-line JSON error contract."""

    def error(self, message):
        print(json.dumps({"error": "UsageError", "message": f"{self.prog}: {message}"}, ensure_ascii=False),
              file=sys.stderr)
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--config", help="INI configuration file")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None,
                        help="evaluate in the Alif/Ya/Ta-Marbuta normalized space")
    shared.add_argument("--model-dir", help="overrides general.model_dir")
    shared.add_argument("--corpus", help="overrides corpus.dir")
    shared.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="gender-rewrite", description="Arabic gender rewriting pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("train", parents=[shared], help="train GID, CorpusR, NeuralR and the LM")

    r = sub.add_parser("rewrite", parents=[shared], help="rewrite sentences toward a target")
    r.add_argument("--target", required=True, choices=[str(t) for t in TARGETS])
    r.add_argument("--input", required=True)
    r.add_argument("--output", help="defaults to stdout")
    r.add_argument("--trace", help="write one JSON trace per sentence to this file")

    e = sub.add_parser("evaluate", parents=[shared], help="M2 and BLEU scores")
    e.add_argument("--source", required=True)
    e.add_argument("--hyp", action="append", required=True, metavar="TARGET=PATH")
    e.add_argument("--ref", action="append", required=True, metavar="TARGET=PATH",
                   help="repeat a target for several references")
    e.add_argument("--target", choices=[str(t) for t in TARGETS], help="only score this target")

    a = sub.add_parser("augment", parents=[shared], help="grow the training corpus from a sentence pool")
    a.add_argument("--pool", required=True, help="TSV: source-language sentence<TAB>tokenized Arabic")
    a.add_argument("--output-dir", required=True)

    pe = sub.add_parser("post-edit", parents=[shared], help="re-target MT output to the four contexts")
    pe.add_argument("--input", required=True)
    pe.add_argument("--output-dir", required=True)
    pe.add_argument("--ref", action="append", metavar="TARGET=PATH")
    pe.add_argument("--target", choices=[str(t) for t in TARGETS], help="only this target")

    s = sub.add_parser("stats", parents=[shared], help="corpus statistics for a split")
    s.add_argument("--split", default=None)
    return p


def run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if args.command == "train":
        _print(cmd_train(cfg))
    elif args.command == "rewrite":
        sentences = read_sentences(args.input)
        outputs, traces = cmd_rewrite(cfg, sentences, parse_target(args.target), emit_trace=bool(args.trace))
        if args.output:
            write_sentences(args.output, outputs)
        else:
            for out in outputs:
                print(" ".join(out))
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as f:
                for t in traces:
                    f.write(t.to_json() + "\n")
    elif args.command == "evaluate":
        hyps = {k: read_sentences(v[-1]) for k, v in _target_files(args.hyp).items()}
        refs = {k: [read_sentences(p) for p in v] for k, v in _target_files(args.ref).items()}
        if args.target:
            hyps = {args.target: hyps[args.target]}
        _print(cmd_evaluate(cfg, read_sentences(args.source), hyps, refs))
    elif args.command == "augment":
        full, new = cmd_augment(cfg, _read_pool(args.pool))
        write_corpus(full, args.output_dir)
        _print({"added": len(new), "total": len(full), "output_dir": args.output_dir})
    elif args.command == "post-edit":
        refs = {k: read_sentences(v[0]) for k, v in _target_files(args.ref).items()}
        if args.target:
            refs = {k: v for k, v in refs.items() if k == args.target}
        outputs, table = cmd_post_edit(cfg, read_sentences(args.input), refs)
        out_dir = Path(args.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for tag, sents in outputs.items():
            if args.target and tag != args.target:
                continue
            write_sentences(out_dir / f"{parse_target(tag).file_tag}.txt", sents)
        _print({"bleu": table})
    elif args.command == "stats":
        _print(corpus_stats(load_training_corpus(cfg, args.split)).to_dict())
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except Exception as e:
        err = {"error": type(e).__name__, "message": str(e)}
        if isinstance(e, ComponentError):
            err["component"] = e.component
        print(json.dumps(err, ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
