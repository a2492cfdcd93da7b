"""Command-line entry point: ``walkre {train,eval,predict,gen-data,gradcheck}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from .classifier import read_decisions, write_decisions
from .config import PRESET_NAMES, TrainConfig, coerce, format_cfg, load_config
from .dataset import CorpusFormatError, build_vocab, parse_corpus, write_corpus
from .embeddings import load_pretrained
from .evaluation import (
    approx_randomization,
    breakdown_by_entity_count,
    format_report,
    gold_decisions,
    micro_prf,
    report_dict,
    report_json,
)
from .gradcheck import DIMS, run_gradcheck
from .numerics import DivergenceError
from .synthetic import GeneratorConfigError, generate_synthetic, load_generator_config
from .training import load_checkpoint, save_checkpoint, train

logger = logging.getLogger("walkre")


class UsageError(Exception):
    """A problem with the invocation rather than with the code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one-line diagnostic, exit status 2
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model configuration (overrides the config file)")
    for f in fields(TrainConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            group.add_argument(flag, dest=f.name, metavar="BOOL", default=None)
        else:
            kind = {"int": int, "float": float}[f.type]
            group.add_argument(flag, dest=f.name, type=kind, default=None)


def _resolve_config(args) -> TrainConfig:
    overrides = {}
    for f in fields(TrainConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if f.type == "bool":
            value = coerce(f.name, value)
        overrides[f.name] = value
    return load_config(args.config, overrides)


def _require(path: str | None, what: str) -> Path:
    if path is None:
        raise UsageError(f"{what} is required")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _read_any_decisions(path: Path):
    """Decisions from a decision file, or the gold relations of a corpus file."""
    with open(path, encoding="utf-8") as fh:
        first = next((line for line in fh if line.strip()), "")
    if first and "tokens" in json.loads(first):
        return gold_decisions(parse_corpus(path))
    return set(read_decisions(path))


# ---------------------------------------------------------------------------
# subcommands


def cmd_train(args) -> int:
    config = _resolve_config(args)
    if args.print_config:
        sys.stdout.write(format_cfg(config.to_dict()))
        return 0
    train_path = _require(args.train, "--train")
    dev_path = _require(args.dev, "--dev")
    if args.out is None:
        raise UsageError("--out is required")
    train_c, dev_c = parse_corpus(train_path), parse_corpus(dev_path)
    relation_types = args.relation_types.split(",") if args.relation_types else None
    vocab = build_vocab(train_c, relation_types=relation_types)
    vectors = None
    if args.vectors:
        vectors, coverage = load_pretrained(_require(args.vectors, "--vectors"), vocab, config.n_w, np.random.default_rng(config.seed))
        logger.info("pretrained coverage %.3f", coverage)
    log_path = Path(args.log) if args.log else Path(str(args.out) + ".log")
    with open(log_path, "w", encoding="utf-8") as log:
        def on_epoch(record):
            log.write(record.line() + "\n")
            log.flush()
            if not args.quiet:
                print(record.line(), flush=True)

        result = train(train_c, dev_c, config, vocab=vocab, word_vectors=vectors, on_epoch=on_epoch)
        log.write(f"best epoch {result.best_epoch} dev F1 {result.best_f1:.4f}\n")
    save_checkpoint(result.model, args.out)
    print(f"best epoch {result.best_epoch} dev F1 {result.best_f1:.4f}; checkpoint written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    gold = _read_any_decisions(_require(args.gold, "--gold"))
    pred = _read_any_decisions(_require(args.pred, "--pred"))
    breakdown = None
    if args.corpus:
        breakdown = breakdown_by_entity_count(gold, pred, parse_corpus(_require(args.corpus, "--corpus")))
    p_value = None
    if args.compare:
        other = _read_any_decisions(_require(args.compare, "--compare"))
        p_value = approx_randomization(pred, other, gold, iterations=args.iterations, seed=args.seed)
    report = report_dict(micro_prf(gold, pred), breakdown, p_value)
    print(report_json(report) if args.json else format_report(report))
    return 0


def cmd_predict(args) -> int:
    model = load_checkpoint(_require(args.checkpoint, "--checkpoint"))
    corpus = parse_corpus(_require(args.corpus, "--corpus"))
    if args.out is None:
        raise UsageError("--out is required")
    write_decisions(model.predict(corpus), args.out)
    return 0


def cmd_gen_data(args) -> int:
    source = args.generator
    if source not in ("default", "two_hop"):
        _require(source, "--generator")
    config = load_generator_config(source)
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    write_corpus(generate_synthetic(config, args.n, seed=args.seed), args.out)
    return 0


def cmd_gradcheck(args) -> int:
    start = time.perf_counter()
    report = run_gradcheck(seed=args.seed, dims=args.dims, h=args.h)
    elapsed = time.perf_counter() - start
    worst = max(report.worst, key=report.worst.get)
    status = "PASS" if report.passed(args.tolerance) else "FAIL"
    print(
        f"{status} worst relative error {report.max_error:.3e} ({worst}) "
        f"over {report.checked} entries in {elapsed:.1f}s (tolerance {args.tolerance:g})"
    )
    return 0 if status == "PASS" else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="walkre", description="Walk-based relation extraction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--config", default="l4", help=f"config file or preset name ({', '.join(PRESET_NAMES)})")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--log", help="epoch log path (default: <out>.log)")
    p.add_argument("--vectors", help="pretrained word vectors, one 'word v1 ... vN' per line")
    p.add_argument("--relation-types", help="comma-separated relation inventory (default: from the training corpus)")
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("--quiet", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--gold", help="gold corpus or decision file")
    p.add_argument("--pred", help="decision file")
    p.add_argument("--corpus", help="corpus for the breakdown by entity count")
    p.add_argument("--compare", help="second decision file for the randomization test")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="write relation decisions for a corpus")
    p.add_argument("--checkpoint")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gen-data", help="write a synthetic corpus")
    p.add_argument("--generator", default="default", help="generator config path, or 'default' / 'two_hop'")
    p.add_argument("--n", type=int, default=100, help="number of sentences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("gradcheck", help="finite-difference check of every parameter gradient")
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--dims", choices=sorted(DIMS), default="tiny")
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, CorpusFormatError, GeneratorConfigError, DivergenceError, OSError, ValueError) as exc:
        print(f"walkre {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
