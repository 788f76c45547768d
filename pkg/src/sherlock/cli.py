"""Command-line entry points: build-vocab, train, eval, scan, serve, stats."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .checkpoint import load_model, save_model
from .dataset import imbalance_stats, load_corpus
from .errors import SherlockError
from .metrics import format_benchmark, format_report
from .model import HEAD_NAMES, Hyperparams, predict
from .service import DEFAULT_HOST, DEFAULT_MAX_REQUEST_BYTES, DEFAULT_PORT, make_server, serve_forever
from .tokenizer import DEFAULT_TOP_K, Vocabulary, build_vocabulary, lex
from .training import HOLDOUT, KFOLD, SplitSpec, TrainConfig, encode_corpus, evaluate_model, split, train

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

MODEL_ENV_VAR = "SHERLOCK_MODEL"

# Config-file keys that feed Hyperparams, with their types.
_HP_KEYS = {
    "max_len": int, "embed_dim": int, "conv_filters": int, "kernel_size": int,
    "dense1": int, "dense2": int, "dropout_rate": float, "learning_rate": float,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's default 2
        raise _UsageError(message)


def load_config(path: str | Path) -> dict[str, str]:
    """Parse a simple key=value config file ('#' starts a comment)."""
    config: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise _UsageError(f"config line {line_no} is not key=value: {line!r}")
        config[key.strip()] = value.strip()
    return config


def _build_parser() -> _Parser:
    parser = _Parser(prog="sherlock", description="Function-level C/C++ vulnerability scanner")
    parser.add_argument("--seed", type=int, default=0, help="seed for vocabulary, splits and training")
    parser.add_argument("--config", type=Path, help="key=value config file")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build-vocab", help="build a vocabulary from a corpus")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--top-k", type=int, default=None)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--kfold", action="store_true", help="5-fold cross-validation instead of the 80/10/10 holdout")
    p.add_argument("--history", type=Path, help="write per-epoch records to this NDJSON file")

    p = sub.add_parser("eval", help="evaluate a model on a labelled corpus")
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--export", type=Path, help="write per-head metrics to this NDJSON file")

    p = sub.add_parser("scan", help="score one source file (or stdin)")
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--file", type=Path, help="source file; stdin when omitted")

    p = sub.add_parser("serve", help="run the HTTP scan service")
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--max-bytes", type=int, default=None)

    p = sub.add_parser("stats", help="per-head class-imbalance statistics of a corpus")
    p.add_argument("--data", type=Path, required=True)

    return parser


def _load_records(path: Path):
    report = load_corpus(path)
    if report.errors:
        print(f"warning: skipped {len(report.errors)} malformed line(s), "
              f"first at line {report.errors[0].line_no}", file=sys.stderr)
    return report.records


def _model_path(args) -> Path:
    if args.model is not None:
        return args.model
    env = os.environ.get(MODEL_ENV_VAR)
    if env:
        return Path(env)
    raise _UsageError(f"no model given: pass --model or set {MODEL_ENV_VAR}")


def _hyperparams(config: dict[str, str], vocab_size: int) -> Hyperparams:
    kwargs = {key: cast(config[key]) for key, cast in _HP_KEYS.items() if key in config}
    return Hyperparams(vocab_size=vocab_size, **kwargs)


def _cmd_build_vocab(args, config) -> int:
    records = _load_records(args.data)
    top_k = args.top_k if args.top_k is not None else int(config.get("top_k", DEFAULT_TOP_K))
    vocab = build_vocabulary((lex(r.code) for r in records), top_k=top_k)
    vocab.save(args.out)
    print(f"vocabulary of {vocab.size} ids written to {args.out}")
    return EXIT_OK


def _cmd_train(args, config) -> int:
    records = _load_records(args.data)
    vocab = Vocabulary.load(args.vocab)
    hp = _hyperparams(config, vocab.size)
    samples = encode_corpus(records, vocab, hp.max_len)
    train_config = TrainConfig(
        hp=hp,
        epochs=args.epochs if args.epochs is not None else int(config.get("epochs", 10)),
        batch_size=args.batch_size if args.batch_size is not None else int(config.get("batch_size", 128)),
        seed=args.seed,
    )
    spec = SplitSpec(mode=KFOLD if args.kfold else HOLDOUT,
                     seed=args.seed, k=int(config.get("kfold_k", 5)))
    model, history = train(samples, train_config, spec)
    save_model(model, vocab, args.out)
    if args.history:
        history.to_jsonl(args.history)
    if spec.mode == KFOLD and history.mean_val_metrics is not None:
        print("mean validation metrics across folds:")
        for row in history.mean_val_metrics:
            auc = "-" if row["auc"] is None else f"{row['auc']:.2f}"
            print(f"  {row['cwe']:<10} acc {row['accuracy']:.2f}  p {row['precision']:.2f}  "
                  f"r {row['recall']:.2f}  f1 {row['f1']:.2f}  auc {auc}")
    else:
        best = min(history.epochs, key=lambda r: r.val_loss)
        print(f"best epoch {best.epoch}: validation loss {best.val_loss:.4f}")
        print(format_report(best.val_metrics))
    print(f"model written to {args.out}")
    return EXIT_OK


def _cmd_eval(args, config) -> int:
    model, vocab = load_model(_model_path(args))
    records = _load_records(args.data)
    samples = encode_corpus(records, vocab, model.hp.max_len)
    report = evaluate_model(model, samples)
    print(format_report(report))
    if args.export:
        from .metrics import export_jsonl
        export_jsonl(report, args.export)
    if "baseline_name" in config:
        ours = report.heads[0]  # CWE-119, the benchmarked head
        rows = [
            (config["baseline_name"], float(config["baseline_precision"]),
             float(config["baseline_recall"]), float(config["baseline_f1"])),
            ("Sherlock (ours)", ours.precision, ours.recall, ours.f1),
        ]
        print()
        print(format_benchmark(rows))
    return EXIT_OK


def _cmd_scan(args, config) -> int:
    model, vocab = load_model(_model_path(args))
    source = args.file.read_bytes() if args.file else sys.stdin.read()
    result = predict(model, source, vocab)
    for name in HEAD_NAMES:
        print(f"{name}\t{result.probabilities[name]:.4f}")
    print(f"tokens\t{result.token_count}")
    return EXIT_OK


def _cmd_serve(args, config) -> int:
    model, vocab = load_model(_model_path(args))
    server = make_server(
        model, vocab,
        host=args.host or config.get("host", DEFAULT_HOST),
        port=args.port if args.port is not None else int(config.get("port", DEFAULT_PORT)),
        max_request_bytes=args.max_bytes if args.max_bytes is not None
        else int(config.get("max_request_bytes", DEFAULT_MAX_REQUEST_BYTES)),
    )
    serve_forever(server)
    return EXIT_OK


def _cmd_stats(args, config) -> int:
    records = _load_records(args.data)
    stats = imbalance_stats(records)
    print(f"{'Head':<12}{'Positives':>10}{'Total':>8}{'Rate':>9}")
    for head in stats.heads:
        print(f"{head.name:<12}{head.positives:>10}{head.total:>8}{head.rate:>9.4f}")
    if stats.low_support:
        print(f"under 1% positive: {', '.join(stats.low_support)}")
    return EXIT_OK


_COMMANDS = {
    "build-vocab": _cmd_build_vocab,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "scan": _cmd_scan,
    "serve": _cmd_serve,
    "stats": _cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        config = load_config(args.config) if args.config else {}
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SherlockError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
