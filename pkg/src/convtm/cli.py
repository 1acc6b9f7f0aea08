"""Command-line entry point: ``convtm {train,eval,export,gen-xor,binarize}``.

Datasets come from IDX files (grey-scale images are binarized on the fly),
from a binary dataset cache written by ``binarize``, or from the built-in
2D Noisy XOR generator.  Hyperparameters may be collected in a JSON config
file; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .automata import Hyperparams
from .binarize import adaptive_gaussian_binarize, generate_noisy_xor
from .classifier import EpochMetrics, MulticlassModel
from .data_io import (FormatError, export_dataset_binary, import_dataset_binary, load_idx_dataset,
                      load_idx_images, load_idx_labels, load_model, save_model, write_idx)
from .interpret import export_report

logger = logging.getLogger("convtm")

# Flag destination -> default.  Only these keys are accepted in a config file.
HYPER_DEFAULTS = {
    "clauses": 40,
    "threshold": None,  # None: round(1.25 * clauses)
    "specificity": 3.9,
    "states": 128,
    "filter": None,     # None: classic TM over the whole image
    "stride": 1,
    "epochs": 1,
    "seed": 0,
    "weighting": False,
    "boost": False,
}
DATA_KEYS = ("xor", "train_images", "train_labels", "test_images", "test_labels",
             "train_cache", "test_cache", "binarize", "window", "offset", "classes")
CONFIG_KEYS = set(HYPER_DEFAULTS) | set(DATA_KEYS) | {"workers", "model", "metrics", "eval_train"}

XOR_FILES = ("train-images.idx", "train-labels.idx", "test-images.idx", "test-labels.idx")


class CliError(Exception):
    """Bad configuration or unreadable input; reported without a traceback."""


def _default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def default_threshold(clauses: int) -> int:
    return max(1, round(1.25 * clauses))


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--clauses", type=int, help="clauses per class, both polarities (default 40)")
    g.add_argument("--threshold", type=int, help="vote target T (default round(1.25 * clauses))")
    g.add_argument("--specificity", type=float, help="s (default 3.9)")
    g.add_argument("--states", type=int, help="states per action N (default 128)")
    g.add_argument("--filter", type=int, help="filter size W; omit for a classic TM")
    g.add_argument("--stride", type=int, help="convolution step d (default 1)")
    g.add_argument("--epochs", type=int, help="training epochs (default 1)")
    g.add_argument("--seed", type=int, help="RNG seed (default 0)")
    g.add_argument("--weighting", action=argparse.BooleanOptionalAction, default=None,
                   help="integer clause weights")
    g.add_argument("--boost", action=argparse.BooleanOptionalAction, default=None,
                   help="unconditional Type Ia increments")


def _add_data_flags(p: argparse.ArgumentParser, train: bool) -> None:
    g = p.add_argument_group("data")
    if train:
        g.add_argument("--xor", type=int, metavar="SEED", default=None,
                       help="generate 2D Noisy XOR data in memory with this seed")
        g.add_argument("--train-images")
        g.add_argument("--train-labels")
        g.add_argument("--train-cache", help="binary dataset cache with labels")
        g.add_argument("--classes", type=int, help="class count (default: max label + 1)")
    g.add_argument("--test-images")
    g.add_argument("--test-labels")
    g.add_argument("--test-cache")
    g.add_argument("--binarize", choices=("auto", "always", "never"), default=None,
                   help="threshold IDX images (auto: only if not already 0/1)")
    g.add_argument("--window", type=int, default=None, help="binarization window (default 11)")
    g.add_argument("--offset", type=float, default=None, help="binarization offset c (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convtm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write it to --model")
    p.add_argument("--config", help="JSON file with flag values")
    _add_hyper_flags(p)
    _add_data_flags(p, train=True)
    p.add_argument("--model", help="output model file")
    p.add_argument("--metrics", help="append per-epoch CSV here (default: stdout)")
    p.add_argument("--eval-train", action="store_true", default=None,
                   help="also measure training accuracy each epoch")
    p.add_argument("--workers", type=int, help="evaluation threads (default: all CPUs)")

    p = sub.add_parser("eval", help="accuracy and confusion matrix of a saved model")
    p.add_argument("--model", required=True)
    _add_data_flags(p, train=False)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("export", help="clause report of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--out", help="report path; .csv selects CSV (default: stdout)")
    _add_data_flags(p, train=False)

    p = sub.add_parser("gen-xor", help="write 2D Noisy XOR as IDX files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-train", type=int, default=2500)
    p.add_argument("--n-test", type=int, default=10000)
    p.add_argument("--noise", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("binarize", help="threshold IDX images into a dataset cache")
    p.add_argument("--images", required=True)
    p.add_argument("--labels")
    p.add_argument("--out", required=True, help="cache file, or .idx for IDX output")
    p.add_argument("--window", type=int, default=11)
    p.add_argument("--offset", type=float, default=2)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(HYPER_DEFAULTS)
    cfg.update(binarize="auto", window=11, offset=2.0, workers=_default_workers(), eval_train=False)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise CliError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - CONFIG_KEYS)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in CONFIG_KEYS and value is not None:
            cfg[key] = value
    return cfg


def hyperparams_from_config(cfg: dict, layers: int) -> Hyperparams:
    threshold = cfg["threshold"] if cfg["threshold"] is not None else default_threshold(cfg["clauses"])
    try:
        return Hyperparams(clauses=cfg["clauses"], threshold=threshold, specificity=cfg["specificity"],
                           states=cfg["states"], filter_size=cfg["filter"] or None, stride=cfg["stride"],
                           layers=layers, weighting=bool(cfg["weighting"]),
                           boost_true_positive=bool(cfg["boost"]), epochs=cfg["epochs"], seed=cfg["seed"])
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid hyperparameters: {exc}") from exc


def _as_bits(images: np.ndarray, cfg: dict) -> np.ndarray:
    mode = cfg["binarize"]
    already = images.size == 0 or images.max() <= 1
    if mode == "never" or (mode == "auto" and already):
        if not already:
            raise CliError("images are not binary; use --binarize")
        return images.astype(np.uint8)
    return adaptive_gaussian_binarize(images, cfg["window"], cfg["offset"])


def _load_split(cfg: dict, prefix: str) -> Optional[tuple[np.ndarray, np.ndarray]]:
    cache = cfg.get(f"{prefix}_cache")
    images = cfg.get(f"{prefix}_images")
    labels = cfg.get(f"{prefix}_labels")
    try:
        if cache:
            X, y = import_dataset_binary(cache)
            if y is None:
                raise CliError(f"dataset cache {cache} has no labels")
            return X, y
        if images or labels:
            if not (images and labels):
                raise CliError(f"--{prefix}-images and --{prefix}-labels go together")
            X, y = load_idx_dataset(images, labels)
            return _as_bits(X, cfg), y
    except (OSError, FormatError) as exc:
        raise CliError(f"cannot load {prefix} data: {exc}") from exc
    return None


def _print_metrics(m: EpochMetrics, sink) -> None:
    sink.write(f"{m.epoch},{m.train_acc:.6f},{m.test_acc:.6f},{m.seconds:.3f}\n")
    sink.flush()


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if cfg.get("xor") is not None:
        ds = generate_noisy_xor(seed=cfg["xor"])
        train, test = (ds.X_train, ds.y_train), (ds.X_test, ds.y_test)
    else:
        train = _load_split(cfg, "train")
        test = _load_split(cfg, "test")
    if train is None:
        raise CliError("no training data: give --xor, --train-images/--train-labels or --train-cache")
    X, y = train
    if len(X) == 0:
        raise CliError("training set is empty")
    n_classes = cfg.get("classes") or max(2, int(np.max(y)) + 1)
    layers = X.shape[3] if X.ndim == 4 else 1
    params = hyperparams_from_config(cfg, layers)
    try:
        model = MulticlassModel(n_classes, X.shape[1:], params)
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    metrics_path = cfg.get("metrics")
    sink = open(metrics_path, "a") if metrics_path else sys.stdout
    try:
        if not metrics_path or sink.tell() == 0:
            sink.write("epoch,train_acc,test_acc,seconds\n")
        X_test, y_test = test if test is not None else (None, None)
        model.fit(X, y, X_test=X_test, y_test=y_test, eval_train=bool(cfg["eval_train"]),
                  workers=cfg["workers"], callback=lambda m: _print_metrics(m, sink))
    finally:
        if metrics_path:
            sink.close()
    if cfg.get("model"):
        save_model(model, cfg["model"])
        logger.info("model written to %s", cfg["model"])
    return 0


def _load_model_or_fail(path):
    try:
        return load_model(path)
    except (OSError, FormatError) as exc:
        raise CliError(f"cannot load model {path}: {exc}") from exc


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    model = _load_model_or_fail(args.model)
    test = _load_split(cfg, "test")
    if test is None:
        raise CliError("no test data: give --test-images/--test-labels or --test-cache")
    X, y = test
    if len(X) == 0:
        raise CliError("test set is empty")
    try:
        ev = model.evaluate(X, y, workers=cfg["workers"])
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    print(f"accuracy {ev.accuracy:.6f}")
    print("confusion (rows: true, columns: predicted)")
    for row in ev.confusion:
        print(" ".join(str(int(v)) for v in row))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    model = _load_model_or_fail(args.model)
    test = _load_split(cfg, "test")
    if args.top_k < 0:
        raise CliError("--top-k must be >= 0")
    try:
        text = export_report(model, args.top_k, args.out, None if test is None else test[0])
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_gen_xor(args: argparse.Namespace) -> int:
    try:
        ds = generate_noisy_xor(args.n_train, args.n_test, args.noise, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, arr in zip(XOR_FILES, (ds.X_train, ds.y_train, ds.X_test, ds.y_test)):
        write_idx(out / name, arr)
    return 0


def cmd_binarize(args: argparse.Namespace) -> int:
    try:
        images = load_idx_images(args.images)
        labels = load_idx_labels(args.labels) if args.labels else None
    except (OSError, FormatError) as exc:
        raise CliError(f"cannot load images: {exc}") from exc
    if labels is not None and len(labels) != len(images):
        raise CliError(f"{len(images)} images but {len(labels)} labels")
    try:
        bits = adaptive_gaussian_binarize(images, args.window, args.offset) if len(images) else images
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.out.endswith(".idx"):
        write_idx(args.out, bits)
    else:
        export_dataset_binary(bits, labels, args.out)
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "export": cmd_export,
            "gen-xor": cmd_gen_xor, "binarize": cmd_binarize}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"convtm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
