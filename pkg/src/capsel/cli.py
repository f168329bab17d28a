"""Command-line interface: ``capsel <command> [options]``.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
unreadable or invalid data.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from . import experiments, io, simulation
from .model import ConfigError, DataError, SolverConfig, accuracy

EXIT_USAGE = 2
EXIT_DATA = 3

SIMULATE_COLUMNS = ("n_features", "error_rate", "stderr")


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _label_col(text: str):
    if text.lower() == "none":
        return None
    return int(text) if text.lstrip("-").isdigit() else text


def _train_size(text: str):
    v = float(text)
    return v if 0.0 < v < 1.0 else int(v)


def _fmt(v) -> str:
    # repr keeps every significant digit of a float
    return repr(v) if isinstance(v, float) else str(v)


def _write_csv(rows, header, out) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if out:
            fh.close()


def _config(args) -> SolverConfig:
    return SolverConfig(args.k, max_iters=args.iters)


def _load(args):
    F, labels = io.load_dataset(args.dataset, args.label_col)
    if labels is None:
        raise DataError("this command needs a label column")
    return F, labels


def cmd_train(args) -> int:
    F, labels = _load(args)
    k = F.n_features if args.k is None else args.k
    config = SolverConfig(k, max_iters=args.iters)
    model, report = experiments.train_method(args.method, F, labels, config, args.p0, args.p1,
                                             args.theta)
    io.save_model(args.out, model, args.method, F.names())
    print(json.dumps(report.to_dict(), indent=1))
    return 0


def cmd_predict(args) -> int:
    model, _ = io.load_model(args.model)
    # labels are optional: fall back to reading every column as a feature
    try:
        F, labels = io.load_dataset(args.dataset, args.label_col)
    except DataError:
        F = None
    if F is None or F.n_features != model.n_features:
        F, labels = io.load_dataset(args.dataset, None)
    if F.n_features != model.n_features:
        raise DataError(f"model expects {model.n_features} features, file has {F.n_features} columns")
    pred = model.predict(F.values)
    _write_csv(((i, int(p)) for i, p in enumerate(pred)), ("row", "prediction"), args.out)
    if labels is not None:
        print(f"accuracy {_fmt(accuracy(pred, labels.labels))}", file=sys.stderr)
    return 0


def cmd_select(args) -> int:
    F, labels = _load(args)
    model, report = experiments.train_method("ours", F, labels, _config(args), args.p0, args.p1,
                                             args.theta)
    rows = []
    for c, feats in report.selected.items():
        rows.extend((c, f["index"], f["name"], f["weight"]) for f in feats)
    _write_csv(rows, ("class", "index", "name", "weight"), args.out)
    return 0


def cmd_sweep_k(args) -> int:
    F, labels = _load(args)
    if args.k_list:
        k_list = args.k_list
    elif args.k is not None:
        k_list = [args.k]
    else:
        k_list = list(range(1, F.n_features + 1))
    rows = experiments.sweep_k(F, labels, k_list, args.repeats, args.seed, args.train_size,
                               args.p0, args.p1, args.theta, args.iters)
    _write_csv(rows, ("k", "mean_accuracy", "std_accuracy", "mean_iterations"), args.out)
    return 0


def cmd_stability(args) -> int:
    F, labels = _load(args)
    size = args.subsample_size or F.n_samples // 2
    rows = experiments.selection_stability(F, labels, args.k, args.repeats, size, args.seed,
                                           args.p0, args.p1, args.iters)
    _write_csv(rows, ("class", "index", "name", "frequency"), args.out)
    return 0


def cmd_simulate(args) -> int:
    spec = simulation.SimulationSpec(
        n_features=1, p0=args.p0, p1=args.p1, sigma0=args.sigma0, sigma1=args.sigma1,
        n_samples=args.samples, theta=args.theta if args.theta is not None else 0.25, seed=args.seed,
    )
    rows = simulation.error_curve(spec, args.n_features)
    _write_csv(rows, SIMULATE_COLUMNS, args.out)
    return 0


def cmd_compare(args) -> int:
    F, labels = _load(args)
    rows = experiments.compare(F, labels, args.k, args.repeats, args.seed, args.train_size,
                               args.p0, args.p1, args.theta, args.iters)
    _write_csv(rows, ("method", "mean_test_accuracy", "std_test_accuracy",
                      "mean_train_accuracy", "mean_train_seconds"), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capsel", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, k_required=True, seeded=False, dataset=True, out_help="output path (default: stdout)"):
        if dataset:
            sp.add_argument("dataset", help="CSV file, one row per sample")
            sp.add_argument("--label-col", type=_label_col, default=-1,
                            help="label column name or index (default: last)")
            sp.add_argument("--k", type=int, required=k_required, help="number of features to average")
            sp.add_argument("--iters", type=int, default=100,
                            help="solver iterations (AdaBoost: rounds)")
        sp.add_argument("--p0", type=float, default=0.0, help="target score for negatives")
        sp.add_argument("--p1", type=float, default=0.5, help="target score for positives")
        sp.add_argument("--theta", type=float, help="decision threshold (default: (p0+p1)/2)")
        sp.add_argument("--out", required=out_help is None, help=out_help or "file to write")
        if seeded:
            sp.add_argument("--seed", type=int, required=True, help="random seed (required)")
        if seeded and dataset:
            sp.add_argument("--repeats", type=int, default=10, help="random splits (default 10)")

    sp = sub.add_parser("train", help="fit a model and write it as JSON")
    common(sp, k_required=False, out_help=None)
    sp.add_argument("--method", default="ours", help=f"one of {', '.join(experiments.METHODS)}")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="apply a saved model to a CSV file")
    sp.add_argument("model", help="model file written by 'train'")
    sp.add_argument("dataset", help="CSV file; a label column is optional")
    sp.add_argument("--label-col", type=_label_col, default=-1,
                    help="label column name or index (default: last)")
    sp.add_argument("--out", help="predictions CSV (default: stdout)")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("select", help="list the features chosen by the solver")
    common(sp)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("sweep-k", help="held-out accuracy for a range of k")
    common(sp, k_required=False, seeded=True)
    sp.add_argument("--k-list", type=_int_list, help="comma-separated k values (default 1..n)")
    sp.add_argument("--train-size", type=_train_size, default=0.5,
                    help="training rows per split, as a count or a fraction (default 0.5)")
    sp.set_defaults(func=cmd_sweep_k)

    sp = sub.add_parser("stability", help="selection frequency over random subsamples")
    common(sp, seeded=True)
    sp.add_argument("--subsample-size", type=int, help="rows per subsample (default: half)")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("simulate", help="error rate of uniform averages of simulated features")
    common(sp, k_required=False, seeded=True, dataset=False)
    sp.set_defaults(func=cmd_simulate, p0=0.05)
    sp.add_argument("--n-features", type=_int_list, default=[1, 2, 5, 10, 20, 50, 100],
                    help="comma-separated ensemble sizes")
    sp.add_argument("--sigma0", type=float, default=0.2, help="negative-class feature spread")
    sp.add_argument("--sigma1", type=float, default=0.2, help="positive-class feature spread")
    sp.add_argument("--samples", type=int, default=10_000, help="samples per class")

    sp = sub.add_parser("compare", help="accuracy and time of all methods on shared splits")
    common(sp, seeded=True)
    sp.add_argument("--train-size", type=_train_size, default=0.5,
                    help="training rows per split, as a count or a fraction (default 0.5)")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"capsel: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print(f"capsel: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
