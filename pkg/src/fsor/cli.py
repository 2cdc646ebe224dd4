"""Command-line interface: ``fsor {select,trace,eval,synth}``.

Data goes to ``--output`` (or stdout); logs go to stderr, with verbosity from
the ``FSOR_LOG`` environment variable (``error``, ``info`` or ``debug``).

Exit codes: 0 success, 2 bad flags, 3 data errors, 4 non-convergence (the
result is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import baselines
from .dataset import DataError, Dataset, SynthSpec, load_csv, save_csv, synthesize, zscore
from .evalkit import SplitSpec, evaluate_ranking, load_ranking
from .gpi import GpiConfig
from .model import FsorConfig, fit
from .simplex_qp import AlmConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOT_CONVERGED = 0, 2, 3, 4

log = logging.getLogger("fsor")


class _DataFailure(Exception):
    pass


class _UsageFailure(Exception):
    pass


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "y", "on"):
        return True
    if value in ("0", "false", "no", "n", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _sizes(text: str) -> list:
    """Parse ``"1,2,5"``, ``"1-18"`` or mixtures; ``"all"`` is resolved later."""
    if text.strip().lower() == "all":
        return ["all"]
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(p) for p in part.split("-", 1))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("size list is empty")
    return out


def _label(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsor",
        description="Supervised feature selection by orthogonal regression "
                    "with simplex feature weights.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--output", "-o", help="output path (default: stdout)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", "-i", required=True, help="CSV, one sample per row")
    data.add_argument("--label", required=True, type=_label,
                      help="label column name or zero-based index")
    data.add_argument("--header", type=_bool, default=True, metavar="BOOL")
    data.add_argument("--normalize", type=_bool, default=False, metavar="BOOL",
                      help="z-score features (training statistics only in eval)")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--max-iter", type=_positive_int, default=100,
                        help="outer iteration cap")
    solver.add_argument("--tol", type=float, default=1e-6,
                        help="relative objective change for outer convergence")

    p = sub.add_parser("select", parents=[data, common, solver],
                       help="rank features and write the ranking")
    p.add_argument("--method", choices=("fsor", "fisher", "cc"), default="fsor")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("trace", parents=[data, common],
                       help="write the objective after each outer iteration")
    p.add_argument("--iters", type=_positive_int, default=100)

    p = sub.add_parser("eval", parents=[data, common, solver],
                       help="KNN accuracy of the top-m features over random splits")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ranking", help="JSON file with a 'ranking' integer array")
    src.add_argument("--method", choices=("fsor", "fisher", "cc"))
    p.add_argument("--sizes", type=_sizes, default=["all"],
                   help="feature counts, e.g. '1,2,5', '1-18' or 'all'")
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--knn", type=_positive_int, default=5)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--stratified", type=_bool, default=True, metavar="BOOL")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("synth", parents=[common],
                       help="write a synthetic dataset with planted informative features")
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--features", type=_positive_int, default=20)
    p.add_argument("--informative", type=_positive_int, default=4)
    p.add_argument("--classes", type=_positive_int, default=2)
    p.add_argument("--separation", type=float, default=5.0)
    p.add_argument("--noise", type=float, default=1.0)
    return parser


def _configure_logging():
    level = os.environ.get("FSOR_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(stream=sys.stderr, level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args, normalize=None) -> Dataset:
    try:
        ds = load_csv(args.input, args.label, args.header)
    except (DataError, OSError, UnicodeDecodeError) as exc:
        raise _DataFailure(str(exc)) from exc
    if args.normalize if normalize is None else normalize:
        ds = Dataset(zscore(ds.features)[0], ds.labels, ds.feature_names, ds.classes)
    return ds


def _fsor_config(args, max_iter: int, tol: float) -> FsorConfig:
    return FsorConfig(
        outer_max_iter=max_iter,
        outer_tol=tol,
        seed=args.seed,
        gpi=GpiConfig(max_iter=50, seed=args.seed),
        alm=AlmConfig(max_iter=200),
    )


def _fit(ds, config, **kwargs):
    try:
        return fit(ds, config, **kwargs)
    except ValueError as exc:
        raise _DataFailure(str(exc)) from exc


def _rank(ds, method, args):
    """Return (payload dict, converged flag) for a ranking method."""
    if method == "fsor":
        result = _fit(ds, _fsor_config(args, args.max_iter, args.tol))
        payload = result.to_dict()
        return payload, result.converged
    scorer = baselines.fisher_score if method == "fisher" else baselines.correlation_score
    return scorer(ds).to_dict(), True


def cmd_select(args) -> int:
    ds = _load(args)
    payload, converged = _rank(ds, args.method, args)
    if ds.feature_names is not None:
        payload["feature_names"] = list(ds.feature_names)
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        weights = payload.get("theta", payload.get("scores"))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rank", "feature", "name", "score"])
        for r, j in enumerate(payload["ranking"], start=1):
            name = ds.feature_names[j] if ds.feature_names else ""
            writer.writerow([r, j, name, repr(float(weights[j]))])
        text = buf.getvalue()
    _emit(text, args.output)
    if not converged:
        log.error("FSOR did not converge within %d outer iterations", args.max_iter)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_trace(args) -> int:
    ds = _load(args)
    # A fixed-length trace is what was asked for, so running out of
    # iterations is not reported as non-convergence here.
    result = _fit(ds, _fsor_config(args, args.iters, 1e-6), fixed_iterations=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iter", "objective"])
    for t, value in enumerate(result.objective_trace, start=1):
        writer.writerow([t, repr(float(value))])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    # KNN restandardizes from each training split, so it gets raw features.
    raw = _load(args, normalize=False)
    d = raw.n_features

    converged = True
    if args.ranking:
        try:
            ranking = load_ranking(args.ranking, d)
        except (OSError, ValueError) as exc:
            raise _DataFailure(f"bad ranking file: {exc}") from exc
    else:
        ranked = raw
        if args.normalize:
            ranked = Dataset(zscore(raw.features)[0], raw.labels, raw.feature_names)
        payload, converged = _rank(ranked, args.method, args)
        ranking = np.array(payload["ranking"])

    sizes = list(range(1, d + 1)) if args.sizes == ["all"] else args.sizes
    if min(sizes) < 1 or max(sizes) > d:
        raise _DataFailure(f"sizes must lie within 1..{d}")
    try:
        split = SplitSpec(args.train_fraction, args.trials, args.seed, args.stratified)
    except ValueError as exc:
        raise _UsageFailure(str(exc)) from exc
    report = evaluate_ranking(raw, ranking, sizes, split, args.knn, normalize=args.normalize)
    _emit(report.to_json() + "\n" if args.format == "json" else report.to_csv(), args.output)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def cmd_synth(args) -> int:
    spec = SynthSpec(args.samples, args.features, args.informative, args.classes,
                     args.separation, args.noise, args.seed)
    try:
        spec.validate()
    except DataError as exc:
        raise _UsageFailure(str(exc)) from exc
    ds = synthesize(spec)
    save_csv(ds, args.output or sys.stdout)
    truth = json.dumps({"informative": list(range(spec.n_informative))}) + "\n"
    # With the dataset on stdout the ground truth moves to stderr.
    (sys.stdout if args.output else sys.stderr).write(truth)
    return EXIT_OK


COMMANDS = {"select": cmd_select, "trace": cmd_trace, "eval": cmd_eval, "synth": cmd_synth}


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except _UsageFailure as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"fsor {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except _DataFailure as exc:
        sys.stderr.write(f"fsor {args.command}: data error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
