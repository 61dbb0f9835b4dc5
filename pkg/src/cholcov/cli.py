"""Command-line front end.

Subcommands:

* ``estimate``  -- fit one covariance estimator to a CSV data matrix;
* ``simulate``  -- run the Monte Carlo comparison and emit CSV + JSON;
* ``qda``       -- two-class QDA with leave-one-out error estimation.

Exit codes: 0 success, 2 input/parse problems, 3 estimator failures.
Numbers are written with 17 significant digits so a written matrix reads
back to within round-off.  All commands are deterministic under a fixed
--seed; --threads only changes wall time.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import estimators as est_mod
from . import qda as qda_mod
from . import selection as sel_mod
from . import simulation as sim_mod
from .errors import CholcovError, ParseError, ShapeError
from .estimators import EstimatorSpec

DEFAULT_SEED = 20080517


def _fmt(value, digits=17):
    if value is None:
        return ""
    return format(float(value), f".{digits}g")


def _read_matrix_csv(path, no_header=False):
    try:
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ShapeError(f"{path}: file is empty")
    start = 0
    if not no_header:
        try:
            [float(v) for v in lines[0].split(",")]
        except ValueError:
            start = 1  # first row is a header
    rows = []
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        parts = line.split(",")
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise ShapeError(
                f"{path}: line {lineno} has {len(parts)} fields, expected {width}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from exc
    if not rows:
        raise ShapeError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _write_matrix_csv(path, matrix, digits=17):
    with open(path, "w") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(_fmt(v, digits) for v in row))
            fh.write("\n")


def _load_config(path):
    """Flat key=value file; '#' starts a comment."""
    opts = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            opts[key.strip().replace("-", "_")] = value.strip()
    return opts


def _apply_config(args, parser_defaults):
    if not getattr(args, "config", None):
        return args
    opts = _load_config(args.config)
    for key, raw in opts.items():
        if not hasattr(args, key):
            raise ParseError(f"unknown config key {key!r}")
        # flags explicitly given on the command line win over the file
        if getattr(args, key) != parser_defaults.get(key):
            continue
        current = parser_defaults.get(key)
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int) and not isinstance(current, bool):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        else:
            value = raw
        setattr(args, key, value)
    return args


def cmd_estimate(args):
    raw = _read_matrix_csv(args.input, no_header=args.no_header)
    data = est_mod.center(raw)
    method = args.method
    sidecar = None
    if args.auto:
        if method in ("chol_banding", "sample_banding", "inv_chol_banding"):
            res = sel_mod.select_band_random_split(data, method, seed=args.seed)
            spec = EstimatorSpec(method, k=int(res.selected))
            sidecar = {"method": method, "selected_k": int(res.selected),
                       "criterion": [float(v) for v in res.criterion],
                       "candidates": [int(v) for v in res.candidates]}
        elif method in ("lasso_chol", "nested_lasso_chol"):
            res = sel_mod.select_lambda_random_split(data, method, seed=args.seed)
            spec = EstimatorSpec(method, lam=float(res.selected))
            sidecar = {"method": method, "selected_lambda": float(res.selected),
                       "criterion": [float(v) for v in res.criterion],
                       "candidates": [float(v) for v in res.candidates]}
        else:
            spec = EstimatorSpec(method)
    else:
        kwargs = {}
        if method in ("chol_banding", "sample_banding", "inv_chol_banding"):
            if args.k is None:
                raise ParseError(f"--k is required for {method} (or use --auto)")
            kwargs["k"] = args.k
        if method in ("lasso_chol", "nested_lasso_chol"):
            if args.lam is None:
                raise ParseError(f"--lambda is required for {method} (or use --auto)")
            kwargs["lam"] = args.lam
        spec = EstimatorSpec(method, **kwargs)
    estimate = est_mod.fit(data, spec)
    _write_matrix_csv(args.out, estimate.sigma, digits=args.digits)
    if sidecar is not None:
        with open(args.out + ".meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_simulate(args):
    p_list = tuple(int(v) for v in args.p.split(","))
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in est_mod.METHODS:
            raise ParseError(f"unknown method {m!r}")
    cfg = sim_mod.ExperimentConfig(
        model_kind=args.model, p_list=p_list, methods=methods,
        replications=args.reps, n_train=args.n_train, n_valid=args.n_valid,
        master_seed=args.seed, rho=args.rho, n_jobs=args.threads)
    result = sim_mod.run_experiment(cfg)
    with open(args.out + ".csv", "w") as fh:
        fh.write("model,p,method,metric,mean,se\n")
        for model, p, method, metric, mean, se in sim_mod.result_rows(result):
            fh.write(f"{model},{p},{method},{metric},"
                     f"{_fmt(mean, args.digits)},{_fmt(se, args.digits)}\n")
    with open(args.out + ".json", "w") as fh:
        json.dump(sim_mod.result_to_dict(result), fh, indent=2)
        fh.write("\n")
    return 0


def cmd_qda(args):
    dataset = qda_mod.load_sonar(args.data)
    if args.standardize:
        feats = dataset.features
        std = feats.std(axis=0, ddof=0)
        std[std == 0] = 1.0
        feats = (feats - feats.mean(axis=0)) / std
        dataset = qda_mod.LabeledDataset(features=feats,
                                         labels=dataset.labels,
                                         class_names=dataset.class_names)
    report = {"method": args.method, "n": dataset.n, "p": dataset.p,
              "class_names": list(dataset.class_names),
              "seed": args.seed}
    if args.loocv:
        rate, se, predictions = qda_mod.loocv_error(dataset, args.method,
                                                    master_seed=args.seed)
        report["loocv_error"] = rate
        report["loocv_se"] = se
        if args.predictions:
            with open(args.predictions, "w") as fh:
                fh.write("index,true,predicted,score_0,score_1\n")
                for idx, truth, pred, s0, s1 in predictions:
                    fh.write(f"{idx},{truth},{pred},"
                             f"{_fmt(s0, args.digits)},{_fmt(s1, args.digits)}\n")
    else:
        specs = []
        for cls in (0, 1):
            feats = dataset.features[dataset.labels == cls]
            seed = np.random.SeedSequence(
                args.seed, spawn_key=(0, cls)).generate_state(1)[0]
            specs.append(qda_mod._tune_class_spec(feats, args.method, int(seed)))
        model = qda_mod.fit_qda(dataset, specs)
        preds = qda_mod.classify(model, dataset.features)
        report["training_error"] = float(np.mean(preds != dataset.labels))
        report["selected"] = [None if s is None else float(s)
                              for s in model.selected]
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cholcov",
        description="Covariance estimation via regularized Cholesky factors")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="master seed (fixed default for reproducibility)")
        sp.add_argument("--digits", type=int, default=17,
                        help="significant digits in numeric output")
        sp.add_argument("--config", default=None,
                        help="flat key=value config file; flags override it")

    sp = sub.add_parser("estimate", help="estimate a covariance matrix from CSV")
    sp.add_argument("input", help="n x p numeric CSV (optional header row)")
    sp.add_argument("--method", required=True, choices=est_mod.METHODS)
    sp.add_argument("--k", type=int, default=None, help="band parameter")
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="penalty level for the lasso-family methods")
    sp.add_argument("--auto", action="store_true",
                    help="select the tuning parameter by random splitting")
    sp.add_argument("--no-header", action="store_true",
                    help="treat the first CSV row as data")
    sp.add_argument("--out", required=True, help="output CSV path")
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("simulate", help="Monte Carlo estimator comparison")
    sp.add_argument("--model", required=True, choices=("ar1", "ma4"))
    sp.add_argument("--p", required=True,
                    help="comma-separated list of dimensions, e.g. 30,100")
    sp.add_argument("--reps", type=int, default=sim_mod.DEFAULT_REPLICATIONS)
    sp.add_argument("--methods", default="sample,sample_banding,chol_banding")
    sp.add_argument("--rho", type=float, default=0.7,
                    help="ar1 decay parameter")
    sp.add_argument("--n-train", type=int, default=sim_mod.DEFAULT_N_TRAIN)
    sp.add_argument("--n-valid", type=int, default=sim_mod.DEFAULT_N_VALID)
    sp.add_argument("--threads", type=int, default=1,
                    help="worker processes for replications")
    sp.add_argument("--out", required=True,
                    help="output prefix; writes <out>.csv and <out>.json")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("qda", help="two-class QDA on sonar-format data")
    sp.add_argument("--data", required=True, help="sonar CSV path")
    sp.add_argument("--method", required=True, choices=est_mod.METHODS)
    sp.add_argument("--loocv", action="store_true",
                    help="estimate the test error by leave-one-out CV")
    sp.add_argument("--standardize", action="store_true",
                    help="standardize features before fitting")
    sp.add_argument("--predictions", default=None,
                    help="optional per-observation predictions CSV")
    sp.add_argument("--out", required=True, help="report JSON path")
    common(sp)
    sp.set_defaults(func=cmd_qda)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    sub_action = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    chosen = sub_action.choices[args.command]
    defaults = {a.dest: a.default for a in chosen._actions}
    try:
        args = _apply_config(args, defaults)
        return args.func(args)
    except (ParseError, ShapeError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CholcovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
