"""Command-line driver: simulate / fit / predict / evaluate / cv / demo-fig1.

All outputs are plain CSV/JSON so runs with the same config and seed are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import classifier, crossval, dataset, metrics
from .classifier import Hyperparams
from .crossval import ExperimentConfig
from .dataset import LabeledMatrix


def _default_seed() -> int:
    env = os.environ.get("PSC_SEED")
    return int(env) if env else 0


def _load(path: str, label_column: str, positive: str) -> LabeledMatrix:
    positive_labels = set(positive.split(",")) if positive else {"1", "+1"}
    return dataset.load_csv(path, label_column, positive_labels)


def _maybe_zscore(data: LabeledMatrix, enabled: bool) -> LabeledMatrix:
    if not enabled:
        return data
    mean = data.samples.mean(axis=0)
    std = data.samples.std(axis=0)
    std[std == 0.0] = 1.0
    return LabeledMatrix((data.samples - mean) / std, data.labels, data.feature_names)


def _write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_simulate(args) -> int:
    if args.fig1:
        data = dataset.simulate_fig1(args.n_pos, args.n_neg, args.seed)
    else:
        data = dataset.simulate_hdlss(args.d, args.n_pos, args.n_neg, args.seed)
    dataset.write_csv(data, args.out, label_column=args.label_column)
    print(f"wrote {data.n} x {data.d} samples to {args.out}")
    return 0


def cmd_fit(args) -> int:
    data = _maybe_zscore(_load(args.train, args.label_column, args.positive), args.zscore)
    provenance = f"seed={args.seed}"
    if args.method == "psc":
        hp = Hyperparams(gamma=args.gamma, c0=args.c0, r_scale=args.r_scale,
                         tol=args.tol, max_iter=args.max_iter)
        model = classifier.fit_psc(data, hp, seed_provenance=provenance)
    elif args.method == "cssvm":
        model = classifier.fit_cssvm(data, c0=args.c0, tol=args.tol, max_iter=args.max_iter,
                                     r_scale=args.r_scale, seed_provenance=provenance)
    else:
        model = classifier.fit_rmdd(data, r_scale=args.r_scale, seed_provenance=provenance)
    classifier.save_model(model, args.out)
    print(f"fitted {args.method} on {data.n} x {data.d}; model written to {args.out}")
    if not model.converged:
        print("warning: dual solver did not reach tolerance", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    model = classifier.load_model(args.model)
    data = _load(args.data, args.label_column, args.positive)
    decisions = classifier.decision(model, data.samples)
    predictions = np.where(decisions >= 0.0, 1, -1)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "decision", "prediction"])
        for i, (dec, pred) in enumerate(zip(decisions, predictions)):
            writer.writerow([i, format(dec, ".17g"), int(pred)])
    print(f"wrote {len(predictions)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    with open(args.pred, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        decisions = np.array([float(row["decision"]) for row in reader])
    truth = _load(args.truth, args.label_column, args.positive)
    report = metrics.evaluate(truth.labels, decisions)
    metrics.save_report(report, args.out)
    if args.roc_out and report.roc is not None:
        metrics.save_roc_csv(report, args.roc_out)
    print(f"bccr={report.bccr:.6f} total_ccr={report.total_ccr:.6f} auc={report.auc}")
    return 0


def cmd_cv(args) -> int:
    config_doc = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config_doc = json.load(fh)
    # flags win over config-file fields
    overrides = {
        "method": args.method,
        "outer_folds": args.outer_folds,
        "inner_folds": args.inner_folds,
        "repeats": args.repeats,
        "selection_metric": args.selection_metric,
        "r_scale": args.r_scale,
        "seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            config_doc[key] = value
    if args.gamma_grid:
        config_doc["gamma_grid"] = [float(v) for v in args.gamma_grid.split(",")]
    if args.c0_grid:
        config_doc["c0_grid"] = [float(v) for v in args.c0_grid.split(",")]
    for key in ("gamma_grid", "c0_grid"):
        if key in config_doc:
            config_doc[key] = tuple(config_doc[key])
    config = ExperimentConfig(**{k: v for k, v in config_doc.items()
                                 if k in ExperimentConfig.__dataclass_fields__})
    data = _maybe_zscore(_load(args.data, args.label_column, args.positive), args.zscore)
    result = crossval.cv_run(data, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(result["summary"], out_dir / "summary.json")
    for rep in result["repeats"]:
        _write_json(rep, out_dir / f"repeat_{rep['repeat']:03d}.json")
    pooled = result["summary"]["pooled"]
    print(f"cv done: pooled bccr={pooled['bccr']:.6f} total_ccr={pooled['total_ccr']:.6f}")
    return 0


FIG1_CONFIGS = (("a", 5, 65), ("b", 12, 65), ("c", 32, 65), ("d", 65, 65))


def cmd_demo_fig1(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bayes = classifier.bayes_oracle(dataset.FIG1_MU, -dataset.FIG1_MU, dataset.FIG1_SIGMA)
    for tag, n_pos, n_neg in FIG1_CONFIGS:
        data = dataset.simulate_fig1(n_pos, n_neg, args.seed + ord(tag))
        dataset.write_csv(data, out_dir / f"fig1_{tag}_samples.csv")
        rows = []
        models = {
            "psc": classifier.fit_psc(data, Hyperparams(gamma=args.gamma, c0=args.c0)),
            "cssvm": classifier.fit_cssvm(data, c0=args.c0),
            "rmdd": classifier.fit_rmdd(data),
            "bayes": bayes,
        }
        for name, model in models.items():
            rows.append([name, format(model.w[0], ".17g"), format(model.w[1], ".17g"),
                         format(model.b, ".17g")])
        with open(out_dir / f"fig1_{tag}_boundaries.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "w0", "w1", "b"])
            writer.writerows(rows)
    print(f"wrote sample sets and fitted boundaries to {out_dir}")
    return 0


def _add_data_flags(p) -> None:
    p.add_argument("--label-column", default="label")
    p.add_argument("--positive", default="", help="comma-separated positive label strings (default: 1,+1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated data set to CSV")
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--n-pos", type=int, required=True)
    p.add_argument("--n-neg", type=int, required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--fig1", action="store_true", help="use the 2-D correlated-Gaussian setup")
    p.add_argument("--label-column", default="label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="train a model on a CSV data set")
    p.add_argument("--method", choices=crossval.METHODS, default="psc")
    p.add_argument("--train", required=True)
    _add_data_flags(p)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--r-scale", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--zscore", action="store_true", help="opt-in per-feature standardization")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a saved model to a CSV data set")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    _add_data_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against true labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    _add_data_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--roc-out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="repeated nested cross-validation")
    p.add_argument("--data", required=True)
    _add_data_flags(p)
    p.add_argument("--config", default=None, help="JSON config; flags override its fields")
    p.add_argument("--method", choices=crossval.METHODS, default=None)
    p.add_argument("--outer-folds", type=int, default=None)
    p.add_argument("--inner-folds", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--selection-metric", choices=crossval.SELECTION_METRICS, default=None)
    p.add_argument("--gamma-grid", default=None, help="comma-separated values")
    p.add_argument("--c0-grid", default=None, help="comma-separated values")
    p.add_argument("--r-scale", type=float, default=None)
    p.add_argument("--zscore", action="store_true")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("demo-fig1", help="emit the 2-D border-variability demo as CSV")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_demo_fig1)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
