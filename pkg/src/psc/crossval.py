"""Repeated nested cross-validation with grid tuning on the inner folds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classifier
from .classifier import Hyperparams, LinearModel
from .dataset import LabeledMatrix, stratified_kfold
from .metrics import EvalReport, evaluate, report_to_dict

DEFAULT_GAMMA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_C0_GRID = (2.0**-5, 2.0**-3, 2.0**-1, 2.0, 2.0**3, 2.0**5)
METHODS = ("psc", "cssvm", "rmdd")
SELECTION_METRICS = ("bccr", "total_ccr", "mwe")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "psc"
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    c0_grid: tuple[float, ...] = DEFAULT_C0_GRID
    r_scale: float = 2.0
    outer_folds: int = 5
    inner_folds: int = 4
    repeats: int = 18
    selection_metric: str = "bccr"
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 10_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.selection_metric not in SELECTION_METRICS:
            raise ConfigError(f"unknown selection metric {self.selection_metric!r}")
        if not self.gamma_grid or not self.c0_grid:
            raise ConfigError("hyperparameter grids must be non-empty")
        if self.outer_folds < 2 or self.inner_folds < 2:
            raise ConfigError("fold counts must be at least 2")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")


def _fit(method: str, data: LabeledMatrix, gamma: float, c0: float, config: ExperimentConfig,
         provenance: str | None = None) -> LinearModel:
    if method == "psc":
        hp = Hyperparams(gamma=gamma, c0=c0, r_scale=config.r_scale,
                         tol=config.tol, max_iter=config.max_iter)
        return classifier.fit_psc(data, hp, seed_provenance=provenance)
    if method == "cssvm":
        return classifier.fit_cssvm(data, c0=c0, tol=config.tol, max_iter=config.max_iter,
                                    r_scale=config.r_scale, seed_provenance=provenance)
    return classifier.fit_rmdd(data, r_scale=config.r_scale, seed_provenance=provenance)


def _candidate_grid(config: ExperimentConfig) -> list[tuple[float, float]]:
    # rmdd has no tunables; cssvm ignores gamma
    if config.method == "rmdd":
        return [(config.gamma_grid[0], config.c0_grid[0])]
    if config.method == "cssvm":
        return [(config.gamma_grid[0], c0) for c0 in config.c0_grid]
    return [(g, c0) for g in config.gamma_grid for c0 in config.c0_grid]


def _score(report: EvalReport, metric: str) -> float:
    if metric == "bccr":
        return report.bccr
    if metric == "total_ccr":
        return report.total_ccr
    return 1.0 - report.mwe  # higher is better throughout


def tune_and_fit(
    samples: np.ndarray,
    labels: np.ndarray,
    train_idx: np.ndarray,
    config: ExperimentConfig,
    fold_seed: int,
) -> tuple[LinearModel, tuple[float, float]]:
    """Grid-search on inner folds of train_idx, then refit on all of it.

    Only rows listed in train_idx are ever materialized, so held-out rows
    stay unread during tuning and refitting.
    """
    train = LabeledMatrix(samples[train_idx], labels[train_idx])
    grid = _candidate_grid(config)
    if len(grid) > 1:
        inner = stratified_kfold(train.labels, config.inner_folds, seed=fold_seed)
        best_key, best = None, grid[0]
        for gamma, c0 in grid:
            scores = []
            for f in range(config.inner_folds):
                tr, va = inner.train_indices(f), inner.test_indices(f)
                sub = LabeledMatrix(train.samples[tr], train.labels[tr])
                try:
                    model = _fit(config.method, sub, gamma, c0, config)
                except (classifier.FitError, ValueError):
                    scores = None
                    break
                dec = train.samples[va] @ model.w + model.b
                scores.append(_score(evaluate(train.labels[va], dec), config.selection_metric))
            if scores is None:
                continue
            key = (-float(np.mean(scores)), c0, gamma)  # ties: smaller c0, then gamma
            if best_key is None or key < best_key:
                best_key, best = key, (gamma, c0)
    else:
        best = grid[0]
    gamma, c0 = best
    model = _fit(config.method, train, gamma, c0, config,
                 provenance=f"seed={config.seed},fold_seed={fold_seed}")
    return model, best


def cv_run(data: LabeledMatrix, config: ExperimentConfig) -> dict:
    """Repeated outer CV; returns per-fold reports, per-repeat pooled
    reports, and a grand summary with pooled-confusion metrics."""
    samples, labels = data.samples, data.labels
    repeats_out = []
    all_labels, all_decisions = [], []
    per_repeat_scores = {"bccr": [], "total_ccr": [], "mwe": []}
    for rep in range(config.repeats):
        outer = stratified_kfold(labels, config.outer_folds, seed=config.seed + rep)
        fold_reports = []
        rep_labels, rep_decisions = [], []
        for f in range(config.outer_folds):
            train_idx = outer.train_indices(f)
            test_idx = outer.test_indices(f)
            fold_seed = config.seed + 100_003 * (rep + 1) + f
            try:
                model, (gamma, c0) = tune_and_fit(samples, labels, train_idx, config, fold_seed)
            except (classifier.FitError, ValueError) as exc:
                fold_reports.append({"repeat": rep, "fold": f, "error": str(exc)})
                continue
            dec = samples[test_idx] @ model.w + model.b
            report = evaluate(labels[test_idx], dec)
            fold_reports.append({
                "repeat": rep,
                "fold": f,
                "gamma": gamma,
                "c0": c0,
                "converged": model.converged,
                "report": report_to_dict(report),
            })
            rep_labels.append(labels[test_idx])
            rep_decisions.append(dec)
        pooled = evaluate(np.concatenate(rep_labels), np.concatenate(rep_decisions))
        repeats_out.append({
            "repeat": rep,
            "folds": fold_reports,
            "pooled": report_to_dict(pooled),
        })
        per_repeat_scores["bccr"].append(pooled.bccr)
        per_repeat_scores["total_ccr"].append(pooled.total_ccr)
        per_repeat_scores["mwe"].append(pooled.mwe)
        all_labels.extend(rep_labels)
        all_decisions.extend(rep_decisions)
    grand = evaluate(np.concatenate(all_labels), np.concatenate(all_decisions))
    summary = {
        "method": config.method,
        "repeats": config.repeats,
        "outer_folds": config.outer_folds,
        "inner_folds": config.inner_folds,
        "selection_metric": config.selection_metric,
        "seed": config.seed,
        "pooled": report_to_dict(grand),
        "per_repeat_mean": {k: float(np.mean(v)) for k, v in per_repeat_scores.items()},
        "per_repeat_std": {k: float(np.std(v)) for k, v in per_repeat_scores.items()},
    }
    return {"repeats": repeats_out, "summary": summary}
