"""Training pipelines: the scatter-regularized max-margin classifier (psc),
a cost-sensitive linear SVM baseline (cssvm), the normalized mean-difference
direction (rmdd), and the Gaussian Bayes oracle for simulations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import intercept, qp, smw
from .dataset import LabeledMatrix, class_stats
from .intercept import Projections, choose_intercept
from .scatter import build_factor


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    gamma: float = 0.5  # lambda as a fraction of the PD cap
    c0: float = 1.0
    r_scale: float = intercept.DEFAULT_R
    tol: float = qp.DEFAULT_TOL
    max_iter: int = qp.DEFAULT_MAX_ITER

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise FitError(f"gamma must be in (0,1), got {self.gamma}")
        if self.c0 <= 0 or self.r_scale <= 0:
            raise FitError("c0 and r_scale must be positive")


@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray
    b: float
    method_tag: str
    n1: int = 0
    n2: int = 0
    gamma: float | None = None
    lam: float | None = None
    c0: float | None = None
    r_scale: float | None = None
    converged: bool = True
    kkt_residual: float = 0.0
    seed_provenance: str | None = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).ravel()
        if not np.isfinite(w).all():
            raise FitError("direction vector has non-finite entries")
        if not np.any(w):
            raise FitError("direction vector is all-zero")
        object.__setattr__(self, "w", w)

    @property
    def d(self) -> int:
        return self.w.shape[0]


def decision(model: LinearModel, x: np.ndarray) -> np.ndarray | float:
    """w^T x + b for a single vector or a matrix of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.d:
        raise FitError(f"dimension mismatch: model is {model.d}-dimensional, got {x.shape[-1]}")
    out = x @ model.w + model.b
    return float(out) if out.ndim == 0 else out


def predict(model: LinearModel, x: np.ndarray) -> np.ndarray | int:
    """sign(decision) with zero classified as +1."""
    dec = decision(model, x)
    out = np.where(np.asarray(dec) >= 0.0, 1, -1)
    return int(out) if out.ndim == 0 else out


def _class_weights(y: np.ndarray, n1: int, n2: int) -> np.ndarray:
    # weight 1 for class +1, n1/n2 for class -1: equal total slack budget
    return np.where(y > 0, 1.0, n1 / n2)


def _solve_dual(G: np.ndarray, data: LabeledMatrix, hp: Hyperparams, n1: int, n2: int):
    y = data.labels.astype(np.float64)
    caps = hp.c0 * _class_weights(y, n1, n2)
    problem = qp.BoxQP(G=G, y=y, upper=caps)
    sol = qp.solve_smo(problem, tol=hp.tol, max_iter=hp.max_iter)
    if not np.any(sol.alpha):
        raise FitError("trivial dual: all multipliers are zero (c0 too small)")
    return sol, caps


def fit_psc(data: LabeledMatrix, hp: Hyperparams, seed_provenance: str | None = None) -> LinearModel:
    stats = class_stats(data)
    factor = build_factor(data, stats)
    cap = smw.lambda_cap(factor)
    if not math.isfinite(cap):
        raise FitError("degenerate data: scatter matrix is zero")
    lam = hp.gamma * cap
    op = smw.build_operator(factor, lam)
    G = smw.gram(op, data)
    sol, _ = _solve_dual(G, data, hp, stats.n1, stats.n2)
    w = smw.apply_inverse(op, data.samples.T @ (data.labels * sol.alpha))
    proj = data.samples @ w
    p = Projections(pos=proj[data.labels == 1], neg=proj[data.labels == -1])
    b = choose_intercept(p, hp.r_scale)
    return LinearModel(
        w=w,
        b=b,
        method_tag="psc",
        n1=stats.n1,
        n2=stats.n2,
        gamma=hp.gamma,
        lam=lam,
        c0=hp.c0,
        r_scale=hp.r_scale,
        converged=sol.converged,
        kkt_residual=sol.kkt_residual,
        seed_provenance=seed_provenance,
    )


def fit_cssvm(
    data: LabeledMatrix,
    c0: float = 1.0,
    tol: float = qp.DEFAULT_TOL,
    max_iter: int = qp.DEFAULT_MAX_ITER,
    r_scale: float = intercept.DEFAULT_R,
    seed_provenance: str | None = None,
) -> LinearModel:
    """Soft-margin SVM dual with per-class slack weights (the lambda=0 Gram)."""
    stats = class_stats(data)
    y = data.labels.astype(np.float64)
    G = y[:, None] * (data.samples @ data.samples.T) * y[None, :]
    G = (G + G.T) / 2.0
    hp = Hyperparams(gamma=0.5, c0=c0, r_scale=r_scale, tol=tol, max_iter=max_iter)
    sol, caps = _solve_dual(G, data, hp, stats.n1, stats.n2)
    w = data.samples.T @ (y * sol.alpha)
    proj = data.samples @ w
    eps = 1e-8 * caps.max()
    free = (sol.alpha > eps) & (sol.alpha < caps - eps)
    if free.any():
        b = float(np.mean(y[free] - proj[free]))
    else:
        p = Projections(pos=proj[data.labels == 1], neg=proj[data.labels == -1])
        b = choose_intercept(p, r_scale)
    return LinearModel(
        w=w,
        b=b,
        method_tag="cssvm",
        n1=stats.n1,
        n2=stats.n2,
        c0=c0,
        r_scale=r_scale,
        converged=sol.converged,
        kkt_residual=sol.kkt_residual,
        seed_provenance=seed_provenance,
    )


def fit_rmdd(
    data: LabeledMatrix,
    r_scale: float = intercept.DEFAULT_R,
    seed_provenance: str | None = None,
) -> LinearModel:
    """Unit-norm class-mean difference direction with the adaptive intercept."""
    stats = class_stats(data)
    diff = stats.u1 - stats.u2
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise FitError("class means coincide: mean-difference direction undefined")
    w = diff / norm
    proj = data.samples @ w
    p = Projections(pos=proj[data.labels == 1], neg=proj[data.labels == -1])
    b = choose_intercept(p, r_scale)
    return LinearModel(
        w=w,
        b=b,
        method_tag="rmdd",
        n1=stats.n1,
        n2=stats.n2,
        r_scale=r_scale,
        seed_provenance=seed_provenance,
    )


def bayes_oracle(mu_pos: np.ndarray, mu_neg: np.ndarray, sigma: np.ndarray) -> LinearModel:
    """Optimal linear rule for known Gaussian populations with shared covariance."""
    mu_pos = np.asarray(mu_pos, dtype=np.float64).ravel()
    mu_neg = np.asarray(mu_neg, dtype=np.float64).ravel()
    sigma = np.asarray(sigma, dtype=np.float64)
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise FitError("covariance matrix is not symmetric positive definite") from None
    w = np.linalg.solve(sigma, mu_pos - mu_neg)
    b = float(-0.5 * w @ (mu_pos + mu_neg))
    return LinearModel(w=w, b=b, method_tag="bayes")


def model_to_dict(model: LinearModel) -> dict:
    return {
        "method_tag": model.method_tag,
        "d": model.d,
        "w": model.w.tolist(),
        "b": model.b,
        "n1": model.n1,
        "n2": model.n2,
        "gamma": model.gamma,
        "lambda": model.lam,
        "c0": model.c0,
        "r_scale": model.r_scale,
        "converged": model.converged,
        "kkt_residual": model.kkt_residual,
        "seed_provenance": model.seed_provenance,
    }


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return LinearModel(
        w=np.asarray(doc["w"], dtype=np.float64),
        b=float(doc["b"]),
        method_tag=doc["method_tag"],
        n1=int(doc.get("n1") or 0),
        n2=int(doc.get("n2") or 0),
        gamma=doc.get("gamma"),
        lam=doc.get("lambda"),
        c0=doc.get("c0"),
        r_scale=doc.get("r_scale"),
        converged=bool(doc.get("converged", True)),
        kkt_residual=float(doc.get("kkt_residual", 0.0)),
        seed_provenance=doc.get("seed_provenance"),
    )
