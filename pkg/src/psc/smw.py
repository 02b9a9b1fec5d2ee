"""Woodbury-identity operator for M = [I - lam*(beta*S_B + S_W)]^-1.

All work happens in (n+1)-dimensional space: M*V = V - D^T B^-1 (D V) with
B = (-lam*L_tau)^-1 + D D^T, so no d x d matrix is ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .dataset import LabeledMatrix
from .scatter import PopulationFactor


class SmwError(ValueError):
    """Operator construction or Gram assembly failed."""


@dataclass(frozen=True)
class SmwOperator:
    factor: PopulationFactor
    lam: float
    lu: tuple  # pivoted LU of B
    d: int


def lambda_cap(factor: PopulationFactor) -> float:
    """1/lambda_max(beta*S_B + S_W), computed from the (n+1)-space spectrum.

    Returns +inf when the scatter matrix is identically zero.
    """
    sqrt_l = np.sqrt(factor.l_tau)
    A = (factor.d_matrix * sqrt_l[:, None]) @ (factor.d_matrix * sqrt_l[:, None]).T
    lam_max = float(np.linalg.eigvalsh((A + A.T) / 2.0)[-1])
    if lam_max <= 1e-300:
        return float("inf")
    return 1.0 / lam_max


def build_operator(factor: PopulationFactor, lam: float) -> SmwOperator:
    cap = lambda_cap(factor)
    if not lam > 0.0:
        raise SmwError(f"lambda must be positive, got {lam}")
    if not lam < cap:
        raise SmwError(f"lambda {lam} not below the PD cap {cap}")
    D = factor.d_matrix
    B = D @ D.T
    B[np.diag_indices_from(B)] -= 1.0 / (lam * factor.l_tau)
    scale = np.abs(B).max()
    lu = lu_factor(B)
    if np.abs(np.diag(lu[0])).min() <= 1e-12 * scale:
        raise SmwError("middle matrix numerically singular; lambda too close to an eigenvalue reciprocal")
    return SmwOperator(factor=factor, lam=lam, lu=lu, d=factor.d)


def apply_inverse(op: SmwOperator, V: np.ndarray) -> np.ndarray:
    """M @ V for V of shape (d,) or (d, k)."""
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != op.d:
        raise SmwError(f"dimension mismatch: operator is {op.d}-dimensional, got {V.shape[0]}")
    D = op.factor.d_matrix
    return V - D.T @ lu_solve(op.lu, D @ V)


def gram(op: SmwOperator, data: LabeledMatrix) -> np.ndarray:
    """Dual Gram matrix Y X M X^T Y, symmetrized, with a PSD guard."""
    if data.d != op.d:
        raise SmwError("operator was built for a different dimension")
    X = data.samples
    y = data.labels.astype(np.float64)
    XDt = X @ op.factor.d_matrix.T
    G0 = X @ X.T - XDt @ lu_solve(op.lu, XDt.T)
    G = y[:, None] * G0 * y[None, :]
    G = (G + G.T) / 2.0
    eigs = np.linalg.eigvalsh(G)
    scale = max(abs(eigs[0]), abs(eigs[-1]), 1e-300)
    if eigs[0] < -1e-8 * scale:
        raise SmwError(f"Gram matrix not PSD (min eig {eigs[0]:.3e}); lambda too large or numerical breakdown")
    return G
