"""Population scatter structure: the combined matrix beta*S_B + S_W and its
low-rank factorization D^T diag(L_tau) D used by the SMW operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ClassStats, LabeledMatrix, class_stats


@dataclass(frozen=True)
class PopulationFactor:
    """Factor of beta*S_B + S_W.

    Rows 0..n-1 of d_matrix are x_i - u_class(i) in class order (all +1 rows
    first); the last row is u1 - u2. l_tau holds 1/n1, 1/n2 and beta on the
    matching rows. order maps class-ordered rows back to input positions.
    """

    d_matrix: np.ndarray  # (n+1, d)
    l_tau: np.ndarray  # (n+1,)
    beta: float
    n1: int
    n2: int
    order: np.ndarray  # (n,) original indices, class +1 rows first

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def d(self) -> int:
        return self.d_matrix.shape[1]


def beta(n1: int, n2: int) -> float:
    """Imbalance weight m^(-1/4), m = max(n1,n2)/min(n1,n2); in (0, 1]."""
    if n1 < 1 or n2 < 1:
        raise ValueError("class counts must be positive")
    m = max(n1, n2) / min(n1, n2)
    return math.exp(-math.log(m) / 4.0)


def build_factor(data: LabeledMatrix, stats: ClassStats | None = None) -> PopulationFactor:
    if stats is None:
        stats = class_stats(data)
    pos = np.flatnonzero(data.labels == 1)
    neg = np.flatnonzero(data.labels == -1)
    order = np.concatenate([pos, neg])
    b = beta(stats.n1, stats.n2)
    D = np.empty((data.n + 1, data.d))
    D[: stats.n1] = data.samples[pos] - stats.u1
    D[stats.n1 : data.n] = data.samples[neg] - stats.u2
    D[data.n] = stats.u1 - stats.u2
    l_tau = np.empty(data.n + 1)
    l_tau[: stats.n1] = 1.0 / stats.n1
    l_tau[stats.n1 : data.n] = 1.0 / stats.n2
    l_tau[data.n] = b
    return PopulationFactor(
        d_matrix=D, l_tau=l_tau, beta=b, n1=stats.n1, n2=stats.n2, order=order
    )


def dense_scatter(data: LabeledMatrix, stats: ClassStats | None = None) -> np.ndarray:
    """Explicit d x d matrix beta*S_B + S_W; test oracle for small d."""
    if stats is None:
        stats = class_stats(data)
    pos = data.labels == 1
    Q1 = data.samples[pos] - stats.u1
    Q2 = data.samples[~pos] - stats.u2
    s_w = Q1.T @ Q1 / stats.n1 + Q2.T @ Q2 / stats.n2
    diff = stats.u1 - stats.u2
    s_b = np.outer(diff, diff)
    out = beta(stats.n1, stats.n2) * s_b + s_w
    return (out + out.T) / 2.0
