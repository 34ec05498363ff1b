"""Least squares fitting, R-squared, RMSE and a sign-normalized SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

RTOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    r2: float
    r2_raw: float
    rank: int
    rank_deficient: bool

    @property
    def design_cols(self) -> int:
        return self.coefficients.shape[0]


@dataclass(frozen=True)
class SvdFactors:
    P: np.ndarray
    delta: np.ndarray
    Q: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.P * self.delta) @ self.Q.T


def r2_from_sse(sse: float, y: np.ndarray) -> tuple[float, float]:
    sst = float(((y - y.mean()) ** 2).sum())
    raw = 1.0 - sse / sst
    return min(max(raw, 0.0), 1.0), raw


def ols_fit(X, y, rtol: float = RTOL) -> LinearFit:
    """Intercept-free least squares via LAPACK's SVD-based solver.

    Directions with singular value below ``rtol * max(delta)`` are truncated,
    giving the minimum-norm solution on rank-deficient designs.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise DataError(f"design has {X.shape[0]} rows but response has {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite values in regression inputs")
    if X.shape[1] == 0:
        coef = np.zeros(0)
        rank = 0
    else:
        coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=rtol)
    fitted = X @ coef if X.shape[1] else np.zeros_like(y)
    resid = y - fitted
    r2, raw = r2_from_sse(float(resid @ resid), y)
    return LinearFit(coef, fitted, resid, r2, raw, int(rank), int(rank) < X.shape[1])


def r_squared_of_subset(design, subset) -> float:
    """R-squared of regressing ``design.ys`` on the columns of the chosen variables.

    ``subset`` holds variable indices; for grouped designs each variable
    contributes all of its columns.
    """
    idx = sorted(set(int(j) for j in subset))
    if not idx:
        raise ValueError("subset must be nonempty")
    groups = design.groups
    if idx[0] < 0 or idx[-1] >= len(groups):
        raise IndexError(f"variable index out of range 0..{len(groups) - 1}")
    cols = np.concatenate([groups[j] for j in idx])
    return ols_fit(design.Xs[:, cols], design.ys).r2


def rmse(yhat, y) -> float:
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ValueError(f"length mismatch: {yhat.shape} vs {y.shape}")
    if y.size == 0:
        raise ValueError("rmse of empty vectors")
    return float(np.sqrt(np.mean((yhat - y) ** 2)))


def svd(X) -> SvdFactors:
    """Thin SVD with a fixed sign convention.

    Each column of ``Q`` is flipped so its largest-magnitude entry is
    positive; among entries tied in magnitude the lowest row index decides.
    """
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite values in matrix")
    P, delta, Qt = np.linalg.svd(X, full_matrices=False)
    Q = Qt.T.copy()
    P = P.copy()
    for m in range(Q.shape[1]):
        col = np.abs(Q[:, m])
        top = np.flatnonzero(col >= col.max() * (1 - 1e-12))[0]
        if Q[top, m] < 0:
            Q[:, m] = -Q[:, m]
            P[:, m] = -P[:, m]
    return SvdFactors(P, delta, Q)


def numerical_rank(delta: np.ndarray, rtol: float = RTOL) -> int:
    if delta.size == 0 or delta[0] == 0:
        return 0
    return int(np.sum(delta > rtol * delta[0]))
