"""Relative weight analysis.

Works on the correlation scale: the standardized design is divided by
sqrt(n), so ``Lambda`` is the symmetric square root of the predictor
correlation matrix and ``beta_star`` holds the correlations of y with the
orthogonal approximation ``Z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, RankDeficiencyError
from .regression import RTOL, svd


@dataclass(frozen=True)
class RwDecomposition:
    Lambda: np.ndarray
    beta_star: np.ndarray | None = None
    phi: np.ndarray | None = None
    Z: np.ndarray | None = None


def _factors(design):
    X = design.Xs
    n, p = X.shape
    if n < p:
        raise DataError(f"relative weights need at least as many observations as columns ({n} < {p})")
    f = svd(X / np.sqrt(n))
    if f.delta[-1] <= RTOL * f.delta[0]:
        v = np.abs(f.Q[:, -1])
        dep = np.flatnonzero(v > 1e-6 * v.max())
        names = _column_names(design)
        raise RankDeficiencyError(
            "design is rank deficient; linearly dependent columns: "
            + ", ".join(names[j] for j in dep), [names[j] for j in dep])
    return f


def _column_names(design):
    names = getattr(design, "column_names", None)
    if names is None:
        names = design.names
    return list(names)


def orthogonal_approximation(design, materialize: bool = True) -> RwDecomposition:
    """Closest column-orthogonal matrix ``Z = P Q'`` and weights with ``X = Z Lambda``.

    ``Z`` is returned on the unstandardized-row scale of ``design.Xs``,
    i.e. each of its columns has squared norm n.
    """
    f = _factors(design)
    Lam = (f.Q * f.delta) @ f.Q.T
    Z = (f.P @ f.Q.T) * np.sqrt(design.n) if materialize else None
    return RwDecomposition(Lambda=Lam, Z=Z)


def rw_attribution(design, materialize: bool = False) -> RwDecomposition:
    """Relative weights, one per design column.

    ``phi[j] = sum_m Lambda[j, m]**2 * beta_star[m]**2`` with entrywise squares.
    """
    f = _factors(design)
    n = design.n
    Lam = (f.Q * f.delta) @ f.Q.T
    beta_star = f.Q @ (f.P.T @ (design.ys / np.sqrt(n)))
    phi = (Lam**2) @ (beta_star**2)
    Z = (f.P @ f.Q.T) * np.sqrt(n) if materialize else None
    return RwDecomposition(Lambda=Lam, beta_star=beta_star, phi=phi, Z=Z)
