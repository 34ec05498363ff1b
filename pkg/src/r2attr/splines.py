"""Truncated power spline expansions for additive models.

Each variable x_j is replaced by the columns

    x, x**2, ..., x**q, (x - t_1)**q * 1{x > t_1}, ..., (x - t_K)**q * 1{x > t_K}

with equally spaced internal knots.  The constant basis is omitted: it is
zero after centering and the intercept is carried by the centering itself.
All columns are standardized, so the expansion plugs into the same
least squares, dominance and relative weight code as a linear design, with
each variable's columns forming one group.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DataError
from .regression import ols_fit, rmse

DEFAULT_Q = 3
DEFAULT_K_GRID = (0, 1, 2, 4, 6, 8, 10)
DEFAULT_FOLDS = 5
# CV scores closer than this (relative to the response scale) count as ties
CV_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SplineSpec:
    q: int
    K: int
    knots: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("polynomial order q must be at least 1")
        if self.K < 0:
            raise ValueError("knot count K must be nonnegative")
        for kn in self.knots:
            if len(kn) != self.K:
                raise ValueError(f"expected {self.K} knots per variable, got {len(kn)}")
            if any(b <= a for a, b in zip(kn, kn[1:])):
                raise ValueError("knots must be strictly increasing")

    @classmethod
    def from_data(cls, X, q: int = DEFAULT_Q, K: int = 0) -> "SplineSpec":
        X = np.asarray(X, dtype=np.float64)
        return cls(q, K, tuple(tuple(equally_spaced_knots(X[:, j], K)) for j in range(X.shape[1])))


def equally_spaced_knots(x, K: int) -> list[float]:
    x = np.asarray(x, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    if not lo < hi:
        raise DataError("cannot place knots on a constant column")
    if K < 0:
        raise ValueError("K must be nonnegative")
    return [lo + k * (hi - lo) / (K + 1) for k in range(1, K + 1)]


def tps_basis(x, q: int, knots) -> np.ndarray:
    """Raw (unstandardized) truncated power basis, shape (n, q + len(knots))."""
    x = np.asarray(x, dtype=np.float64)
    cols = [x**d for d in range(1, q + 1)]
    for t in knots:
        cols.append(np.where(x > t, (x - t) ** q, 0.0))
    return np.column_stack(cols) if cols else np.empty((x.size, 0))


@dataclass(frozen=True)
class BasisExpansion:
    """Standardized spline design plus what is needed to apply it to new data.

    ``groups[j]`` lists the expanded columns belonging to variable j (a
    contiguous range).  ``keep`` marks which raw basis columns survived the
    constant-column check.
    """

    Xs: np.ndarray
    ys: np.ndarray
    groups: list[np.ndarray]
    spec: SplineSpec
    names: tuple[str, ...]
    column_names: tuple[str, ...]
    keep: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float
    y_scale: float

    @property
    def expanded(self) -> np.ndarray:
        return self.Xs

    @property
    def n(self) -> int:
        return self.Xs.shape[0]

    @property
    def p(self) -> int:
        return len(self.groups)

    def raw_basis(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        blocks = [tps_basis(X[:, j], self.spec.q, self.spec.knots[j]) for j in range(X.shape[1])]
        return np.column_stack(blocks)

    def transform(self, X) -> np.ndarray:
        """Expanded, standardized design for new raw exposures."""
        B = self.raw_basis(X)[:, self.keep]
        return (B - self.col_means) / self.col_scales


def expand_design(ds: Dataset, spec: SplineSpec | None = None, *, q: int = DEFAULT_Q,
                  K: int = 0, threads: int = 1) -> BasisExpansion:
    if spec is None:
        spec = SplineSpec.from_data(ds.X, q, K)
    if len(spec.knots) != ds.p:
        raise ValueError(f"spline spec covers {len(spec.knots)} variables, dataset has {ds.p}")
    width = spec.q + spec.K

    def one(j):
        return tps_basis(ds.X[:, j], spec.q, spec.knots[j])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            blocks = list(pool.map(one, range(ds.p)))
    else:
        blocks = [one(j) for j in range(ds.p)]
    B = np.column_stack(blocks)
    mean = B.mean(axis=0)
    scale = np.sqrt(((B - mean) ** 2).mean(axis=0))
    keep = ~np.all(B == B[0], axis=0) & (scale > 0)
    labels = []
    for name in ds.channel_names:
        labels += [f"{name}^{d}" for d in range(1, spec.q + 1)]
        labels += [f"{name}:knot{k}" for k in range(1, spec.K + 1)]
    if not keep.all():
        dropped = [labels[i] for i in np.flatnonzero(~keep)]
        warnings.warn(f"dropping constant basis columns: {', '.join(dropped)}", stacklevel=2)
    owner = np.repeat(np.arange(ds.p), width)[keep]
    groups = [np.flatnonzero(owner == j) for j in range(ds.p)]
    empty = [ds.channel_names[j] for j, g in enumerate(groups) if g.size == 0]
    if empty:
        raise DataError(f"no usable basis columns for {', '.join(empty)}")
    Xs = (B[:, keep] - mean[keep]) / scale[keep]
    Xs -= Xs.mean(axis=0)
    y_mean = float(ds.y.mean())
    y_scale = float(np.sqrt(((ds.y - y_mean) ** 2).mean()))
    if y_scale == 0:
        raise DataError("revenue is constant")
    ys = (ds.y - y_mean) / y_scale
    ys = ys - ys.mean()
    return BasisExpansion(Xs, ys, groups, spec, ds.channel_names,
                          tuple(np.array(labels)[keep]), keep, mean[keep], scale[keep],
                          y_mean, y_scale)


def aggregate_basis_attribution(phi_basis, be: BasisExpansion) -> np.ndarray:
    phi_basis = np.asarray(phi_basis, dtype=np.float64)
    total = sum(g.size for g in be.groups)
    if phi_basis.shape != (total,):
        raise ValueError(f"expected {total} basis attributions, got {phi_basis.shape}")
    return np.array([phi_basis[g].sum() for g in be.groups])


def fold_assignment(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle then contiguous blocks."""
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _fold_rmse(ds: Dataset, K: int, q: int, val: np.ndarray) -> float:
    train_rows = np.setdiff1d(np.arange(ds.n), val)
    train = ds.subset(train_rows)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        be = expand_design(train, q=q, K=K)
    fit = ols_fit(be.Xs, be.ys)
    pred = be.transform(ds.X[val]) @ fit.coefficients * be.y_scale + be.y_mean
    return rmse(pred, ds.y[val])


def cv_knot_scores(ds: Dataset, K_grid=DEFAULT_K_GRID, folds: int = DEFAULT_FOLDS,
                   seed: int = 0, q: int = DEFAULT_Q, threads: int = 1) -> dict[int, float]:
    """Mean validation RMSE for each candidate knot count.

    Knots, basis means and scales are computed on each training fold only.
    """
    K_grid = list(K_grid)
    if not K_grid:
        raise ValueError("K_grid must be nonempty")
    if folds < 2:
        raise ValueError("need at least two folds")
    if ds.n < 2 * folds:
        raise DataError(f"{ds.n} observations are too few for {folds}-fold cross validation")
    blocks = fold_assignment(ds.n, folds, seed)
    tasks = [(K, f) for K in K_grid for f in range(folds)]

    def run(task):
        K, f = task
        return _fold_rmse(ds, K, q, blocks[f])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            scores = list(pool.map(run, tasks))
    else:
        scores = [run(t) for t in tasks]
    out: dict[int, list[float]] = {K: [] for K in K_grid}
    for (K, _), s in zip(tasks, scores):
        out[K].append(s)
    return {K: float(np.mean(v)) for K, v in out.items()}


def select_knots_cv(ds: Dataset, K_grid=DEFAULT_K_GRID, folds: int = DEFAULT_FOLDS,
                    seed: int = 0, q: int = DEFAULT_Q, threads: int = 1) -> int:
    """Knot count with the lowest mean CV error; ties go to the smallest K."""
    scores = cv_knot_scores(ds, K_grid, folds, seed, q, threads)
    best = min(scores.values())
    tol = CV_TIE_RTOL * max(1.0, float(ds.y.std()))
    return min(K for K, s in scores.items() if s <= best + tol)
