"""Dominance analysis over all submodels.

Variables are "players"; for grouped designs (spline expansions) a player
owns several columns which always enter or leave a submodel together.
Subsets are encoded as integer bitmasks, bit ``j`` standing for player ``j``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DALimitError, NumericalError
from .regression import RTOL, ols_fit, svd

DEFAULT_DA_LIMIT = 20
NEG_TOL = 1e-10
AUDIT_TOL = 1e-9

DOMINATES = 1
DOMINATED = -1
UNDETERMINED = 0

# floats per chunk of stacked submatrices handed to the batched SVD
_CHUNK_FLOATS = 4_000_000


@dataclass(frozen=True)
class SubsetR2Table:
    """R-squared for every subset of ``p`` players, indexed by bitmask (entry 0 is the empty model)."""

    p: int
    values: np.ndarray

    def __getitem__(self, mask: int) -> float:
        return float(self.values[mask])

    @property
    def full(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class MarginalTable:
    """``C[j, k]``: mean R-squared increment of player j over submodels of size k without j."""

    C: np.ndarray
    table: SubsetR2Table


@dataclass(frozen=True)
class DominanceReport:
    phi: np.ndarray
    complete: np.ndarray
    general: np.ndarray
    C: np.ndarray


def default_threads() -> int:
    env = os.environ.get("R2ATTR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def _chunk_r2(M, c, yy, sst, col_idx):
    # col_idx: (B, m) column indices; columns of M span every submodel design
    A = np.ascontiguousarray(np.moveaxis(M[:, col_idx], 0, 1))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > RTOL * s[:, :1]
    proj = np.einsum("brk,r->bk", U, c)
    ssr = np.sum(np.where(keep, proj * proj, 0.0), axis=1)
    raw = 1.0 - (yy - ssr) / sst
    return np.clip(raw, 0.0, 1.0)


def all_subsets_r2(design, limit_p: int = DEFAULT_DA_LIMIT, audit_fraction: float = 0.01,
                   audit_cap: int = 64, threads: int | None = None) -> SubsetR2Table:
    """Fit every one of the ``2**p - 1`` nonempty submodels.

    The design is reduced once by its SVD, ``Xs = P diag(d) Q'``; each
    submodel then becomes a least squares problem on the small matrix
    ``diag(d) Q'[:, cols]`` against ``P'y``.  Those are solved in batches by
    SVD with the same relative rank cutoff as :func:`~r2attr.regression.ols_fit`.
    A seeded random sample of subsets is re-fitted on the original columns
    and must agree to ``AUDIT_TOL``.
    """
    groups = design.groups
    p = len(groups)
    if p > limit_p:
        raise DALimitError(
            f"dominance analysis over {p} variables needs {2**p - 1} submodel fits, "
            f"above the limit of {limit_p} variables; use relative weights (--method rw) "
            f"or raise --da-limit")
    if p > 62:
        raise DALimitError("bitmask encoding supports at most 62 variables")
    X = design.Xs
    y = design.ys
    f = svd(X)
    M = f.delta[:, None] * f.Q.T
    c = f.P.T @ y
    yy = float(y @ y)
    sst = float(((y - y.mean()) ** 2).sum())

    owner = np.concatenate([np.full(len(g), j) for j, g in enumerate(groups)])
    order = np.concatenate(groups)
    masks = np.arange(1, 2**p, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(p)) & 1).astype(bool)
    sizes = np.array([len(g) for g in groups])
    ncols = bits @ sizes

    jobs = []
    for m in np.unique(ncols):
        sel = np.flatnonzero(ncols == m)
        step = max(1, _CHUNK_FLOATS // max(1, M.shape[0] * m))
        for start in range(0, sel.size, step):
            rows = sel[start:start + step]
            member = bits[rows][:, owner]
            idx = order[np.nonzero(member)[1].reshape(rows.size, m)]
            jobs.append((rows, idx))

    values = np.zeros(2**p)
    nthreads = threads or default_threads()
    if nthreads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            results = list(pool.map(lambda job: _chunk_r2(M, c, yy, sst, job[1]), jobs))
    else:
        results = [_chunk_r2(M, c, yy, sst, idx) for _, idx in jobs]
    # write back in job order so the table never depends on scheduling
    for (rows, _), r in zip(jobs, results):
        values[masks[rows]] = r

    table = SubsetR2Table(p, values)
    if audit_fraction > 0:
        _audit(table, design, audit_fraction, audit_cap)
    return table


def _audit(table: SubsetR2Table, design, fraction: float, cap: int) -> None:
    total = 2**table.p - 1
    k = min(total, cap, max(1, int(math.ceil(fraction * total))))
    rng = np.random.default_rng(0)
    sample = rng.choice(np.arange(1, total + 1), size=k, replace=False)
    sample = np.union1d(sample, [total])
    for mask in sample:
        cols = np.concatenate([g for j, g in enumerate(design.groups) if mask >> j & 1])
        ref = ols_fit(design.Xs[:, cols], design.ys).r2
        if abs(ref - table.values[mask]) > AUDIT_TOL:
            raise NumericalError(
                f"submodel sweep disagrees with direct fit on subset {int(mask):#x}: "
                f"{table.values[mask]!r} vs {ref!r}")


def marginal_contributions(tbl: SubsetR2Table) -> MarginalTable:
    p = tbl.p
    if tbl.values.shape != (2**p,):
        raise ValueError("incomplete subset table")
    allm = np.arange(2**p, dtype=np.int64)
    k_all = popcount(allm)
    C = np.zeros((p, p))
    for j in range(p):
        h = allm[(allm >> j & 1) == 0]
        inc = tbl.values[h | (1 << j)] - tbl.values[h]
        worst = inc.min()
        if worst < -NEG_TOL:
            raise NumericalError(
                f"R-squared decreased by {-worst:.3g} when adding variable {j}; "
                "nested fits must be monotone")
        inc = np.maximum(inc, 0.0)
        sums = np.bincount(k_all[h], weights=inc, minlength=p)
        counts = np.array([math.comb(p - 1, k) for k in range(p)], dtype=np.float64)
        C[j] = sums / counts
    return MarginalTable(C, tbl)


def complete_dominance(tbl: SubsetR2Table, tol: float = NEG_TOL) -> np.ndarray:
    """Pairwise complete dominance as a ternary matrix (1 dominates, -1 dominated, 0 neither)."""
    p = tbl.p
    out = np.zeros((p, p), dtype=np.int8)
    allm = np.arange(2**p, dtype=np.int64)
    for i, j in itertools.combinations(range(p), 2):
        h = allm[((allm >> i & 1) == 0) & ((allm >> j & 1) == 0)]
        d = tbl.values[h | (1 << i)] - tbl.values[h | (1 << j)]
        if np.all(d >= -tol) and np.any(d > tol):
            out[i, j], out[j, i] = DOMINATES, DOMINATED
        elif np.all(d <= tol) and np.any(d < -tol):
            out[i, j], out[j, i] = DOMINATED, DOMINATES
    return out


def da_attribution(mt: MarginalTable) -> DominanceReport:
    C = mt.C
    p = C.shape[0]
    phi = C.sum(axis=1) / p
    general = phi[:, None] >= phi[None, :]
    return DominanceReport(phi, complete_dominance(mt.table), general, C)


def dominance_analysis(design, limit_p: int = DEFAULT_DA_LIMIT, **kw) -> DominanceReport:
    return da_attribution(marginal_contributions(all_subsets_r2(design, limit_p, **kw)))


def shapley_oracle(design, evaluator=None) -> np.ndarray:
    """Shapley values of the R-squared game by enumerating all orderings.

    Independent of the subset sweep: by default every coalition is fitted
    directly with :func:`~r2attr.regression.ols_fit` (memoized).
    """
    groups = design.groups
    p = len(groups)
    if p > 10:
        raise ValueError(f"permutation enumeration limited to 10 variables, got {p}")
    if evaluator is None:
        def evaluator(mask):
            cols = np.concatenate([g for j, g in enumerate(groups) if mask >> j & 1])
            return ols_fit(design.Xs[:, cols], design.ys).r2
    cache = {0: 0.0}

    def v(mask):
        if mask not in cache:
            cache[mask] = evaluator(mask)
        return cache[mask]

    phi = [0.0] * p
    count = 0
    for perm in itertools.permutations(range(p)):
        mask = 0
        prev = 0.0
        for j in perm:
            mask |= 1 << j
            cur = v(mask)
            phi[j] += cur - prev
            prev = cur
        count += 1
    return np.array(phi) / count
