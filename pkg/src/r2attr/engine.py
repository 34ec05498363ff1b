"""Attribution pipeline: grouping, standardization, optional spline expansion,
R-squared decomposition, normalization and hybrid filtering."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .dataset import Dataset, GroupMap, aggregate_groups, standardize
from .dominance import DEFAULT_DA_LIMIT, dominance_analysis
from .errors import AllChannelsFilteredError, DALimitError, NumericalError
from .regression import ols_fit
from .relweights import rw_attribution
from .splines import (DEFAULT_FOLDS, DEFAULT_K_GRID, DEFAULT_Q, aggregate_basis_attribution,
                      expand_design, select_knots_cv)

Method = Literal["da", "rw"]
Model = Literal["linear", "additive"]

EFFICIENCY_TOL = 1e-8


@dataclass(frozen=True)
class SplineConfig:
    q: int = DEFAULT_Q
    K_grid: tuple[int, ...] = DEFAULT_K_GRID
    folds: int = DEFAULT_FOLDS
    seed: int = 0


@dataclass(frozen=True)
class AttributionRequest:
    method: Method = "rw"
    model: Model = "linear"
    spline: SplineConfig | None = None
    hybrid: bool = False
    group_map: GroupMap | None = None
    da_limit: int = DEFAULT_DA_LIMIT
    threads: int = 1

    def __post_init__(self):
        if self.method not in ("da", "rw"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.model not in ("linear", "additive"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "additive" and self.spline is None:
            object.__setattr__(self, "spline", SplineConfig())
        if self.model == "linear" and self.spline is not None:
            raise ValueError("spline settings only apply to the additive model")


@dataclass(frozen=True)
class AttributionResult:
    channels: tuple[str, ...]
    method: str
    model: str
    beta: np.ndarray
    beta_sign: np.ndarray
    phi_raw: np.ndarray
    share: np.ndarray
    share_hybrid: np.ndarray | None
    r2: float
    chosen_K: int | None = None
    wall_time: dict[str, float] = field(default_factory=dict)


def normalize(phi_raw) -> np.ndarray:
    phi_raw = np.asarray(phi_raw, dtype=np.float64)
    total = phi_raw.sum()
    if not total > 0:
        raise NumericalError(f"cannot normalize attributions with total {total!r}")
    return phi_raw / total


def hybrid_shares(share, beta_sign) -> np.ndarray:
    """Zero channels whose linear coefficient is not positive and renormalize the rest."""
    share = np.asarray(share, dtype=np.float64)
    keep = np.asarray(beta_sign) > 0
    if not keep.any():
        raise AllChannelsFilteredError("hybrid filter removed every channel (no positive coefficients)")
    out = np.where(keep, share, 0.0)
    total = out.sum()
    if not total > 0:
        raise AllChannelsFilteredError("retained channels carry no attribution")
    return np.where(keep, out / total, 0.0)


def hybrid_filter(result: AttributionResult, beta_sign=None) -> AttributionResult:
    sign = result.beta_sign if beta_sign is None else np.asarray(beta_sign)
    return replace(result, beta_sign=sign, share_hybrid=hybrid_shares(result.share, sign))


def attribute(ds: Dataset, req: AttributionRequest) -> AttributionResult:
    timings: dict[str, float] = {}
    t_all = t = time.perf_counter()

    def lap(stage):
        nonlocal t
        now = time.perf_counter()
        timings[stage] = now - t
        t = now

    if req.group_map is not None:
        ds = aggregate_groups(ds, req.group_map)
        lap("group")
    if req.method == "da" and ds.p > req.da_limit:
        raise DALimitError(
            f"dominance analysis over {ds.p} channels exceeds the limit of {req.da_limit}; "
            f"use relative weights (--method rw) or raise --da-limit")
    sds = standardize(ds)
    # hybrid filtering always keys off the linear coefficients
    beta = ols_fit(sds.Xs, sds.ys).coefficients
    beta_sign = np.sign(beta).astype(int)
    lap("standardize")

    chosen_K = None
    if req.model == "additive":
        sc = req.spline
        grid = tuple(sc.K_grid)
        chosen_K = grid[0] if len(grid) == 1 else select_knots_cv(
            ds, grid, sc.folds, sc.seed, sc.q, req.threads)
        lap("cv")
        design = expand_design(ds, q=sc.q, K=chosen_K, threads=req.threads)
        lap("expand")
    else:
        design = sds

    r2 = ols_fit(design.Xs, design.ys).r2
    if req.method == "da":
        phi = dominance_analysis(design, req.da_limit, threads=req.threads).phi
    else:
        phi = rw_attribution(design).phi
        if req.model == "additive":
            phi = aggregate_basis_attribution(phi, design)
    lap("decompose")

    if phi.min() < -1e-12:
        raise NumericalError(f"negative attribution {phi.min()!r}")
    phi = np.maximum(phi, 0.0)
    if abs(phi.sum() - r2) > EFFICIENCY_TOL:
        raise NumericalError(f"attributions sum to {phi.sum()!r} but model R-squared is {r2!r}")
    share = normalize(phi)
    share_h = hybrid_shares(share, beta_sign) if req.hybrid else None
    timings["total"] = time.perf_counter() - t_all
    return AttributionResult(ds.channel_names, req.method, req.model, beta, beta_sign, phi,
                             share, share_h, r2, chosen_K, timings)
