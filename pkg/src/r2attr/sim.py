"""Synthetic studies: the three simulation designs and campaign-like fixtures."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dataset, GroupMap, standardize
from .engine import AttributionRequest, SplineConfig, attribute
from .errors import DataError
from .regression import ols_fit, rmse
from .splines import expand_design

EXAMPLE_BETA = (3.0, -4.5, -0.5, 3.0, -4.0)


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    p: int = 5
    beta: tuple[float, ...] = EXAMPLE_BETA
    corr: str = "ar1"
    r: float = 0.5
    noise_sd: float = 1.0
    n_test: int = 0
    seed: int = 0
    replicates: int = 30

    def __post_init__(self):
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if len(self.beta) != self.p:
            raise ValueError(f"beta has {len(self.beta)} entries for p = {self.p}")


EXAMPLES = {
    1: SimConfig(),
    2: SimConfig(corr="equi", r=0.8),
    3: SimConfig(n=1000, n_test=1000),
}


def correlation_structure(kind: str, p: int, r: float) -> np.ndarray:
    if kind == "ar1":
        if not abs(r) < 1:
            raise ValueError("AR(1) correlation needs |r| < 1")
        idx = np.arange(p)
        C = float(r) ** np.abs(idx[:, None] - idx[None, :])
    elif kind == "equi":
        if p > 1 and not (-1.0 / (p - 1) < r < 1):
            raise ValueError(f"equicorrelation r must lie in (-1/(p-1), 1), got {r}")
        C = np.full((p, p), float(r))
        np.fill_diagonal(C, 1.0)
    else:
        raise ValueError(f"unknown correlation structure {kind!r}")
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise ValueError("correlation matrix is not positive definite") from exc
    return C


def mvn_sample(n: int, corr, seed) -> np.ndarray:
    """Rows ``L z`` with ``L`` the Cholesky factor of ``corr`` and z standard normal."""
    corr = np.asarray(corr, dtype=np.float64)
    L = np.linalg.cholesky(corr)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.standard_normal((n, corr.shape[0])) @ L.T


def additive_truth(X) -> np.ndarray:
    """Noise-free response of the nonlinear design (example 3).

    The fractional power 2 * x**(2/5) is taken as its real branch
    2 * (x**2)**(1/5) = 2 * |x|**0.4 for negative x.
    """
    X = np.asarray(X, dtype=np.float64)
    x1, x2, x3, x4, x5 = X.T
    return (x1 * (1 - x1)
            + 2 * np.log(np.maximum(x2, 1.0))
            + (1 - np.exp(-x3))
            + 2 * np.abs(x4) ** 0.4
            + x5)


def _names(p):
    return tuple(f"x{j + 1}" for j in range(p))


def gen_example(index: int, overrides: dict | None = None, seed=0):
    """Draw (train, test) for a simulation example; test is None for examples 1 and 2."""
    if index not in EXAMPLES:
        raise ValueError(f"unknown example {index}; choose 1, 2 or 3")
    cfg = replace(EXAMPLES[index], **(overrides or {}))
    rng = np.random.default_rng(seed)
    C = correlation_structure(cfg.corr, cfg.p, cfg.r)

    def draw(n):
        X = mvn_sample(n, C, rng)
        signal = additive_truth(X) if index == 3 else X @ np.asarray(cfg.beta)
        y = signal + cfg.noise_sd * rng.standard_normal(n)
        return Dataset(y, X, _names(cfg.p))

    train = draw(cfg.n)
    test = draw(cfg.n_test) if cfg.n_test else None
    return train, test


def replicate_seed(master_seed: int, r: int) -> np.random.SeedSequence:
    """Seed of replicate ``r``: numpy's SeedSequence with spawn key (r,).

    Depends only on ``(master_seed, r)``, so adding replicates leaves earlier ones intact.
    """
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(r,))


@dataclass
class ReplicationSummary:
    """Per-method, per-channel share statistics across replicates.

    Keys of ``shares`` are ``(model, method)`` pairs; each maps to an array of
    shape (replicates, p).  Standard deviations use the n - 1 denominator
    and are NaN for a single replicate.
    """

    example: int
    channels: tuple[str, ...]
    replicates: int
    seed: int
    shares: dict[tuple[str, str], np.ndarray]
    phi_sums: dict[tuple[str, str], np.ndarray]
    r2: dict[str, np.ndarray] = field(default_factory=dict)
    rmse: dict[str, np.ndarray] = field(default_factory=dict)
    rmse_observed: dict[str, np.ndarray] = field(default_factory=dict)
    chosen_K: np.ndarray | None = None

    @staticmethod
    def _sd(a):
        return np.std(a, axis=0, ddof=1) if a.shape[0] > 1 else np.full(a.shape[1:], np.nan)

    def mean(self, model, method) -> np.ndarray:
        return self.shares[(model, method)].mean(axis=0)

    def sd(self, model, method) -> np.ndarray:
        return self._sd(self.shares[(model, method)])

    def stat(self, kind: str, model: str) -> tuple[float, float]:
        a = getattr(self, kind)[model]
        return float(a.mean()), float(self._sd(a[:, None])[0])


def _additive_predict(train: Dataset, test: Dataset, q: int, K: int):
    be = expand_design(train, q=q, K=K)
    fit = ols_fit(be.Xs, be.ys)
    return be.transform(test.X) @ fit.coefficients, be


def _linear_predict(train: Dataset, test: Dataset):
    sds = standardize(train)
    fit = ols_fit(sds.Xs, sds.ys)
    return sds.transform(test.X) @ fit.coefficients, sds.col_means[0], sds.col_scales[0]


def run_replicate(index: int, r: int, seed: int, methods=("da", "rw"),
                  overrides: dict | None = None, spline: SplineConfig | None = None):
    """One replicate: shares per (model, method) plus fit diagnostics for example 3.

    Test RMSE is on the standardized scale of the training response and is
    measured against the noise-free regression function; ``rmse_observed``
    uses the noisy test responses instead.
    """
    ss = replicate_seed(seed, r)
    train, test = gen_example(index, overrides, np.random.default_rng(ss))
    models = ("linear", "additive") if index == 3 else ("linear",)
    out = {"shares": {}, "phi_sums": {}, "r2": {}, "rmse": {}, "rmse_observed": {}, "K": None}
    # CV folds are reshuffled per replicate from the replicate's own seed
    spline = replace(spline or SplineConfig(), seed=int(ss.generate_state(1)[0]))
    for model in models:
        for method in methods:
            req = AttributionRequest(method=method, model=model,
                                     spline=spline if model == "additive" else None)
            res = attribute(train, req)
            out["shares"][(model, method)] = res.share
            out["phi_sums"][(model, method)] = (res.phi_raw.sum(), res.r2)
            out["r2"][model] = res.r2
            if model == "additive":
                out["K"] = res.chosen_K
    if test is not None:
        truth = additive_truth(test.X)
        pred_l, mu, sc = _linear_predict(train, test)
        out["rmse"]["linear"] = rmse(pred_l, (truth - mu) / sc)
        out["rmse_observed"]["linear"] = rmse(pred_l, (test.y - mu) / sc)
        K = out["K"] if out["K"] is not None else 0
        pred_a, be = _additive_predict(train, test, spline.q, K)
        out["rmse"]["additive"] = rmse(pred_a, (truth - be.y_mean) / be.y_scale)
        out["rmse_observed"]["additive"] = rmse(pred_a, (test.y - be.y_mean) / be.y_scale)
        if "additive" not in out["r2"]:
            out["r2"]["additive"] = ols_fit(be.Xs, be.ys).r2
    return out


def replicate_study(index: int, methods=("da", "rw"), replicates: int = 30, seed: int = 0,
                    overrides: dict | None = None, spline: SplineConfig | None = None,
                    threads: int = 1) -> ReplicationSummary:
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    methods = tuple(methods)

    def run(r):
        return run_replicate(index, r, seed, methods, overrides, spline)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            reps = list(pool.map(run, range(replicates)))
    else:
        reps = [run(r) for r in range(replicates)]
    keys = list(reps[0]["shares"])
    p = len(reps[0]["shares"][keys[0]])
    summary = ReplicationSummary(
        example=index, channels=_names(p), replicates=replicates, seed=seed,
        shares={k: np.array([rep["shares"][k] for rep in reps]) for k in keys},
        phi_sums={k: np.array([rep["phi_sums"][k] for rep in reps]) for k in keys},
    )
    if index == 3:
        for model in ("linear", "additive"):
            summary.r2[model] = np.array([rep["r2"][model] for rep in reps])
            summary.rmse[model] = np.array([rep["rmse"][model] for rep in reps])
            summary.rmse_observed[model] = np.array([rep["rmse_observed"][model] for rep in reps])
        summary.chosen_K = np.array([rep["K"] if rep["K"] is not None else -1 for rep in reps])
    return summary


# --- campaign-like fixtures -------------------------------------------------

@dataclass(frozen=True)
class CampaignFixture:
    """Synthetic exposure data plus the generator's own bookkeeping.

    ``truth_share`` is each channel's share of the variance of the noise-free
    revenue, counting only the diagonal (own-term) contributions.
    """

    dataset: Dataset
    truth_share: np.ndarray
    signal: tuple[str, ...]
    negative: tuple[str, ...]
    group_map: GroupMap


def _channel_names(p: int, signal: list[int]) -> list[str]:
    # signal channels become paid search / DSP style names, the rest publishers
    names = [""] * p
    tags = ["S1", "S2", "D1"] + [f"D{k}" for k in range(2, p + 2)]
    for t, j in zip(tags, signal):
        names[j] = t
    k = 1
    for j in range(p):
        if not names[j]:
            names[j] = f"P{k}"
            k += 1
    return names


def campaign_fixture(p: int = 18, signal_channels=(16, 17, 18), n: int = 10_000, seed: int = 0,
                     negative_channels=None) -> CampaignFixture:
    """Nonnegative exposures with revenue concentrated on ``signal_channels`` (1-based).

    A shared latent "activity" drives most channels, so exposures are
    positively correlated.  The negative channels instead fall as activity
    rises and carry a negative revenue coefficient, so they are negatively
    correlated with revenue.  By default the last up-to-four non-signal
    channels are negative.
    """
    signal = [int(j) - 1 for j in signal_channels]
    if not signal or min(signal) < 0 or max(signal) >= p or len(set(signal)) != len(signal):
        raise DataError(f"signal channels must be distinct indices in 1..{p}")
    others = [j for j in range(p) if j not in signal]
    if negative_channels is None:
        negative = others[-min(4, max(0, len(others) - 1)):] if len(others) > 1 else []
    else:
        negative = [int(j) - 1 for j in negative_channels]
        if set(negative) & set(signal):
            raise DataError("a channel cannot be both signal and negative")
    rng = np.random.default_rng(seed)
    activity = rng.gamma(4.0, 0.25, size=n)
    X = np.empty((n, p))
    for j in range(p):
        own = rng.gamma(3.0, 1.0 / 3.0, size=n)
        if j in negative:
            X[:, j] = 2.0 * np.exp(-activity) * own + 0.3 * rng.uniform(size=n)
        else:
            X[:, j] = (1.0 + 0.2 * activity) * own
    w = np.full(p, 0.03)
    for rank, j in enumerate(signal):
        w[j] = 3.0 - 0.6 * rank
    for j in negative:
        w[j] = -0.3
    signal_y = X @ w
    y = 5.0 + signal_y + signal_y.std() * rng.standard_normal(n)
    own_var = w**2 * X.var(axis=0)
    names = _channel_names(p, signal)
    groups = {}
    for name in names:
        groups[name] = {"P": "Publishers", "D": "DSPs", "S": "Paid Search"}[name[0]]
    gm = GroupMap(groups, tuple(g for g in ("Publishers", "DSPs", "Paid Search") if g in groups.values()))
    ds = Dataset(y, X, tuple(names))
    return CampaignFixture(ds, own_var / own_var.sum(), tuple(names[j] for j in signal),
                           tuple(names[j] for j in negative), gm)
