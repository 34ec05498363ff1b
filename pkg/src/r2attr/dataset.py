"""Dataset containers, standardization and channel grouping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Revenue vector ``y`` and channel exposure matrix ``X`` (n x p)."""

    y: np.ndarray
    X: np.ndarray
    channel_names: tuple[str, ...]

    def __post_init__(self):
        y = _frozen(self.y)
        X = _frozen(self.X)
        if X.ndim == 1:
            X = _frozen(X[:, None])
        names = tuple(str(c) for c in self.channel_names)
        if y.ndim != 1:
            raise DataError("revenue must be a vector")
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DataError(f"exposure matrix shape {X.shape} does not match {y.shape[0]} observations")
        if y.shape[0] < 2:
            raise DataError("at least two observations are required")
        if X.shape[1] < 1:
            raise DataError("at least one channel is required")
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} channel names for {X.shape[1]} columns")
        if len(set(names)) != len(names):
            dup = sorted({c for c in names if names.count(c) > 1})
            raise DataError(f"duplicate channel names: {', '.join(dup)}")
        if not np.all(np.isfinite(y)):
            raise DataError("revenue contains missing or non-finite values")
        bad = ~np.all(np.isfinite(X), axis=0)
        if bad.any():
            raise DataError(f"channel {names[int(np.argmax(bad))]} contains missing or non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "channel_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.y[rows], self.X[rows], self.channel_names)


@dataclass(frozen=True)
class StandardizedDataset:
    """Standardized revenue and exposures.

    ``col_means`` and ``col_scales`` have length p + 1; entry 0 belongs to
    revenue, entries 1..p to the channels in order.
    """

    ys: np.ndarray
    Xs: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray
    channel_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.Xs.shape[0]

    @property
    def p(self) -> int:
        return self.Xs.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return self.channel_names

    @property
    def groups(self) -> list[np.ndarray]:
        return [np.array([j]) for j in range(self.p)]

    def transform(self, X) -> np.ndarray:
        """Standardize new raw exposures with the stored means and scales."""
        X = np.asarray(X, dtype=np.float64)
        return (X - self.col_means[1:]) / self.col_scales[1:]

    def unstandardize(self) -> Dataset:
        y = self.ys * self.col_scales[0] + self.col_means[0]
        X = self.Xs * self.col_scales[1:] + self.col_means[1:]
        return Dataset(y, X, self.channel_names)


def _mean_scale(a: np.ndarray):
    mean = a.mean(axis=0)
    scale = np.sqrt(((a - mean) ** 2).mean(axis=0))
    return mean, scale


def standardize(ds: Dataset) -> StandardizedDataset:
    """Center every column and scale to unit population variance."""
    if np.all(ds.y == ds.y[0]):
        raise DataError("revenue is constant")
    const = np.all(ds.X == ds.X[0], axis=0)
    if const.any():
        raise DataError(f"constant channel {ds.channel_names[int(np.argmax(const))]}")
    full = np.column_stack([ds.y, ds.X])
    mean, scale = _mean_scale(full)
    Z = (full - mean) / scale
    # a second centering pass removes the rounding left by the first
    Z -= Z.mean(axis=0)
    ys = _frozen(Z[:, 0])
    Xs = _frozen(Z[:, 1:])
    return StandardizedDataset(ys, Xs, _frozen(mean), _frozen(scale), ds.channel_names)


def correlation_matrix(sds: StandardizedDataset) -> np.ndarray:
    C = sds.Xs.T @ sds.Xs / sds.n
    C = (C + C.T) / 2
    np.fill_diagonal(C, 1.0)
    return np.clip(C, -1.0, 1.0)


@dataclass(frozen=True)
class GroupMap:
    """Assignment of channels to named groups; group order is first appearance."""

    assignments: Mapping[str, str]
    group_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        assignments = dict(self.assignments)
        names = tuple(self.group_names) or tuple(dict.fromkeys(assignments.values()))
        missing = set(assignments.values()) - set(names)
        if missing:
            raise DataError(f"groups not listed in group_names: {', '.join(sorted(missing))}")
        if len(set(names)) != len(names):
            raise DataError("duplicate group names")
        object.__setattr__(self, "assignments", assignments)
        object.__setattr__(self, "group_names", names)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, str]]) -> "GroupMap":
        out: dict[str, str] = {}
        for channel, group in pairs:
            if channel in out:
                raise DataError(f"channel {channel} assigned more than once")
            out[channel] = group
        return cls(out)


def aggregate_groups(ds: Dataset, gm: GroupMap) -> Dataset:
    """Replace channels by per-group row sums of member exposures."""
    for c in ds.channel_names:
        if c not in gm.assignments:
            raise DataError(f"unmapped channel {c}")
    extra = [c for c in gm.assignments if c not in ds.channel_names]
    if extra:
        raise DataError(f"group map lists unknown channel {extra[0]}")
    used = [g for g in gm.group_names if g in set(gm.assignments.values())]
    members = {g: [] for g in used}
    for j, c in enumerate(ds.channel_names):
        members[gm.assignments[c]].append(j)
    X = np.column_stack([ds.X[:, members[g]].sum(axis=1) for g in used])
    return Dataset(ds.y, X, tuple(used))
