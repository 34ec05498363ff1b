"""Conventional importance measures kept for comparison columns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import ols_fit


@dataclass(frozen=True)
class LegacyReport:
    beta_sq: np.ndarray
    rho_sq: np.ndarray
    beta_rho: np.ndarray
    r2: float
    rank_deficient: bool = False

    @property
    def negative_products(self) -> np.ndarray:
        """Indices whose coefficient-correlation product is negative."""
        return np.flatnonzero(self.beta_rho < 0)


def legacy_measures(sds) -> LegacyReport:
    fit = ols_fit(sds.Xs, sds.ys)
    beta = fit.coefficients
    rho = sds.Xs.T @ sds.ys / sds.n
    return LegacyReport(beta**2, rho**2, beta * rho, fit.r2, fit.rank_deficient)


def population_legacy(beta, corr) -> LegacyReport:
    """Legacy measures implied by a known linear model with unit-variance inputs.

    Values are on the standardized scale and use noise-free variance, so only
    their normalized forms are comparable across noise levels.
    """
    beta = np.asarray(beta, dtype=np.float64)
    corr = np.asarray(corr, dtype=np.float64)
    cov_xy = corr @ beta
    sd_y = np.sqrt(beta @ cov_xy)
    b = beta / sd_y
    rho = cov_xy / sd_y
    return LegacyReport(b**2, rho**2, b * rho, float(b @ rho))
