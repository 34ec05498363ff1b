"""Revenue attribution by decomposing the R-squared of linear and additive models."""

from .dataset import Dataset, GroupMap, StandardizedDataset, aggregate_groups, correlation_matrix, standardize
from .dominance import dominance_analysis, shapley_oracle
from .engine import AttributionRequest, AttributionResult, SplineConfig, attribute, hybrid_filter, normalize
from .legacy import legacy_measures
from .relweights import rw_attribution

__all__ = [
    "AttributionRequest", "AttributionResult", "Dataset", "GroupMap", "SplineConfig",
    "StandardizedDataset", "aggregate_groups", "attribute", "correlation_matrix",
    "dominance_analysis", "hybrid_filter", "legacy_measures", "normalize", "rw_attribution",
    "shapley_oracle", "standardize",
]

__version__ = "0.1.0"
