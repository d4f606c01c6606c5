"""Wasserstein-1 fair classification.

Thin wrapper over the C++ core: optimal transport on the line, fairness
metrics, penalized logistic training and quantile-matching post-processing.
"""

from ._wfair import (
    Dataset,
    Error,
    barycenter,
    beliefs,
    fit_baseline,
    optimal_coupling,
    prepare_dataset,
    quantile_match,
    sdd,
    sdd_exact,
    spdd,
    spdd_exact,
    summarize,
    synthetic_split,
    threshold_disparity,
    train,
    wasserstein1,
    wasserstein1_quantile_form,
)

__all__ = [
    "Dataset",
    "Error",
    "barycenter",
    "beliefs",
    "fit_baseline",
    "optimal_coupling",
    "prepare_dataset",
    "quantile_match",
    "sdd",
    "sdd_exact",
    "spdd",
    "spdd_exact",
    "summarize",
    "synthetic_split",
    "threshold_disparity",
    "train",
    "wasserstein1",
    "wasserstein1_quantile_form",
]
