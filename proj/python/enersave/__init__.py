"""Building energy savings regression pipeline.

Thin python surface over the C++ core: the three regressors, wrapper
feature selection, grid/GA tuning, metrics and the full config-driven
pipeline runner.
"""

from enersave._core import (
    ConfigError,
    DataError,
    Model,
    __version__,
    aic,
    fit_forest,
    fit_lasso,
    fit_tree,
    forward_select,
    ga_select,
    ga_tune,
    grid_search,
    load_model,
    metrics,
    pearson,
    pso_select,
    run_pipeline,
    split_indices,
    write_synthetic_csv,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "__version__",
    "aic",
    "fit_forest",
    "fit_lasso",
    "fit_tree",
    "forward_select",
    "ga_select",
    "ga_tune",
    "grid_search",
    "load_model",
    "metrics",
    "pearson",
    "pso_select",
    "run_pipeline",
    "split_indices",
    "write_synthetic_csv",
]
