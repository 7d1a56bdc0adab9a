"""Authorship attribution: feature classifiers, soft-voting ensembles and evaluation."""

from ._core import (
    AuthorshipError,
    Corpus,
    compare_reports,
    config_toml,
    enumerate_subsets,
    extract_features,
    gen_synthetic,
    import_predictions,
    integrated_enumerate,
    load_reports,
    make_fold_plan,
    metrics,
    read_predictions,
    run_pipeline,
    soft_vote,
    softmax,
    welch_t_test,
    write_predictions,
    write_stub_plm,
)

__all__ = [
    "AuthorshipError",
    "Corpus",
    "compare_reports",
    "config_toml",
    "enumerate_subsets",
    "extract_features",
    "gen_synthetic",
    "import_predictions",
    "integrated_enumerate",
    "load_reports",
    "make_fold_plan",
    "metrics",
    "read_predictions",
    "run_pipeline",
    "soft_vote",
    "softmax",
    "welch_t_test",
    "write_predictions",
    "write_stub_plm",
]
