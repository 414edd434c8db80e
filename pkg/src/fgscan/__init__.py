"""Sparse Fine-Gray competing-risks regression with linear-time risk-set scans."""

from .censoring import CensoringSurvival, fit_censoring_km, weight_ratio
from .data import (
    CompetingRisksDataset,
    SubjectRecord,
    load_csv,
    standardize_covariates,
)
from .engine import (
    LikelihoodReport,
    NaiveEngine,
    ScanEngine,
    make_engine,
    naive_denominators,
    naive_likelihood_suite,
    scan_denominators,
)

__version__ = "0.1.0"

__all__ = [
    "CensoringSurvival",
    "CompetingRisksDataset",
    "LikelihoodReport",
    "NaiveEngine",
    "ScanEngine",
    "SubjectRecord",
    "fit_censoring_km",
    "load_csv",
    "make_engine",
    "naive_denominators",
    "naive_likelihood_suite",
    "scan_denominators",
    "standardize_covariates",
    "weight_ratio",
    "__version__",
]
