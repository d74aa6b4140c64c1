"""Cluster-robust sandwich variance estimation for dyadic data.

Dyadic observations index pairs of units, and any two pairs sharing a
member are dependent through that member.  This package provides OLS, WLS,
and logistic fits together with sandwich covariance estimators that
account for exactly that dependence, in both a transparent pair-enumeration
form and an equivalent decomposition into one-way cluster estimators that
scales to large networks.  A Monte Carlo harness calibrates the estimators
against empirical sampling variability, and a CSV frontend handles labeled
panels of repeated, weighted, or directed dyads.
"""

from .dyads import DyadDataset, DyadKey, dyad_index, dyad_members, shares_member, unit_cluster
from .errors import (
    ConvergenceError,
    DataError,
    DyadRobustError,
    LeverageError,
    RankDeficiencyError,
    SeparationError,
)
from .ingest import CsvSchemaSpec, IngestResult, ingest_csv, write_csv
from .regression import RegressionFit, fit_logistic, fit_ols, fit_wls
from .simulation import (
    SimulationConfig,
    SimulationReport,
    generate_dyadic_sample,
    run_misspecification_study,
    run_monte_carlo,
    unit_effects,
    write_long_csv,
    write_reports_json,
)
from .variance import (
    PsdDiagnostic,
    VcovEstimate,
    psd_check,
    score_matrix,
    truncate_to_psd,
    vcov_cluster,
    vcov_dyadic_decomposed,
    vcov_dyadic_direct,
    vcov_hc0,
    vcov_hc2,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DyadDataset",
    "DyadKey",
    "dyad_index",
    "dyad_members",
    "shares_member",
    "unit_cluster",
    "DyadRobustError",
    "DataError",
    "RankDeficiencyError",
    "SeparationError",
    "ConvergenceError",
    "LeverageError",
    "RegressionFit",
    "fit_ols",
    "fit_wls",
    "fit_logistic",
    "VcovEstimate",
    "PsdDiagnostic",
    "score_matrix",
    "vcov_hc0",
    "vcov_hc2",
    "vcov_cluster",
    "vcov_dyadic_direct",
    "vcov_dyadic_decomposed",
    "psd_check",
    "truncate_to_psd",
    "SimulationConfig",
    "SimulationReport",
    "generate_dyadic_sample",
    "unit_effects",
    "run_monte_carlo",
    "run_misspecification_study",
    "write_long_csv",
    "write_reports_json",
    "CsvSchemaSpec",
    "IngestResult",
    "ingest_csv",
    "write_csv",
]
