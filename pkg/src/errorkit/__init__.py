"""Error models for repeated measurements.

The toolkit covers the full path from raw observation series to an
uncertainty statement: series statistics and least-squares error
models (``regression`` on top of ``linsolve``), the arcsine law obeyed
by bounded periodic errors (``distributions``), schedule-driven effect
simulation and classification (``simulate``), and covariance-law
budget synthesis (``budget``). ``dataset`` handles the CSV and JSON
formats and ships the bundled example tables; ``cli`` exposes the
whole chain as batch commands.
"""

from .budget import (
    BudgetComponent,
    BudgetError,
    ErrorBudget,
    UnitResolutionError,
    load_budget,
    monte_carlo_std,
    total_std,
)
from .dataset import (
    ColumnSchema,
    DatasetError,
    DifferentialRow,
    EmptyInputError,
    ErrorSample,
    MalformedRowError,
    MeasurementRow,
    MeasurementSeries,
    bundled_path,
    differences,
    load_differential,
    load_differential_pairs,
    load_series,
    to_error_samples,
    write_differential_csv,
    write_series_csv,
)
from .distributions import ArcsineDistribution, cdf, pdf, sample, std
from .linsolve import NormalEquations, SingularSystemError, solve
from .regression import (
    InsufficientDataError,
    PolynomialErrorModel,
    Prediction,
    RandomModelEstimate,
    SinusoidalErrorModel,
    evaluate_polynomial,
    evaluate_sinusoid,
    fit_cycle_differential,
    fit_cycle_direct,
    fit_polynomial,
    predict_frequency,
    random_model,
    to_report,
)
from .simulate import (
    ConditionSchedule,
    ConfigurationError,
    DifferentialRun,
    EffectReport,
    ErrorSource,
    RepeatedRun,
    Scenario,
    ScenarioError,
    SourceEffect,
    classify_effects,
    load_scenario,
    simulate_differential,
    simulate_repeated,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # dataset
    "ColumnSchema",
    "DatasetError",
    "DifferentialRow",
    "EmptyInputError",
    "ErrorSample",
    "MalformedRowError",
    "MeasurementRow",
    "MeasurementSeries",
    "bundled_path",
    "differences",
    "load_differential",
    "load_differential_pairs",
    "load_series",
    "to_error_samples",
    "write_differential_csv",
    "write_series_csv",
    # linear solver
    "NormalEquations",
    "SingularSystemError",
    "solve",
    # regression
    "InsufficientDataError",
    "PolynomialErrorModel",
    "Prediction",
    "RandomModelEstimate",
    "SinusoidalErrorModel",
    "evaluate_polynomial",
    "evaluate_sinusoid",
    "fit_cycle_differential",
    "fit_cycle_direct",
    "fit_polynomial",
    "predict_frequency",
    "random_model",
    "to_report",
    # distributions
    "ArcsineDistribution",
    "pdf",
    "cdf",
    "std",
    "sample",
    # budget
    "BudgetComponent",
    "BudgetError",
    "ErrorBudget",
    "UnitResolutionError",
    "load_budget",
    "monte_carlo_std",
    "total_std",
    # simulation
    "ConditionSchedule",
    "ConfigurationError",
    "DifferentialRun",
    "EffectReport",
    "ErrorSource",
    "RepeatedRun",
    "Scenario",
    "ScenarioError",
    "SourceEffect",
    "classify_effects",
    "load_scenario",
    "simulate_differential",
    "simulate_repeated",
]
