"""Bayesian individualized treatment-effect estimation with Gaussian processes.

Multi-task GP regression over the two potential-outcome surfaces, with
hyperparameters chosen either by marginal likelihood or by an
information-based criterion (factual fit plus counterfactual uncertainty),
plus a synthetic-data harness for rate and benchmark studies.
"""

__version__ = "0.1.0"

from .benchmark import BenchmarkReport, IhdpSource, default_roster, run_benchmark
from .dataset import (
    EstimatorView,
    ObservationalDataset,
    SplitPlan,
    fold_plan,
    load_csv,
    make_split,
    write_csv,
)
from .empirical_bayes import (
    EbConfig,
    FitReport,
    cross_validated_risk,
    information_objective,
    select_hyperparameters,
)
from .errors import (
    NumericalError,
    ParseError,
    ShapeError,
    StudyError,
    ValidationError,
)
from .estimators import ESTIMATOR_NAMES, EstimatorSpec, fit_estimator
from .gp import (
    AugmentedPrior,
    FittedModel,
    MultiTaskPrior,
    PosteriorSummary,
    fit_posterior,
    log_marginal_likelihood,
    predict,
)
from .kernels import LmcKernelSpec, ScalarKernelSpec
from .metrics import (
    RateStudyResult,
    expected_kl_risk,
    optimal_rate_oracle,
    pehe,
    run_rate_study,
    sqrt_pehe,
)
from .synthgen import (
    GeneratorConfig,
    GpDrawSurface,
    LinearSurface,
    LogisticPropensity,
    ConstantPropensity,
    PolynomialSurface,
    generate,
    ihdp_analog,
    realize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
