"""Ready-made effect estimators behind one fit/predict interface.

Six roster entries: two multitask GP fits that differ only in how the
hyperparameters are chosen (held-out information criterion vs marginal
likelihood), one augmented single-GP fit, a pair of independent per-arm
GPs, and two data-free baselines used as floors in comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SplitPlan
from .empirical_bayes import EbConfig, select_hyperparameters
from .errors import ValidationError
from .gp import predict

ESTIMATOR_NAMES = ("mtgp_info", "mtgp_lik", "gp_aug_lik", "separate_gps", "zero", "mean_diff")

GP_ESTIMATORS = frozenset({"mtgp_info", "mtgp_lik", "gp_aug_lik", "separate_gps"})


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run plus its hyperparameter-search settings.

    The name fixes the model family and the selection criterion; budget,
    fold count and smoothness grid only matter for the GP entries and are
    forwarded to the search configuration.
    """

    name: str
    budget: int = 24
    J: int = 10
    smoothness_grid: tuple | None = None

    def __post_init__(self):
        if self.name not in ESTIMATOR_NAMES:
            raise ValidationError(
                f"unknown estimator {self.name!r}, expected one of {ESTIMATOR_NAMES}"
            )
        if int(self.budget) < 1:
            raise ValidationError(f"budget must be at least 1, got {self.budget}")
        if int(self.J) < 2:
            raise ValidationError(f"fold count must be at least 2, got {self.J}")
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "J", int(self.J))
        if self.smoothness_grid is not None:
            grid = tuple(
                tuple(g) if isinstance(g, (list, tuple)) else g for g in self.smoothness_grid
            )
            object.__setattr__(self, "smoothness_grid", grid)

    @property
    def criterion(self) -> str:
        return "information" if self.name == "mtgp_info" else "likelihood"

    @property
    def structure(self) -> str:
        # separate_gps reuses the augmented machinery one arm at a time
        return "multitask" if self.name in ("mtgp_info", "mtgp_lik") else "augmented"

    def eb_config(self, seed: int) -> EbConfig:
        return EbConfig(
            criterion=self.criterion,
            smoothness_grid=self.smoothness_grid,
            budget=self.budget,
            J=self.J,
            seed=int(seed),
        )

    def to_json_dict(self) -> dict:
        out = {"name": self.name, "budget": self.budget, "J": self.J}
        if self.smoothness_grid is not None:
            out["smoothness_grid"] = [
                list(g) if isinstance(g, tuple) else g for g in self.smoothness_grid
            ]
        return out


_SPEC_REQUIRED = {"name"}
_SPEC_OPTIONAL = {"budget", "J", "smoothness_grid"}


def estimator_spec_from_json_dict(obj: dict) -> EstimatorSpec:
    if not isinstance(obj, dict):
        raise ValidationError("estimator spec: expected an object")
    missing = _SPEC_REQUIRED - obj.keys()
    extra = obj.keys() - _SPEC_REQUIRED - _SPEC_OPTIONAL
    if missing:
        raise ValidationError(f"estimator spec: missing fields {sorted(missing)}")
    if extra:
        raise ValidationError(f"estimator spec: unknown fields {sorted(extra)}")
    grid = obj.get("smoothness_grid")
    if grid is not None:
        grid = tuple(tuple(g) if isinstance(g, list) else g for g in grid)
    return EstimatorSpec(
        name=obj["name"],
        budget=obj.get("budget", 24),
        J=obj.get("J", 10),
        smoothness_grid=grid,
    )


@dataclass(frozen=True)
class FittedEstimator:
    """A fitted roster entry: point predictions of the effect plus any
    search reports produced along the way (empty for the baselines)."""

    spec: EstimatorSpec
    predict_fn: object
    reports: tuple = ()

    def predict_ite(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError(f"query features must be 2-d, got shape {X.shape}")
        return np.asarray(self.predict_fn(X), dtype=np.float64)


def _single_arm_plan(n: int, seed: int) -> SplitPlan:
    empty = np.array([], dtype=np.int64)
    labels = 1 + (np.arange(n, dtype=np.int64) % 2)
    return SplitPlan(np.arange(n, dtype=np.int64), empty, empty, labels, int(seed))


def fit_estimator(spec: EstimatorSpec, ds, split: SplitPlan, seed: int = 0) -> FittedEstimator:
    """Fit one roster entry on the train rows of `split`.

    GP entries run the full hyperparameter search; `separate_gps` runs the
    likelihood search once per treatment arm on that arm's rows only.
    """
    view = ds.estimator_view() if hasattr(ds, "estimator_view") else ds
    train = view.take(split.train_idx)
    if train.n == 0:
        raise ValidationError("training split is empty")
    name = spec.name

    if name == "zero":
        return FittedEstimator(spec, lambda X: np.zeros(X.shape[0]))

    if name == "mean_diff":
        means = []
        for arm in (0, 1):
            rows = train.arm_indices(arm)
            if rows.size == 0:
                raise ValidationError(f"treatment arm {arm} has no train subjects")
            means.append(float(np.mean(train.outcomes[rows])))
        ate = means[1] - means[0]
        return FittedEstimator(spec, lambda X: np.full(X.shape[0], ate))

    if name in ("mtgp_info", "mtgp_lik", "gp_aug_lik"):
        report = select_hyperparameters(ds, split, spec.eb_config(seed), spec.structure)
        model = report.model
        return FittedEstimator(spec, lambda X: predict(model, X).ite_mean, (report,))

    # separate_gps: one augmented-likelihood fit per arm; with a constant
    # treatment column the kernel's task coordinate is inert, so each fit
    # is an ordinary single-task GP on that arm's rows
    reports = []
    models = []
    for arm in (0, 1):
        sub = train.take(train.arm_indices(arm))
        if sub.n < 2:
            raise ValidationError(
                f"treatment arm {arm} needs at least 2 train subjects, got {sub.n}"
            )
        rep = select_hyperparameters(sub, _single_arm_plan(sub.n, seed), spec.eb_config(seed), "augmented")
        reports.append(rep)
        models.append(rep.model)
    m0, m1 = models

    def ite(X):
        return predict(m1, X).mean1 - predict(m0, X).mean0

    return FittedEstimator(spec, ite, tuple(reports))
