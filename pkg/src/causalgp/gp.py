"""Exact Gaussian-process inference over the pair of outcome surfaces.

Two prior structures share one inference path:

  * "augmented": a single GP over the input (x, w), with the treatment
    indicator appended as an extra coordinate carrying its own length-scale.
  * "multitask": a vector-valued GP (f0, f1) under the two-task
    coregionalization kernel, observed at (x_i, w_i) so the training Gram
    is n x n with task-indexed entries.

Outcomes are centered before inference (per-arm means for the multitask
structure, the global mean for the augmented one) and the centers are added
back to the reported means.  The evidence is computed on the centered
outcomes.  Factorization uses a Cholesky with an escalating jitter ladder;
observation noise is floored at NOISE_FLOOR so interpolation stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .dataset import EstimatorView
from .errors import NumericalError, ShapeError, ValidationError
from .kernels import (
    LmcKernelSpec,
    ScalarKernelSpec,
    gram,
    kernel_spec_from_json_dict,
    scalar_kernel_matrix,
    scalar_kernel_rowwise,
)

__all__ = [
    "NOISE_FLOOR",
    "MODEL_FORMAT_VERSION",
    "AugmentedPrior",
    "MultiTaskPrior",
    "PosteriorSummary",
    "FittedModel",
    "SingleTaskModel",
    "fit_posterior",
    "predict",
    "log_marginal_likelihood",
    "fit_single_task",
    "prior_to_json_dict",
    "prior_from_json_dict",
    "model_to_json_dict",
    "model_from_json_dict",
]

NOISE_FLOOR = 1e-6
MODEL_FORMAT_VERSION = 1


def _checked_noise(value, name: str) -> float:
    v = float(value)
    if not (v >= 0.0 and math.isfinite(v)):
        raise ValidationError(f"{name} must be finite and non-negative, got {value!r}")
    return max(v, NOISE_FLOOR)


@dataclass(frozen=True)
class AugmentedPrior:
    """Single GP over (x, w); the kernel's last length-scale belongs to w."""

    kernel: ScalarKernelSpec
    noise: float

    def __post_init__(self):
        object.__setattr__(self, "noise", _checked_noise(self.noise, "noise"))

    structure = "augmented"

    def noise_for_arm(self, arm: int) -> float:
        return self.noise


@dataclass(frozen=True)
class MultiTaskPrior:
    """Coregionalized pair (f0, f1) with per-arm observation noise."""

    kernel: LmcKernelSpec
    noise0: float
    noise1: float

    def __post_init__(self):
        object.__setattr__(self, "noise0", _checked_noise(self.noise0, "noise0"))
        object.__setattr__(self, "noise1", _checked_noise(self.noise1, "noise1"))

    structure = "multitask"

    def noise_for_arm(self, arm: int) -> float:
        return self.noise1 if arm == 1 else self.noise0


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """Joint posterior moments of (f0, f1) at the query points."""

    mean0: np.ndarray
    mean1: np.ndarray
    var0: np.ndarray
    var1: np.ndarray
    cov01: np.ndarray
    ite_mean: np.ndarray
    ite_var: np.ndarray


@dataclass(frozen=True, eq=False)
class FittedModel:
    prior: AugmentedPrior | MultiTaskPrior
    features: np.ndarray
    treatments: np.ndarray
    outcomes: np.ndarray
    centers: tuple[float, float]
    L: np.ndarray
    alpha: np.ndarray
    jitter: float
    lml: float

    def predict(self, Xq) -> PosteriorSummary:
        return predict(self, Xq)


def _cholesky_with_jitter(M: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky of M, escalating a diagonal jitter until it succeeds.

    Rungs: no jitter, then 1e-10 .. 1e-4 times mean(diag) in decade steps.
    """
    n = M.shape[0]
    scale = float(np.trace(M)) / n
    if not (scale > 0.0):
        scale = 1.0
    ladder = [0.0] + [scale * 10.0**e for e in range(-10, -3)]
    for jitter in ladder:
        try:
            A = M if jitter == 0.0 else M + jitter * np.eye(n)
            return np.linalg.cholesky(A), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"Cholesky failed for a {n}x{n} covariance even with jitter up to "
        f"{ladder[-1]:.3e} (mean diagonal {scale:.3e})"
    )


def _augment(X: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.hstack([X, w.astype(np.float64)[:, None]])


def _centers_and_residual(prior, w: np.ndarray, y: np.ndarray):
    if prior.structure == "multitask":
        m = [0.0, 0.0]
        for arm in (0, 1):
            vals = y[w == arm]
            if vals.size:
                m[arm] = float(vals.mean())
        centers = (m[0], m[1])
    else:
        g = float(y.mean())
        centers = (g, g)
    z = y - np.where(w == 1, centers[1], centers[0])
    return centers, z


def _training_gram(prior, X: np.ndarray, w: np.ndarray) -> np.ndarray:
    if prior.structure == "multitask":
        if prior.kernel.dim != X.shape[1]:
            raise ShapeError(
                f"kernel covers {prior.kernel.dim} coordinates, features have {X.shape[1]}"
            )
        return gram(prior.kernel, X, X, w, w)
    if prior.kernel.dim != X.shape[1] + 1:
        raise ShapeError(
            f"kernel covers {prior.kernel.dim} coordinates, need {X.shape[1]} "
            "features plus the treatment coordinate"
        )
    Xa = _augment(X, w)
    return scalar_kernel_matrix(prior.kernel, Xa, Xa)


def fit_posterior(prior, view: EstimatorView) -> FittedModel:
    """Factorize the training covariance and precompute the posterior state."""
    X, w, y = view.features, view.treatments, view.outcomes
    if len(y) == 0:
        raise ValidationError("cannot fit a posterior with zero observations")
    K = _training_gram(prior, X, w)
    noise_diag = np.where(w == 1, prior.noise_for_arm(1), prior.noise_for_arm(0))
    centers, z = _centers_and_residual(prior, w, y)
    L, jitter = _cholesky_with_jitter(K + np.diag(noise_diag))
    alpha = cho_solve((L, True), z)
    n = len(y)
    lml = float(
        -0.5 * z @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2.0 * math.pi)
    )
    return FittedModel(prior, X, w, y, centers, L, alpha, jitter, lml)


def _cross_and_prior(model: FittedModel, Xq: np.ndarray):
    """Train-query cross covariances per arm and the prior moments at Xq."""
    prior, X, w = model.prior, model.features, model.treatments
    m = Xq.shape[0]
    if prior.structure == "multitask":
        spec = prior.kernel
        Ks0 = gram(spec, X, Xq, w, np.zeros(m, dtype=np.int64))
        Ks1 = gram(spec, X, Xq, w, np.ones(m, dtype=np.int64))
        p0 = np.full(m, spec.task_prior_variance(0))
        p1 = np.full(m, spec.task_prior_variance(1))
        p01 = np.full(m, spec.a01 * spec.k0.variance + spec.b01 * spec.k1.variance)
    else:
        spec = prior.kernel
        Xa = _augment(X, w)
        Q0 = _augment(Xq, np.zeros(m))
        Q1 = _augment(Xq, np.ones(m))
        Ks0 = scalar_kernel_matrix(spec, Xa, Q0)
        Ks1 = scalar_kernel_matrix(spec, Xa, Q1)
        p0 = np.full(m, spec.variance)
        p1 = np.full(m, spec.variance)
        p01 = scalar_kernel_rowwise(spec, Q0, Q1)
    return Ks0, Ks1, p0, p1, p01


def predict(model: FittedModel, Xq) -> PosteriorSummary:
    Xq = np.asarray(Xq, dtype=np.float64)
    if Xq.ndim != 2:
        raise ShapeError(f"query points must be 2-d, got shape {Xq.shape}")
    if Xq.shape[1] != model.features.shape[1]:
        raise ShapeError(
            f"query points have {Xq.shape[1]} features, model was fit with "
            f"{model.features.shape[1]}"
        )
    Ks0, Ks1, p0, p1, p01 = _cross_and_prior(model, Xq)
    mean0 = model.centers[0] + Ks0.T @ model.alpha
    mean1 = model.centers[1] + Ks1.T @ model.alpha
    V0 = solve_triangular(model.L, Ks0, lower=True)
    V1 = solve_triangular(model.L, Ks1, lower=True)
    var0 = p0 - np.einsum("iq,iq->q", V0, V0)
    var1 = p1 - np.einsum("iq,iq->q", V1, V1)
    cov01 = p01 - np.einsum("iq,iq->q", V0, V1)
    ite_var = var0 + var1 - 2.0 * cov01
    return PosteriorSummary(
        mean0=mean0,
        mean1=mean1,
        var0=np.clip(var0, 0.0, None),
        var1=np.clip(var1, 0.0, None),
        cov01=cov01,
        ite_mean=mean1 - mean0,
        ite_var=np.clip(ite_var, 0.0, None),
    )


def log_marginal_likelihood(prior, view: EstimatorView) -> float:
    return fit_posterior(prior, view).lml


# --------------------------------------------------------------------------
# Plain single-surface GP, used for per-arm baseline fits


@dataclass(frozen=True, eq=False)
class SingleTaskModel:
    kernel: ScalarKernelSpec
    noise: float
    X: np.ndarray
    center: float
    L: np.ndarray
    alpha: np.ndarray
    lml: float

    def predict(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        Xq = np.asarray(Xq, dtype=np.float64)
        Ks = scalar_kernel_matrix(self.kernel, self.X, Xq)
        mean = self.center + Ks.T @ self.alpha
        V = solve_triangular(self.L, Ks, lower=True)
        var = self.kernel.variance - np.einsum("iq,iq->q", V, V)
        return mean, np.clip(var, 0.0, None)


def fit_single_task(kernel: ScalarKernelSpec, noise, X, y) -> SingleTaskModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise ValidationError("cannot fit a posterior with zero observations")
    if kernel.dim != X.shape[1]:
        raise ShapeError(
            f"kernel covers {kernel.dim} coordinates, features have {X.shape[1]}"
        )
    noise = _checked_noise(noise, "noise")
    K = scalar_kernel_matrix(kernel, X, X)
    center = float(y.mean())
    z = y - center
    L, _ = _cholesky_with_jitter(K + noise * np.eye(len(y)))
    alpha = cho_solve((L, True), z)
    lml = float(
        -0.5 * z @ alpha
        - np.sum(np.log(np.diag(L)))
        - 0.5 * len(y) * math.log(2.0 * math.pi)
    )
    return SingleTaskModel(kernel, noise, X, center, L, alpha, lml)


# --------------------------------------------------------------------------
# JSON (strict; a fitted model persists its prior and training set and is
# refit on load, so the stored form stays small and version-stable)

_AUGMENTED_FIELDS = {"structure", "kernel", "noise"}
_MULTITASK_FIELDS = {"structure", "kernel", "noise0", "noise1"}
_MODEL_FIELDS = {"format_version", "prior", "features", "treatments", "outcomes"}


def _check_fields(d: dict, required: set, what: str) -> None:
    unknown = set(d) - required
    if unknown:
        raise ValidationError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ValidationError(f"{what}: missing field(s) {sorted(missing)}")


def prior_to_json_dict(prior) -> dict:
    if prior.structure == "multitask":
        return {
            "structure": "multitask",
            "kernel": prior.kernel.to_json_dict(),
            "noise0": prior.noise0,
            "noise1": prior.noise1,
        }
    return {
        "structure": "augmented",
        "kernel": prior.kernel.to_json_dict(),
        "noise": prior.noise,
    }


def prior_from_json_dict(d: dict):
    if not isinstance(d, dict) or "structure" not in d:
        raise ValidationError("prior: expected an object with a 'structure' field")
    structure = d["structure"]
    if structure == "multitask":
        _check_fields(d, _MULTITASK_FIELDS, "multitask prior")
        kernel = kernel_spec_from_json_dict(d["kernel"])
        if not isinstance(kernel, LmcKernelSpec):
            raise ValidationError("multitask prior requires an 'lmc' kernel")
        return MultiTaskPrior(kernel, float(d["noise0"]), float(d["noise1"]))
    if structure == "augmented":
        _check_fields(d, _AUGMENTED_FIELDS, "augmented prior")
        kernel = kernel_spec_from_json_dict(d["kernel"])
        if not isinstance(kernel, ScalarKernelSpec):
            raise ValidationError("augmented prior requires a 'scalar' kernel")
        return AugmentedPrior(kernel, float(d["noise"]))
    raise ValidationError(f"prior: unknown structure {structure!r}")


def model_to_json_dict(model: FittedModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "prior": prior_to_json_dict(model.prior),
        "features": [[float(v) for v in row] for row in model.features],
        "treatments": [int(v) for v in model.treatments],
        "outcomes": [float(v) for v in model.outcomes],
    }


def model_from_json_dict(d: dict) -> FittedModel:
    if not isinstance(d, dict):
        raise ValidationError("model: expected an object")
    _check_fields(d, _MODEL_FIELDS, "model")
    if d["format_version"] != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"unsupported format_version {d['format_version']!r}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    prior = prior_from_json_dict(d["prior"])
    view = EstimatorView(
        np.asarray(d["features"], dtype=np.float64),
        np.asarray(d["treatments"], dtype=np.int64),
        np.asarray(d["outcomes"], dtype=np.float64),
    )
    return fit_posterior(prior, view)
