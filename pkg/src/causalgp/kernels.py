"""Stationary scalar kernels and the two-task coregionalization kernel.

Scalar kernels: Matérn with half-integer smoothness (1/2, 3/2, 5/2) and the
squared-exponential, both with per-dimension (ARD) length-scales.  Writing
r for the ARD-scaled Euclidean distance:

    matern 1/2:  v * exp(-r)
    matern 3/2:  v * (1 + sqrt(3) r) * exp(-sqrt(3) r)
    matern 5/2:  v * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r)
    sq. exp.:    v * exp(-r^2 / 2)

The two-task kernel couples a pair of outcome surfaces (f0, f1) through

    K(x, x') = A k0(x, x') + B k1(x, x'),
    A = [[a00^2, a01], [a01, eps]],  B = [[eps, b01], [b01, b11]],

where eps is a small fixed positive guard.  Cross terms are constructed
from correlations rho in [-1, 1] as a01 = rho_a * a00 * sqrt(eps) and
b01 = rho_b * sqrt(b11 * eps), which makes A and B positive semi-definite
by construction, hence the assembled Gram of any point/task set is PSD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ShapeError, ValidationError

__all__ = [
    "ScalarKernelSpec",
    "LmcKernelSpec",
    "eval_scalar",
    "eval_lmc",
    "gram",
    "scalar_kernel_matrix",
    "scalar_kernel_rowwise",
    "profile_values",
    "kernel_spec_from_json_dict",
]

_MATERN_NUS = (0.5, 1.5, 2.5)
_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class ScalarKernelSpec:
    """A stationary kernel with ARD length-scales.

    family is "matern" (nu in {0.5, 1.5, 2.5}) or "squared_exponential"
    (nu must be None).  length_scales has one positive entry per input
    dimension; variance is the value at zero distance.
    """

    family: str
    nu: float | None
    length_scales: tuple[float, ...]
    variance: float

    def __post_init__(self):
        if self.family not in ("matern", "squared_exponential"):
            raise ValidationError(f"unknown kernel family {self.family!r}")
        if self.family == "matern":
            if self.nu not in _MATERN_NUS:
                raise ValidationError(
                    f"matern smoothness must be one of {_MATERN_NUS}, got {self.nu!r}"
                )
        elif self.nu is not None:
            raise ValidationError("squared_exponential takes no smoothness parameter")
        ls = tuple(float(v) for v in self.length_scales)
        object.__setattr__(self, "length_scales", ls)
        if not ls or any(not (v > 0.0) for v in ls):
            raise ValidationError(f"length_scales must all be positive, got {ls}")
        if not (float(self.variance) > 0.0):
            raise ValidationError(f"variance must be positive, got {self.variance!r}")
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "nu", None if self.nu is None else float(self.nu))

    @property
    def dim(self) -> int:
        return len(self.length_scales)

    def to_json_dict(self) -> dict:
        return {
            "kind": "scalar",
            "family": self.family,
            "nu": self.nu,
            "length_scales": list(self.length_scales),
            "variance": self.variance,
        }


def profile_values(family: str, nu: float | None, variance: float, r2: np.ndarray) -> np.ndarray:
    """Kernel values from squared ARD-scaled distances (vectorized)."""
    r2 = np.asarray(r2, dtype=np.float64)
    if family == "squared_exponential":
        return variance * np.exp(-0.5 * r2)
    r = np.sqrt(r2)
    if nu == 0.5:
        return variance * np.exp(-r)
    if nu == 1.5:
        return variance * (1.0 + _SQRT3 * r) * np.exp(-_SQRT3 * r)
    if nu == 2.5:
        return variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)
    raise ValidationError(f"no closed form for nu={nu!r}")


def _check_points(spec_dim: int, X: np.ndarray, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got shape {X.shape}")
    if X.shape[1] != spec_dim:
        raise ShapeError(f"{name} has {X.shape[1]} columns, kernel expects {spec_dim}")
    return X


def scalar_kernel_matrix(spec: ScalarKernelSpec, X, Xp) -> np.ndarray:
    X = _check_points(spec.dim, X, "X")
    Xp = _check_points(spec.dim, Xp, "X'")
    ls = np.asarray(spec.length_scales)
    r2 = cdist(X / ls, Xp / ls, "sqeuclidean")
    return profile_values(spec.family, spec.nu, spec.variance, r2)


def scalar_kernel_rowwise(spec: ScalarKernelSpec, X, Xp) -> np.ndarray:
    """k(x_i, x'_i) for paired rows (the diagonal of the cross matrix)."""
    X = _check_points(spec.dim, X, "X")
    Xp = _check_points(spec.dim, Xp, "X'")
    if X.shape[0] != Xp.shape[0]:
        raise ShapeError("rowwise evaluation needs equally many rows on both sides")
    ls = np.asarray(spec.length_scales)
    r2 = np.sum(((X - Xp) / ls) ** 2, axis=1)
    return profile_values(spec.family, spec.nu, spec.variance, r2)


def eval_scalar(spec: ScalarKernelSpec, x, xp) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    xp = np.asarray(xp, dtype=np.float64).reshape(1, -1)
    return float(scalar_kernel_matrix(spec, x, xp)[0, 0])


@dataclass(frozen=True)
class LmcKernelSpec:
    """Two-task coregionalization kernel; see the module docstring.

    a00 and b11 set the task variances (arm 0 carries a00^2 on k0, arm 1
    carries b11 on k1); a01/a10 and b01/b10 are the symmetric cross terms,
    bounded by the PSD guards a01^2 <= a00^2 * eps and b01^2 <= b11 * eps.
    """

    k0: ScalarKernelSpec
    k1: ScalarKernelSpec
    a00: float
    b11: float
    a01: float
    a10: float
    b01: float
    b10: float
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.k0.dim != self.k1.dim:
            raise ShapeError("k0 and k1 must share the input dimension")
        for name in ("a00", "b11", "a01", "a10", "b01", "b10", "epsilon"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.a00 > 0.0 and self.b11 > 0.0):
            raise ValidationError("task variances a00 and b11 must be positive")
        if not (self.epsilon > 0.0):
            raise ValidationError("epsilon must be a positive PSD guard")
        if self.a01 != self.a10 or self.b01 != self.b10:
            raise ValidationError("cross terms must be symmetric (a01=a10, b01=b10)")
        tol = 1.0 + 1e-9
        if self.a01**2 > self.a00**2 * self.epsilon * tol:
            raise ValidationError(
                f"cross term a01={self.a01!r} violates a01^2 <= a00^2*eps"
            )
        if self.b01**2 > self.b11 * self.epsilon * tol:
            raise ValidationError(
                f"cross term b01={self.b01!r} violates b01^2 <= b11*eps"
            )

    @classmethod
    def from_correlations(
        cls,
        k0: ScalarKernelSpec,
        k1: ScalarKernelSpec,
        a00: float,
        b11: float,
        rho_a: float,
        rho_b: float,
        epsilon: float = 1e-4,
    ) -> "LmcKernelSpec":
        if not (-1.0 <= rho_a <= 1.0) or not (-1.0 <= rho_b <= 1.0):
            raise ValidationError(f"correlations must lie in [-1, 1], got {(rho_a, rho_b)}")
        a01 = rho_a * a00 * math.sqrt(epsilon)
        b01 = rho_b * math.sqrt(b11 * epsilon)
        return cls(k0, k1, a00, b11, a01, a01, b01, b01, epsilon)

    @property
    def dim(self) -> int:
        return self.k0.dim

    def coefficient_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.array([[self.a00**2, self.a01], [self.a10, self.epsilon]])
        B = np.array([[self.epsilon, self.b01], [self.b10, self.b11]])
        return A, B

    def task_prior_variance(self, task: int) -> float:
        """Prior variance of f_task at any point (stationary diagonal)."""
        A, B = self.coefficient_matrices()
        return float(A[task, task] * self.k0.variance + B[task, task] * self.k1.variance)

    def to_json_dict(self) -> dict:
        return {
            "kind": "lmc",
            "k0": self.k0.to_json_dict(),
            "k1": self.k1.to_json_dict(),
            "a00": self.a00,
            "b11": self.b11,
            "a01": self.a01,
            "a10": self.a10,
            "b01": self.b01,
            "b10": self.b10,
            "epsilon": self.epsilon,
        }


def eval_lmc(spec: LmcKernelSpec, x, xp) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    xp = np.asarray(xp, dtype=np.float64).reshape(1, -1)
    v0 = scalar_kernel_matrix(spec.k0, x, xp)[0, 0]
    v1 = scalar_kernel_matrix(spec.k1, x, xp)[0, 0]
    A, B = spec.coefficient_matrices()
    return A * v0 + B * v1


def _check_tasks(tasks, n: int, name: str) -> np.ndarray:
    t = np.asarray(tasks)
    if t.shape != (n,):
        raise ShapeError(f"{name} must have shape ({n},), got {t.shape}")
    ti = t.astype(np.int64)
    if np.any((ti != 0) & (ti != 1)):
        raise ValidationError(f"{name} entries must be 0 or 1")
    return ti


def gram(spec: LmcKernelSpec, X, Xp, tasks, tasks_p) -> np.ndarray:
    """Covariance between task-indexed observations: entry (i, j) is
    [K(x_i, x'_j)]_{tasks_i, tasks'_j}."""
    X = _check_points(spec.dim, X, "X")
    Xp = _check_points(spec.dim, Xp, "X'")
    t = _check_tasks(tasks, X.shape[0], "tasks")
    tp = _check_tasks(tasks_p, Xp.shape[0], "tasks'")
    K0 = scalar_kernel_matrix(spec.k0, X, Xp)
    K1 = scalar_kernel_matrix(spec.k1, X, Xp)
    A, B = spec.coefficient_matrices()
    return A[np.ix_(t, tp)] * K0 + B[np.ix_(t, tp)] * K1


def lmc_rowwise(spec: LmcKernelSpec, X, Xp, task: int, task_p: int) -> np.ndarray:
    """[K(x_i, x'_i)]_{task, task_p} for paired rows."""
    v0 = scalar_kernel_rowwise(spec.k0, X, Xp)
    v1 = scalar_kernel_rowwise(spec.k1, X, Xp)
    A, B = spec.coefficient_matrices()
    return A[task, task_p] * v0 + B[task, task_p] * v1


# --------------------------------------------------------------------------
# JSON (strict field lists; unknown fields rejected)

_SCALAR_FIELDS = {"kind", "family", "nu", "length_scales", "variance"}
_LMC_FIELDS = {"kind", "k0", "k1", "a00", "b11", "a01", "a10", "b01", "b10", "epsilon"}


def _check_fields(d: dict, required: set, what: str) -> None:
    unknown = set(d) - required
    if unknown:
        raise ValidationError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ValidationError(f"{what}: missing field(s) {sorted(missing)}")


def kernel_spec_from_json_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("kernel spec: expected an object with a 'kind' field")
    kind = d["kind"]
    if kind == "scalar":
        _check_fields(d, _SCALAR_FIELDS, "scalar kernel spec")
        return ScalarKernelSpec(
            d["family"],
            None if d["nu"] is None else float(d["nu"]),
            tuple(d["length_scales"]),
            float(d["variance"]),
        )
    if kind == "lmc":
        _check_fields(d, _LMC_FIELDS, "lmc kernel spec")
        return LmcKernelSpec(
            kernel_spec_from_json_dict(d["k0"]),
            kernel_spec_from_json_dict(d["k1"]),
            float(d["a00"]),
            float(d["b11"]),
            float(d["a01"]),
            float(d["a10"]),
            float(d["b01"]),
            float(d["b10"]),
            float(d["epsilon"]),
        )
    raise ValidationError(f"kernel spec: unknown kind {kind!r}")
