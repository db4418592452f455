"""Synthetic observational datasets with controllable surface regularity
and selection bias.

A generator draws features uniformly on [0,1]^d, assigns treatment from a
clamped propensity (so overlap holds by construction), and produces both
potential outcomes from a pair of surfaces, each depending only on its own
set of relevant feature dimensions.  Surfaces can be exact draws from a
Matérn GP on a lattice (interpolated multilinearly off-lattice), or plain
polynomial / linear forms.  Treatment assignment reads features only, so
unconfoundedness holds by construction; regenerating assignments from a
different stream leaves every potential outcome unchanged.

Large lattices fall back from an exact Cholesky draw to a random-Fourier-
feature approximation of the same Matérn covariance (frequencies are
multivariate-t with 2*nu degrees of freedom); the approximation is
evaluated on the lattice so both paths share the interpolation semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import expit

from .dataset import ObservationalDataset
from .errors import ShapeError, ValidationError
from .gp import _cholesky_with_jitter
from .kernels import ScalarKernelSpec, scalar_kernel_matrix

__all__ = [
    "GpDrawSurface",
    "PolynomialSurface",
    "LinearSurface",
    "ConstantPropensity",
    "LogisticPropensity",
    "GeneratorConfig",
    "Realization",
    "realize",
    "generate",
    "gp_draw_surface",
    "IhdpRealization",
    "ihdp_realization",
    "ihdp_analog",
    "generator_config_from_json_dict",
]

_MATERN_LEVELS = (0.5, 1.5, 2.5)
LATTICE_NODE_CAP = 1_000_000
EXACT_DRAW_CAP = 2048  # above this many nodes, switch to random Fourier features
_RFF_FEATURES = 512
_RFF_BATCH = 65536


# --------------------------------------------------------------------------
# Configuration types


@dataclass(frozen=True)
class GpDrawSurface:
    nu: float
    length_scale: float
    variance: float
    resolution: int = 64

    def __post_init__(self):
        if float(self.nu) not in _MATERN_LEVELS:
            raise ValidationError(f"gp draw smoothness must be in {_MATERN_LEVELS}")
        if not (float(self.length_scale) > 0.0):
            raise ValidationError("gp draw length_scale must be positive")
        if not (float(self.variance) >= 0.0):
            raise ValidationError("gp draw variance must be >= 0")
        if int(self.resolution) < 2:
            raise ValidationError("gp draw resolution must be >= 2")
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "length_scale", float(self.length_scale))
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "resolution", int(self.resolution))

    def to_json_dict(self) -> dict:
        return {
            "kind": "gp_draw",
            "nu": self.nu,
            "length_scale": self.length_scale,
            "variance": self.variance,
            "resolution": self.resolution,
        }


@dataclass(frozen=True)
class PolynomialSurface:
    """f(x) = sum_k coeffs[k] * s^k with s the sum of the relevant coords."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise ValidationError("polynomial surface needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    def to_json_dict(self) -> dict:
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class LinearSurface:
    """f(x) = weights . x[relevant dims] + intercept."""

    weights: tuple[float, ...]
    intercept: float = 0.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValidationError("linear surface needs at least one weight")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    def to_json_dict(self) -> dict:
        return {"kind": "linear", "weights": list(self.weights), "intercept": self.intercept}


@dataclass(frozen=True)
class ConstantPropensity:
    gamma: float

    def __post_init__(self):
        if not (0.0 <= float(self.gamma) <= 1.0):
            raise ValidationError(f"constant propensity must lie in [0, 1], got {self.gamma!r}")
        object.__setattr__(self, "gamma", float(self.gamma))

    def to_json_dict(self) -> dict:
        return {"kind": "constant", "gamma": self.gamma}


@dataclass(frozen=True)
class LogisticPropensity:
    """gamma(x) = expit(steepness * (weights . x + bias)); steepness 0 gives
    a randomized trial at gamma = 1/2."""

    weights: tuple[float, ...]
    bias: float = 0.0
    steepness: float = 1.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValidationError("logistic propensity needs at least one weight")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "steepness", float(self.steepness))

    def to_json_dict(self) -> dict:
        return {
            "kind": "logistic",
            "weights": list(self.weights),
            "bias": self.bias,
            "steepness": self.steepness,
        }


def _check_dims(dims, d: int, name: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in dims)
    if not out:
        raise ValidationError(f"{name} must be nonempty")
    if len(set(out)) != len(out):
        raise ValidationError(f"{name} has repeated entries: {out}")
    if any(v < 1 or v > d for v in out):
        raise ValidationError(f"{name} entries must lie in 1..{d}, got {out}")
    return out


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    d: int
    surface0: GpDrawSurface | PolynomialSurface | LinearSurface
    surface1: GpDrawSurface | PolynomialSurface | LinearSurface
    relevant_dims0: tuple[int, ...]
    relevant_dims1: tuple[int, ...]
    noise0: float
    noise1: float
    propensity: ConstantPropensity | LogisticPropensity
    overlap_clamp: tuple[float, float] = (0.05, 0.95)
    seed: int = 0

    def __post_init__(self):
        if int(self.n) < 1 or int(self.d) < 1:
            raise ValidationError("n and d must be >= 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "relevant_dims0", _check_dims(self.relevant_dims0, self.d, "relevant_dims0"))
        object.__setattr__(self, "relevant_dims1", _check_dims(self.relevant_dims1, self.d, "relevant_dims1"))
        for name in ("noise0", "noise1"):
            v = float(getattr(self, name))
            if not (v >= 0.0):
                raise ValidationError(f"{name} must be >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        lo, hi = (float(v) for v in self.overlap_clamp)
        if not (0.0 < lo <= hi < 1.0):
            raise ValidationError(
                f"overlap_clamp must satisfy 0 < lo <= hi < 1, got {(lo, hi)}"
            )
        object.__setattr__(self, "overlap_clamp", (lo, hi))
        object.__setattr__(self, "seed", int(self.seed))

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "surface0": self.surface0.to_json_dict(),
            "surface1": self.surface1.to_json_dict(),
            "relevant_dims0": list(self.relevant_dims0),
            "relevant_dims1": list(self.relevant_dims1),
            "noise0": self.noise0,
            "noise1": self.noise1,
            "propensity": self.propensity.to_json_dict(),
            "overlap_clamp": list(self.overlap_clamp),
            "seed": self.seed,
        }


# --------------------------------------------------------------------------
# GP lattice surfaces


class LatticeSurface:
    """GP draw on a lattice over the relevant dims, multilinear off-lattice."""

    def __init__(self, dims: tuple[int, ...], resolution: int, values: np.ndarray, draw_method: str):
        self.dims = dims
        self.resolution = resolution
        self.draw_method = draw_method
        k = len(dims)
        axes = tuple(np.linspace(0.0, 1.0, resolution) for _ in range(k))
        self._interp = RegularGridInterpolator(
            axes, values.reshape((resolution,) * k), method="linear",
            bounds_error=False, fill_value=None,
        )

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ShapeError(f"surface expects 2-d points, got shape {X.shape}")
        need = max(self.dims)
        if X.shape[1] < need:
            raise ShapeError(
                f"surface reads coordinate x{need} but points have {X.shape[1]} columns"
            )
        cols = [d - 1 for d in self.dims]
        return np.asarray(self._interp(X[:, cols]), dtype=np.float64)


class ZeroSurface:
    draw_method = "zero"

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.zeros(X.shape[0])


def _lattice_nodes(k: int, resolution: int) -> np.ndarray:
    axes = [np.linspace(0.0, 1.0, resolution)] * k
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _rff_lattice_values(nu, ell, sigma2, nodes, rng) -> np.ndarray:
    m = _RFF_FEATURES
    k = nodes.shape[1]
    z = rng.standard_normal((m, k))
    g = rng.chisquare(df=2.0 * nu, size=m)
    freqs = (z / ell) * np.sqrt(2.0 * nu / g)[:, None]
    phases = rng.uniform(0.0, 2.0 * math.pi, size=m)
    amps = rng.standard_normal(m)
    scale = math.sqrt(2.0 * sigma2 / m)
    out = np.empty(nodes.shape[0])
    for start in range(0, nodes.shape[0], _RFF_BATCH):
        block = nodes[start:start + _RFF_BATCH]
        out[start:start + _RFF_BATCH] = scale * (np.cos(block @ freqs.T + phases) @ amps)
    return out


def gp_draw_surface(nu, length_scale, variance, dims, grid_resolution: int = 64, seed=0):
    """Deterministic Matérn GP draw over the given 1-based feature dims.

    Node counts above EXACT_DRAW_CAP use the Fourier-feature approximation;
    resolution^|dims| beyond LATTICE_NODE_CAP is rejected.
    """
    dims = tuple(int(v) for v in dims)
    if not dims:
        raise ValidationError("gp draw needs at least one relevant dimension")
    if any(v < 1 for v in dims) or len(set(dims)) != len(dims):
        raise ValidationError(f"dims must be distinct 1-based indices, got {dims}")
    k = len(dims)
    resolution = int(grid_resolution)
    if resolution < 2:
        raise ValidationError("grid_resolution must be >= 2")
    n_nodes = resolution**k
    if n_nodes > LATTICE_NODE_CAP:
        raise ValidationError(
            f"lattice would have {n_nodes} nodes, above the cap {LATTICE_NODE_CAP}; "
            "lower the resolution or the number of relevant dims"
        )
    variance = float(variance)
    if variance == 0.0:
        return ZeroSurface()
    rng = np.random.default_rng(seed)
    nodes = _lattice_nodes(k, resolution)
    if n_nodes <= EXACT_DRAW_CAP:
        spec = ScalarKernelSpec("matern", float(nu), (float(length_scale),) * k, variance)
        G = scalar_kernel_matrix(spec, nodes, nodes)
        L, _ = _cholesky_with_jitter(G)
        values = L @ rng.standard_normal(n_nodes)
        method = "exact"
    else:
        values = _rff_lattice_values(float(nu), float(length_scale), variance, nodes, rng)
        method = "rff"
    return LatticeSurface(dims, resolution, values, method)


# --------------------------------------------------------------------------
# Realizing a config into surfaces + propensity, then sampling


class _PolynomialFn:
    def __init__(self, dims, coeffs):
        self.cols = [d - 1 for d in dims]
        self.coeffs = np.asarray(coeffs)

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        s = X[:, self.cols].sum(axis=1)
        return np.polynomial.polynomial.polyval(s, self.coeffs)


class _LinearFn:
    def __init__(self, dims, weights, intercept):
        self.cols = [d - 1 for d in dims]
        self.weights = np.asarray(weights)
        self.intercept = float(intercept)

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        return X[:, self.cols] @ self.weights + self.intercept


def _build_surface(spec, dims, seed):
    if isinstance(spec, GpDrawSurface):
        return gp_draw_surface(spec.nu, spec.length_scale, spec.variance, dims,
                               spec.resolution, seed)
    if isinstance(spec, PolynomialSurface):
        return _PolynomialFn(dims, spec.coeffs)
    if isinstance(spec, LinearSurface):
        if len(spec.weights) != len(dims):
            raise ValidationError(
                f"linear surface has {len(spec.weights)} weights for "
                f"{len(dims)} relevant dims"
            )
        return _LinearFn(dims, spec.weights, spec.intercept)
    raise ValidationError(f"unknown surface spec {type(spec).__name__}")


def _build_propensity(spec, d: int):
    if isinstance(spec, ConstantPropensity):
        g = spec.gamma

        def gamma(X):
            return np.full(np.asarray(X).shape[0], g)

        return gamma
    if isinstance(spec, LogisticPropensity):
        if len(spec.weights) != d:
            raise ValidationError(
                f"logistic propensity has {len(spec.weights)} weights for d={d}"
            )
        wv = np.asarray(spec.weights)
        bias, steep = spec.bias, spec.steepness

        def gamma(X):
            return expit(steep * (np.asarray(X, dtype=np.float64) @ wv + bias))

        return gamma
    raise ValidationError(f"unknown propensity spec {type(spec).__name__}")


@dataclass(frozen=True, eq=False)
class Realization:
    """Config resolved into concrete surfaces and a propensity function."""

    config: GeneratorConfig
    f0: object
    f1: object
    gamma_raw: object
    _seed_x: np.random.SeedSequence
    _seed_noise: np.random.SeedSequence
    _seed_omega: np.random.SeedSequence

    def propensity(self, X) -> np.ndarray:
        lo, hi = self.config.overlap_clamp
        return np.clip(self.gamma_raw(X), lo, hi)

    def surface_values(self, X) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.f0(X)), np.asarray(self.f1(X))

    def sample(self, omega_seed=None) -> ObservationalDataset:
        cfg = self.config
        rng_x = np.random.default_rng(self._seed_x)
        X = rng_x.uniform(size=(cfg.n, cfg.d))
        rng_e = np.random.default_rng(self._seed_noise)
        e0 = rng_e.normal(0.0, math.sqrt(cfg.noise0), size=cfg.n)
        e1 = rng_e.normal(0.0, math.sqrt(cfg.noise1), size=cfg.n)
        omega_entropy = self._seed_omega if omega_seed is None else np.random.SeedSequence(omega_seed)
        rng_w = np.random.default_rng(omega_entropy)
        w = (rng_w.uniform(size=cfg.n) < self.propensity(X)).astype(np.int64)
        f0v, f1v = self.surface_values(X)
        y0 = f0v + e0
        y1 = f1v + e1
        outcomes = np.where(w == 1, y1, y0)
        counterfactuals = np.where(w == 1, y0, y1)
        return ObservationalDataset(
            X, w, outcomes,
            counterfactuals=counterfactuals,
            true_ite=f1v - f0v,
        )


def realize(config: GeneratorConfig) -> Realization:
    kids = np.random.SeedSequence(config.seed).spawn(5)
    f0 = _build_surface(config.surface0, config.relevant_dims0, kids[0])
    if (config.surface1, config.relevant_dims1) == (config.surface0, config.relevant_dims0):
        f1 = f0  # identical spec on identical dims shares one draw
    else:
        f1 = _build_surface(config.surface1, config.relevant_dims1, kids[1])
    gamma_raw = _build_propensity(config.propensity, config.d)
    return Realization(config, f0, f1, gamma_raw, kids[2], kids[3], kids[4])


def generate(config: GeneratorConfig, omega_seed=None) -> ObservationalDataset:
    """Draw a dataset; omega_seed regenerates assignments only (the potential
    outcomes are untouched, which is unconfoundedness by construction)."""
    return realize(config).sample(omega_seed=omega_seed)


# --------------------------------------------------------------------------
# IHDP-style analog: 25 mixed covariates, exponential control surface,
# linear treated surface, logistic selection calibrated to 139/747 treated.
# This follows the shape of the usual nonlinear response-surface benchmark
# but is an analog, not a reproduction of its exact covariates.
#
# Both surfaces are driven by a centered prognostic index (X - E[X]) @ beta;
# centering keeps the exponential arm's amplitude stable across realizations.
# Selection is confounded: the propensity direction leans on beta, so treated
# subjects concentrate where the prognostic index is large.

_IHDP_D = 25
_IHDP_UNIFORM = 6
_IHDP_TREATED_FRACTION = 139.0 / 747.0
_IHDP_CLAMP = (0.05, 0.95)
_IHDP_STEEPNESS = 3.0
_IHDP_CONFOUNDING = 0.8
_IHDP_CALIB_N = 5000
_IHDP_TARGET_ATE = 4.0


@dataclass(frozen=True, eq=False)
class IhdpRealization:
    beta: np.ndarray
    bernoulli_probs: np.ndarray
    col_means: np.ndarray
    prop_direction: np.ndarray
    prop_intercept: float
    offset_c: float
    noise0: float
    noise1: float
    _seed_x: np.random.SeedSequence
    _seed_noise: np.random.SeedSequence
    _seed_omega: np.random.SeedSequence

    def sample_features(self, n: int, rng) -> np.ndarray:
        X = np.empty((n, _IHDP_D))
        X[:, :_IHDP_UNIFORM] = rng.uniform(size=(n, _IHDP_UNIFORM))
        X[:, _IHDP_UNIFORM:] = (
            rng.uniform(size=(n, _IHDP_D - _IHDP_UNIFORM)) < self.bernoulli_probs
        ).astype(np.float64)
        return X

    def f0(self, X) -> np.ndarray:
        return np.exp((np.asarray(X) - self.col_means + 0.5) @ self.beta)

    def f1(self, X) -> np.ndarray:
        return (np.asarray(X) - self.col_means) @ self.beta - self.offset_c

    def propensity(self, X) -> np.ndarray:
        score = (np.asarray(X) - self.col_means) @ self.prop_direction
        raw = expit(_IHDP_STEEPNESS * (score + self.prop_intercept))
        return np.clip(raw, *_IHDP_CLAMP)

    def sample(self, n: int = 747, seed=None) -> ObservationalDataset:
        """Draw a dataset from this fixed realization. With seed=None the
        stored seeds are used (one canonical dataset per realization); an
        explicit seed redraws covariates, noise and assignment while the
        response surfaces and propensity stay fixed."""
        if int(n) < 1:
            raise ValidationError("n must be >= 1")
        if seed is None:
            seed_x, seed_e, seed_w = self._seed_x, self._seed_noise, self._seed_omega
        else:
            seed_x, seed_e, seed_w = np.random.SeedSequence(int(seed)).spawn(3)
        X = self.sample_features(int(n), np.random.default_rng(seed_x))
        rng_e = np.random.default_rng(seed_e)
        e0 = rng_e.normal(0.0, math.sqrt(self.noise0), size=int(n))
        e1 = rng_e.normal(0.0, math.sqrt(self.noise1), size=int(n))
        rng_w = np.random.default_rng(seed_w)
        w = (rng_w.uniform(size=int(n)) < self.propensity(X)).astype(np.int64)
        f0v, f1v = self.f0(X), self.f1(X)
        y0, y1 = f0v + e0, f1v + e1
        return ObservationalDataset(
            X, w, np.where(w == 1, y1, y0),
            counterfactuals=np.where(w == 1, y0, y1),
            true_ite=f1v - f0v,
        )


def ihdp_realization(seed: int = 0) -> IhdpRealization:
    kids = np.random.SeedSequence(int(seed)).spawn(7)
    rng_cov = np.random.default_rng(kids[0])
    probs = rng_cov.uniform(0.1, 0.9, size=_IHDP_D - _IHDP_UNIFORM)
    col_means = np.concatenate([np.full(_IHDP_UNIFORM, 0.5), probs])
    rng_beta = np.random.default_rng(kids[1])
    beta = rng_beta.choice(
        [0.0, 0.1, 0.2, 0.3, 0.4], p=[0.6, 0.1, 0.1, 0.1, 0.1], size=_IHDP_D
    )
    rng_prop = np.random.default_rng(kids[2])
    noise_dir = rng_prop.standard_normal(_IHDP_D)
    noise_dir /= np.linalg.norm(noise_dir)
    beta_norm = float(np.linalg.norm(beta))
    beta_dir = beta / beta_norm if beta_norm > 0 else np.zeros(_IHDP_D)
    direction = _IHDP_CONFOUNDING * beta_dir + (1.0 - _IHDP_CONFOUNDING) * noise_dir
    direction /= np.linalg.norm(direction)

    shell = IhdpRealization(
        beta=beta, bernoulli_probs=probs, col_means=col_means,
        prop_direction=direction, prop_intercept=0.0, offset_c=0.0,
        noise0=1.0, noise1=1.0,
        _seed_x=kids[4], _seed_noise=kids[5], _seed_omega=kids[6],
    )
    Xc = shell.sample_features(_IHDP_CALIB_N, np.random.default_rng(kids[3]))
    Zc = Xc - col_means
    # shift the treated surface so the calibration-sample ATE hits the target
    c = float(np.mean(Zc @ beta - np.exp((Zc + 0.5) @ beta))) - _IHDP_TARGET_ATE

    lo, hi = -30.0, 30.0
    score = Zc @ direction
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        frac = float(np.mean(np.clip(expit(_IHDP_STEEPNESS * (score + mid)), *_IHDP_CLAMP)))
        if frac < _IHDP_TREATED_FRACTION:
            lo = mid
        else:
            hi = mid
    intercept = 0.5 * (lo + hi)

    return IhdpRealization(
        beta=beta, bernoulli_probs=probs, col_means=col_means,
        prop_direction=direction, prop_intercept=intercept, offset_c=c,
        noise0=1.0, noise1=1.0,
        _seed_x=kids[4], _seed_noise=kids[5], _seed_omega=kids[6],
    )


def ihdp_analog(seed: int = 0, n: int = 747) -> ObservationalDataset:
    return ihdp_realization(seed).sample(n)


# --------------------------------------------------------------------------
# JSON parsing (strict)

_SURFACE_FIELDS = {
    "gp_draw": ({"kind", "nu", "length_scale", "variance"}, {"resolution"}),
    "polynomial": ({"kind", "coeffs"}, set()),
    "linear": ({"kind", "weights"}, {"intercept"}),
}
_PROPENSITY_FIELDS = {
    "constant": ({"kind", "gamma"}, set()),
    "logistic": ({"kind", "weights"}, {"bias", "steepness"}),
}
_GENERATOR_REQUIRED = {
    "n", "d", "surface0", "surface1", "relevant_dims0", "relevant_dims1",
    "noise0", "noise1", "propensity",
}
_GENERATOR_OPTIONAL = {"overlap_clamp", "seed"}


def _check_strict(d: dict, required: set, optional: set, what: str) -> None:
    unknown = set(d) - required - optional
    if unknown:
        raise ValidationError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ValidationError(f"{what}: missing field(s) {sorted(missing)}")


def surface_from_json_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("surface: expected an object with a 'kind' field")
    kind = d["kind"]
    if kind not in _SURFACE_FIELDS:
        raise ValidationError(f"surface: unknown kind {kind!r}")
    required, optional = _SURFACE_FIELDS[kind]
    _check_strict(d, required, optional, f"{kind} surface")
    if kind == "gp_draw":
        return GpDrawSurface(d["nu"], d["length_scale"], d["variance"],
                             d.get("resolution", 64))
    if kind == "polynomial":
        return PolynomialSurface(tuple(d["coeffs"]))
    return LinearSurface(tuple(d["weights"]), d.get("intercept", 0.0))


def propensity_from_json_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("propensity: expected an object with a 'kind' field")
    kind = d["kind"]
    if kind not in _PROPENSITY_FIELDS:
        raise ValidationError(f"propensity: unknown kind {kind!r}")
    required, optional = _PROPENSITY_FIELDS[kind]
    _check_strict(d, required, optional, f"{kind} propensity")
    if kind == "constant":
        return ConstantPropensity(d["gamma"])
    return LogisticPropensity(tuple(d["weights"]), d.get("bias", 0.0),
                              d.get("steepness", 1.0))


def generator_config_from_json_dict(d: dict) -> GeneratorConfig:
    if not isinstance(d, dict):
        raise ValidationError("generator config: expected an object")
    _check_strict(d, _GENERATOR_REQUIRED, _GENERATOR_OPTIONAL, "generator config")
    return GeneratorConfig(
        n=d["n"],
        d=d["d"],
        surface0=surface_from_json_dict(d["surface0"]),
        surface1=surface_from_json_dict(d["surface1"]),
        relevant_dims0=tuple(d["relevant_dims0"]),
        relevant_dims1=tuple(d["relevant_dims1"]),
        noise0=d["noise0"],
        noise1=d["noise1"],
        propensity=propensity_from_json_dict(d["propensity"]),
        overlap_clamp=tuple(d.get("overlap_clamp", (0.05, 0.95))),
        seed=d.get("seed", 0),
    )
