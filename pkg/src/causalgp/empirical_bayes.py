"""Hyperparameter selection for the treatment-effect GP priors.

Two criteria are implemented:

  * "information": minimizes a cross-validated sum of a factual-bias term
    (squared error of the posterior mean on held-out observed outcomes) and
    a counterfactual-variance term (posterior predictive variance of the
    unobserved arm, observation noise included) over the folds of a
    SplitPlan.
  * "likelihood": maximizes the log marginal likelihood on the training
    split, no folds.

Matérn smoothness is searched over a discrete grid (the closed forms exist
only at half-integer levels and the objective is not continuous in nu);
all remaining parameters - length-scales, amplitudes, cross-task
correlations, noise variances - are optimized by Nelder-Mead in a
transformed space.  Length-scales are searched through a single positive
multiplier per task applied to fixed per-dimension base scales
(std_k * sqrt(d) over the training features), which keeps the simplex
dimension independent of d and lets fold distance matrices be cached once
and rescaled per evaluation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .dataset import SplitPlan
from .errors import NumericalError, ValidationError
from .gp import (
    AugmentedPrior,
    FittedModel,
    MultiTaskPrior,
    _cholesky_with_jitter,
    fit_posterior,
    predict,
    prior_from_json_dict,
    prior_to_json_dict,
)
from .kernels import LmcKernelSpec, ScalarKernelSpec, profile_values

__all__ = [
    "EbConfig",
    "FoldRow",
    "CandidateResult",
    "FitReport",
    "default_smoothness_grid",
    "information_objective",
    "cross_validated_risk",
    "select_hyperparameters",
    "eb_config_from_json_dict",
    "fit_report_to_json_dict",
]

_MATERN_LEVELS = (0.5, 1.5, 2.5)
_CRITERIA = ("information", "likelihood")
_STRUCTURES = ("multitask", "augmented")
_LOG_BOUND = 12.0  # transformed parameters live in [-12, 12] before exp/tanh
_SIMPLEX_STEP = 0.5
_DEFAULT_EPS = 1e-4


# --------------------------------------------------------------------------
# Configuration


def default_smoothness_grid(structure: str):
    """Full half-integer grid: 9 (nu0, nu1) pairs or 3 single levels."""
    if structure == "multitask":
        return tuple((a, b) for a in _MATERN_LEVELS for b in _MATERN_LEVELS)
    if structure == "augmented":
        return _MATERN_LEVELS
    raise ValidationError(f"unknown prior structure {structure!r}")


@dataclass(frozen=True)
class EbConfig:
    criterion: str = "information"
    smoothness_grid: tuple | None = None  # None -> default grid for the structure
    budget: int = 24
    J: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.criterion not in _CRITERIA:
            raise ValidationError(
                f"criterion must be one of {_CRITERIA}, got {self.criterion!r}"
            )
        if self.smoothness_grid is not None:
            grid = tuple(
                tuple(float(v) for v in entry) if _is_pair(entry) else float(entry)
                for entry in self.smoothness_grid
            )
            if not grid:
                raise ValidationError("smoothness_grid must be nonempty")
            for entry in grid:
                values = entry if isinstance(entry, tuple) else (entry,)
                if isinstance(entry, tuple) and len(entry) != 2:
                    raise ValidationError(
                        f"smoothness pairs must have two entries, got {entry!r}"
                    )
                for v in values:
                    if v not in _MATERN_LEVELS:
                        raise ValidationError(
                            f"smoothness {v!r} not in {_MATERN_LEVELS}"
                        )
            kinds = {isinstance(e, tuple) for e in grid}
            if len(kinds) > 1:
                raise ValidationError("smoothness_grid mixes pairs and single values")
            object.__setattr__(self, "smoothness_grid", grid)
        if int(self.budget) < 1:
            raise ValidationError(f"budget must be >= 1, got {self.budget!r}")
        if int(self.J) < 2:
            raise ValidationError(f"J must be >= 2, got {self.J!r}")
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "J", int(self.J))
        object.__setattr__(self, "seed", int(self.seed))

    def grid_for(self, structure: str):
        if self.smoothness_grid is None:
            return default_smoothness_grid(structure)
        pairs = isinstance(self.smoothness_grid[0], tuple)
        if pairs != (structure == "multitask"):
            raise ValidationError(
                f"smoothness_grid entries do not match structure {structure!r}: "
                "multitask takes (nu0, nu1) pairs, augmented takes single values"
            )
        return self.smoothness_grid

    def to_json_dict(self) -> dict:
        grid = self.smoothness_grid
        if grid is not None:
            grid = [list(e) if isinstance(e, tuple) else e for e in grid]
        return {
            "criterion": self.criterion,
            "smoothness_grid": grid,
            "budget": self.budget,
            "J": self.J,
            "seed": self.seed,
        }


def _is_pair(entry) -> bool:
    return isinstance(entry, (tuple, list))


_EB_FIELDS = {"criterion", "smoothness_grid", "budget", "J", "seed"}


def eb_config_from_json_dict(d: dict) -> EbConfig:
    if not isinstance(d, dict):
        raise ValidationError("eb config: expected an object")
    unknown = set(d) - _EB_FIELDS
    if unknown:
        raise ValidationError(f"eb config: unknown field(s) {sorted(unknown)}")
    kwargs = {}
    for key in _EB_FIELDS & set(d):
        value = d[key]
        if key == "smoothness_grid" and value is not None:
            value = tuple(tuple(e) if _is_pair(e) else e for e in value)
        kwargs[key] = value
    return EbConfig(**kwargs)


# --------------------------------------------------------------------------
# The two-term objective and its cross-validated form (reference path;
# the grid search below uses a cached fast path that computes the same
# quantities from precomputed distance matrices)


def information_objective(prior, train, eval_pts) -> tuple[float, float]:
    """(factual_bias, counterfactual_variance) of `prior` fit on `train`.

    factual_bias sums, over eval subjects, the squared error of the
    posterior mean of the assigned arm against the observed outcome.
    counterfactual_variance sums the posterior predictive variance of the
    unassigned arm, observation noise included.
    """
    if eval_pts.n == 0:
        raise ValidationError("information objective needs a nonempty eval set")
    model = fit_posterior(prior, train)
    summary = predict(model, eval_pts.features)
    w = eval_pts.treatments
    mean_fact = np.where(w == 1, summary.mean1, summary.mean0)
    var_cf = np.where(w == 1, summary.var0, summary.var1)
    noise_cf = np.where(
        w == 1, prior.noise_for_arm(0), prior.noise_for_arm(1)
    )
    bias = float(np.sum((eval_pts.outcomes - mean_fact) ** 2))
    cf = float(np.sum(var_cf + noise_cf))
    return bias, cf


def _check_fold_arms(prior, fit_view, fold: int) -> None:
    if prior.structure != "multitask":
        return
    for arm in (0, 1):
        if not np.any(fit_view.treatments == arm):
            raise ValidationError(
                f"fold {fold} leaves treatment arm {arm} empty for the "
                "multitask fit"
            )


def cross_validated_risk(prior, ds, split: SplitPlan) -> float:
    """Fold-size-weighted mean of (factual_bias + counterfactual_variance),
    fitting on the complement of each fold and scoring on the fold."""
    view = ds.estimator_view() if hasattr(ds, "estimator_view") else ds
    sizes = []
    risks = []
    for j in range(1, split.J + 1):
        fit_view = view.take(split.fold_complement(j))
        eval_view = view.take(split.fold_members(j))
        _check_fold_arms(prior, fit_view, j)
        bias, cf = information_objective(prior, fit_view, eval_view)
        sizes.append(eval_view.n)
        risks.append(bias + cf)
    weights = np.asarray(sizes, dtype=np.float64) / float(sum(sizes))
    return float(weights @ np.asarray(risks))


# --------------------------------------------------------------------------
# Report types


@dataclass(frozen=True)
class FoldRow:
    fold: int
    factual_bias: float
    counterfactual_variance: float

    @property
    def total(self) -> float:
        return self.factual_bias + self.counterfactual_variance


@dataclass(frozen=True)
class CandidateResult:
    index: int
    smoothness: tuple[float, float] | float
    risk: float  # information: weighted CV total; likelihood: -evidence
    evidence: float | None
    rows: tuple[FoldRow, ...]
    prior_json: dict | None
    error: str | None
    seconds: float  # wall clock, kept in memory only


@dataclass(frozen=True, eq=False)
class FitReport:
    structure: str
    criterion: str
    seed: int
    candidates: tuple[CandidateResult, ...]
    selected_index: int
    selected_prior: AugmentedPrior | MultiTaskPrior
    model: FittedModel


def fit_report_to_json_dict(report: FitReport) -> dict:
    # wall-clock timings stay in memory so reruns produce identical bytes
    return {
        "structure": report.structure,
        "criterion": report.criterion,
        "seed": report.seed,
        "selected_index": report.selected_index,
        "selected_prior": prior_to_json_dict(report.selected_prior),
        "candidates": [
            {
                "index": c.index,
                "smoothness": list(c.smoothness)
                if isinstance(c.smoothness, tuple)
                else c.smoothness,
                "risk": c.risk,
                "evidence": c.evidence,
                "error": c.error,
                "rows": [
                    {
                        "fold": r.fold,
                        "factual_bias": r.factual_bias,
                        "counterfactual_variance": r.counterfactual_variance,
                        "total": r.total,
                    }
                    for r in c.rows
                ],
            }
            for c in report.candidates
        ],
    }


# --------------------------------------------------------------------------
# Cached fast path.  Distances are precomputed per fold against fixed base
# scales; each optimizer step only rescales them, applies the Matérn
# profile, and factorizes.


def _bounded(t: float) -> float:
    return min(max(float(t), -_LOG_BOUND), _LOG_BOUND)


def _bexp(t: float) -> float:
    return math.exp(_bounded(t))


def _base_scales(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    std = X.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    return std * math.sqrt(d)


def _arm_stats(w: np.ndarray, y: np.ndarray) -> tuple[list, list]:
    centers, spreads = [], []
    overall = float(y.var()) if len(y) else 1.0
    overall = max(overall, 1e-4)
    for arm in (0, 1):
        vals = y[w == arm]
        centers.append(float(vals.mean()) if vals.size else 0.0)
        spreads.append(max(float(vals.var()), 1e-4) if vals.size > 1 else overall)
    return centers, spreads


class _TaskedBlock:
    """Cached distances for one (fit set, eval set) pair."""

    def __init__(self, base, Xf, wf, yf, Xe=None, we=None, ye=None, centers=None):
        Zf = Xf / base
        self.D2_fit = cdist(Zf, Zf, "sqeuclidean")
        self.DW_fit = (wf[:, None] != wf[None, :]).astype(np.float64)
        self.w_fit = wf
        self.noise_mask1 = wf == 1
        if centers is None:
            c, _ = _arm_stats(wf, yf)
            centers = (c[0], c[1])
        self.centers = centers
        self.z = yf - np.where(wf == 1, centers[1], centers[0])
        self.has_eval = Xe is not None
        if self.has_eval:
            Ze = Xe / base
            self.D2_cross = cdist(Zf, Ze, "sqeuclidean")
            self.w_eval = we
            self.y_eval = ye
            self.cf_arm = 1 - we
            # squared treatment-coordinate distances from fit points to the
            # eval points viewed at the factual and counterfactual arm
            self.DW_fact = (wf[:, None] != we[None, :]).astype(np.float64)
            self.DW_cf = (wf[:, None] == we[None, :]).astype(np.float64)


def _mt_params(theta, eps: float) -> dict:
    a00 = _bexp(theta[2])
    b11 = _bexp(theta[3]) ** 2
    rho_a = math.tanh(_bounded(theta[4]))
    rho_b = math.tanh(_bounded(theta[5]))
    return {
        "s0": _bexp(theta[0]),
        "s1": _bexp(theta[1]),
        "a00": a00,
        "b11": b11,
        "a01": rho_a * a00 * math.sqrt(eps),
        "b01": rho_b * math.sqrt(b11 * eps),
        "rho_a": rho_a,
        "rho_b": rho_b,
        "n0": _bexp(theta[6]),
        "n1": _bexp(theta[7]),
        "eps": eps,
    }


def _aug_params(theta) -> dict:
    return {
        "s": _bexp(theta[0]),
        "lw": _bexp(theta[1]),
        "vf": _bexp(theta[2]),
        "noise": _bexp(theta[3]),
    }


def _mt_block_state(block: _TaskedBlock, nus, p):
    K0 = profile_values("matern", nus[0], 1.0, block.D2_fit / (p["s0"] ** 2))
    K1 = profile_values("matern", nus[1], 1.0, block.D2_fit / (p["s1"] ** 2))
    A = np.array([[p["a00"] ** 2, p["a01"]], [p["a01"], p["eps"]]])
    B = np.array([[p["eps"], p["b01"]], [p["b01"], p["b11"]]])
    wf = block.w_fit
    G = A[np.ix_(wf, wf)] * K0 + B[np.ix_(wf, wf)] * K1
    diag = np.where(block.noise_mask1, p["n1"], p["n0"])
    G[np.diag_indices_from(G)] += diag
    L, _ = _cholesky_with_jitter(G)
    alpha = cho_solve((L, True), block.z)
    return A, B, L, alpha


def _mt_fold_terms(block: _TaskedBlock, nus, p) -> tuple[float, float]:
    A, B, L, alpha = _mt_block_state(block, nus, p)
    C0 = profile_values("matern", nus[0], 1.0, block.D2_cross / (p["s0"] ** 2))
    C1 = profile_values("matern", nus[1], 1.0, block.D2_cross / (p["s1"] ** 2))
    wf, we, cf = block.w_fit, block.w_eval, block.cf_arm
    Ks_fact = A[np.ix_(wf, we)] * C0 + B[np.ix_(wf, we)] * C1
    mean_fact = np.asarray(block.centers)[we] + Ks_fact.T @ alpha
    bias = float(np.sum((block.y_eval - mean_fact) ** 2))
    Ks_cf = A[np.ix_(wf, cf)] * C0 + B[np.ix_(wf, cf)] * C1
    V = solve_triangular(L, Ks_cf, lower=True)
    prior_var = np.where(cf == 1, A[1, 1] + B[1, 1], A[0, 0] + B[0, 0])
    var_cf = np.clip(prior_var - np.einsum("iq,iq->q", V, V), 0.0, None)
    noise_cf = np.where(cf == 1, p["n1"], p["n0"])
    return bias, float(np.sum(var_cf + noise_cf))


def _mt_evidence(block: _TaskedBlock, nus, p) -> float:
    _, _, L, alpha = _mt_block_state(block, nus, p)
    n = len(block.z)
    return float(
        -0.5 * block.z @ alpha
        - np.sum(np.log(np.diag(L)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def _aug_block_state(block: _TaskedBlock, nu, p):
    r2 = block.D2_fit / (p["s"] ** 2) + block.DW_fit / (p["lw"] ** 2)
    G = profile_values("matern", nu, p["vf"], r2)
    G[np.diag_indices_from(G)] += p["noise"]
    L, _ = _cholesky_with_jitter(G)
    alpha = cho_solve((L, True), block.z)
    return L, alpha


def _aug_fold_terms(block: _TaskedBlock, nu, p) -> tuple[float, float]:
    L, alpha = _aug_block_state(block, nu, p)
    base_r2 = block.D2_cross / (p["s"] ** 2)
    lw2 = p["lw"] ** 2
    Ks_fact = profile_values("matern", nu, p["vf"], base_r2 + block.DW_fact / lw2)
    mean_fact = np.asarray(block.centers)[block.w_eval] + Ks_fact.T @ alpha
    bias = float(np.sum((block.y_eval - mean_fact) ** 2))
    Ks_cf = profile_values("matern", nu, p["vf"], base_r2 + block.DW_cf / lw2)
    V = solve_triangular(L, Ks_cf, lower=True)
    var_cf = np.clip(p["vf"] - np.einsum("iq,iq->q", V, V), 0.0, None)
    return bias, float(np.sum(var_cf + p["noise"]))


def _aug_evidence(block: _TaskedBlock, nu, p) -> float:
    L, alpha = _aug_block_state(block, nu, p)
    n = len(block.z)
    return float(
        -0.5 * block.z @ alpha
        - np.sum(np.log(np.diag(L)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


# --------------------------------------------------------------------------
# Selection


def _warm_start(structure: str, w, y) -> np.ndarray:
    centers, spreads = _arm_stats(w, y)
    if structure == "multitask":
        return np.array(
            [
                0.0,
                0.0,
                0.5 * math.log(spreads[0]),
                0.5 * math.log(spreads[1]),
                0.0,
                0.0,
                math.log(0.1 * spreads[0]),
                math.log(0.1 * spreads[1]),
            ]
        )
    v = max(float(y.var()), 1e-4)
    return np.array([0.0, 0.0, math.log(v), math.log(0.1 * v)])


def _initial_simplex(theta0: np.ndarray) -> np.ndarray:
    k = len(theta0)
    simplex = np.tile(theta0, (k + 1, 1))
    for i in range(k):
        simplex[i + 1, i] += _SIMPLEX_STEP
    return simplex


def _optimize_candidate(objective, theta0: np.ndarray, budget: int) -> np.ndarray:
    if budget <= len(theta0) + 1:
        objective(theta0)  # budget too small for a simplex; keep the warm start
        return theta0
    res = minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options={
            "maxfev": budget,
            "initial_simplex": _initial_simplex(theta0),
            "xatol": 1e-3,
            "fatol": 1e-8,
        },
    )
    return np.asarray(res.x)


def _prior_from_theta(structure: str, smoothness, theta, base: np.ndarray):
    if structure == "multitask":
        p = _mt_params(theta, _DEFAULT_EPS)
        nu0, nu1 = smoothness
        k0 = ScalarKernelSpec("matern", nu0, tuple(p["s0"] * base), 1.0)
        k1 = ScalarKernelSpec("matern", nu1, tuple(p["s1"] * base), 1.0)
        spec = LmcKernelSpec.from_correlations(
            k0, k1, p["a00"], p["b11"], p["rho_a"], p["rho_b"], p["eps"]
        )
        return MultiTaskPrior(spec, p["n0"], p["n1"])
    p = _aug_params(theta)
    kernel = ScalarKernelSpec(
        "matern", smoothness, tuple(p["s"] * base) + (p["lw"],), p["vf"]
    )
    return AugmentedPrior(kernel, p["noise"])


def select_hyperparameters(ds, split: SplitPlan, config: EbConfig, structure: str) -> FitReport:
    """Grid over smoothness, Nelder-Mead over the remaining parameters.

    Returns a FitReport whose model is the winning candidate refit on the
    full training split.  Ties in the criterion keep the earliest grid
    entry (the grid is generated in lexicographic smoothness order).
    """
    if structure not in _STRUCTURES:
        raise ValidationError(f"unknown prior structure {structure!r}")
    grid = config.grid_for(structure)
    view = ds.estimator_view() if hasattr(ds, "estimator_view") else ds
    train = view.take(split.train_idx)
    if train.n == 0:
        raise ValidationError("training split is empty")
    info = config.criterion == "information"
    if info and split.J != config.J:
        raise ValidationError(
            f"config J={config.J} does not match the split's fold count {split.J}"
        )
    base = _base_scales(train.features)

    blocks = []
    fold_sizes = []
    if info:
        for j in range(1, split.J + 1):
            fit_idx = split.fold_complement(j)
            eval_idx = split.fold_members(j)
            fit_v, eval_v = view.take(fit_idx), view.take(eval_idx)
            if structure == "multitask":
                for arm in (0, 1):
                    if not np.any(fit_v.treatments == arm):
                        raise ValidationError(
                            f"fold {j} leaves treatment arm {arm} empty for "
                            "the multitask fit"
                        )
            centers = None
            if structure == "augmented":
                g = float(fit_v.outcomes.mean())
                centers = (g, g)
            blocks.append(
                _TaskedBlock(
                    base,
                    fit_v.features, fit_v.treatments, fit_v.outcomes,
                    eval_v.features, eval_v.treatments, eval_v.outcomes,
                    centers=centers,
                )
            )
            fold_sizes.append(eval_v.n)
        weights = np.asarray(fold_sizes, dtype=np.float64) / float(sum(fold_sizes))
    else:
        centers = None
        if structure == "augmented":
            g = float(train.outcomes.mean())
            centers = (g, g)
        blocks.append(
            _TaskedBlock(base, train.features, train.treatments, train.outcomes,
                         centers=centers)
        )
        weights = None

    theta0 = _warm_start(structure, train.treatments, train.outcomes)
    results = []
    for index, smoothness in enumerate(grid):
        started = time.perf_counter()
        row_memo: dict[bytes, tuple] = {}

        def objective(theta, _memo=row_memo, _nus=smoothness):
            try:
                if structure == "multitask":
                    p = _mt_params(theta, _DEFAULT_EPS)
                    if info:
                        terms = [_mt_fold_terms(b, _nus, p) for b in blocks]
                    else:
                        return -_mt_evidence(blocks[0], _nus, p)
                else:
                    p = _aug_params(theta)
                    if info:
                        terms = [_aug_fold_terms(b, _nus, p) for b in blocks]
                    else:
                        return -_aug_evidence(blocks[0], _nus, p)
            except NumericalError:
                return math.inf
            _memo[np.asarray(theta, dtype=np.float64).tobytes()] = tuple(terms)
            totals = np.array([b + v for b, v in terms])
            return float(weights @ totals)

        try:
            theta_best = _optimize_candidate(objective, theta0, config.budget)
            final = objective(theta_best)
            if not math.isfinite(final):
                raise NumericalError("objective not finite at the optimizer result")
        except NumericalError as exc:
            results.append(
                CandidateResult(
                    index, smoothness, math.inf, None, (), None, str(exc),
                    time.perf_counter() - started,
                )
            )
            continue

        if info:
            terms = row_memo[np.asarray(theta_best, dtype=np.float64).tobytes()]
            rows = tuple(
                FoldRow(j + 1, float(b), float(v)) for j, (b, v) in enumerate(terms)
            )
            risk, evidence = final, None
        else:
            rows = ()
            evidence = -final
            risk = final
        prior = _prior_from_theta(structure, smoothness, theta_best, base)
        results.append(
            CandidateResult(
                index, smoothness, risk, evidence, rows,
                prior_to_json_dict(prior), None, time.perf_counter() - started,
            )
        )

    best_index, best_risk = None, math.inf
    for c in results:
        if c.error is None and c.risk < best_risk:
            best_index, best_risk = c.index, c.risk
    if best_index is None:
        details = "; ".join(f"{c.smoothness}: {c.error}" for c in results)
        raise NumericalError(f"every smoothness candidate failed to fit ({details})")

    # rebuild the winner's prior and refit it on the full training split
    winner = results[best_index]
    selected_prior = prior_from_json_dict(winner.prior_json)
    model = fit_posterior(selected_prior, train)
    return FitReport(
        structure=structure,
        criterion=config.criterion,
        seed=config.seed,
        candidates=tuple(results),
        selected_index=best_index,
        selected_prior=selected_prior,
        model=model,
    )
