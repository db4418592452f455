"""Effect-estimation metrics and the sample-size rate study.

The rate study measures how fast an estimator's squared error shrinks as
n grows: it fits datasets of increasing size, scores each fit on a fresh
query set where the true effect is known, and regresses log median error
on log n.  The fitted slope is compared against a closed-form exponent
determined by the smoothness and dimension of the two response surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError, StudyError, ValidationError
from .estimators import EstimatorSpec, fit_estimator
from .dataset import fold_plan
from .parallel import parallel_map
from .synthgen import GeneratorConfig, GpDrawSurface, realize

# below this the measured error is dominated by float roundoff, not by the
# estimator, and the log-log fit stops meaning anything
DEGENERATE_FLOOR = 1e-12

_MIN_QUERY = 500


def pehe(predicted_ite, true_ite) -> float:
    """Mean squared difference between predicted and true effects.

    Reporting layers usually quote the square root of this quantity.
    """
    pred = np.asarray(predicted_ite, dtype=np.float64).ravel()
    true = np.asarray(true_ite, dtype=np.float64).ravel()
    if pred.shape != true.shape:
        raise ValidationError(
            f"length mismatch: {pred.shape[0]} predictions vs {true.shape[0]} true effects"
        )
    if pred.size == 0:
        raise ValidationError("need at least one query point")
    return float(np.mean((pred - true) ** 2))


def sqrt_pehe(predicted_ite, true_ite) -> float:
    return math.sqrt(pehe(predicted_ite, true_ite))


def expected_kl_risk(posterior, true_ite, noise0: float, noise1: float) -> float:
    """Squared posterior-mean error scaled by the total outcome noise.

    Dividing the mean squared error by 2*(noise0 + noise1) turns it into
    the Gaussian-location divergence it bounds; this is a surrogate for
    the full predictive divergence, not the mixture form.  `posterior`
    may be a posterior summary or a bare array of posterior mean effects.
    """
    if not (noise0 > 0.0) or not (noise1 > 0.0):
        raise ValidationError(
            f"noise variances must be positive, got {noise0!r} and {noise1!r}"
        )
    means = getattr(posterior, "ite_mean", posterior)
    return pehe(means, true_ite) / (2.0 * (noise0 + noise1))


def optimal_rate_oracle(alpha0, alpha1, p0, p1) -> float:
    """Best achievable log-log decay exponent for squared effect error.

    Each arm contributes -2a/(2a+p) for its smoothness a and relevant
    dimension count p; the study-wide exponent is the slower (larger) of
    the two, since the harder arm bottlenecks the pair.
    """
    vals = (alpha0, alpha1, p0, p1)
    for v in vals:
        if not (math.isfinite(v) and v > 0):
            raise ValidationError(f"smoothness and dimension must be positive, got {vals}")
    return max(-2.0 * alpha0 / (2.0 * alpha0 + p0), -2.0 * alpha1 / (2.0 * alpha1 + p1))


def fit_loglog_slope(sizes, risks) -> tuple[float, float, float]:
    """Ordinary least squares of log(risk) on log(n).

    Returns (slope, intercept, stderr of the slope).
    """
    lx = np.log(np.asarray(sizes, dtype=np.float64))
    ly = np.log(np.asarray(risks, dtype=np.float64))
    if lx.shape != ly.shape:
        raise ValidationError(f"got {lx.size} sizes but {ly.size} risks")
    if lx.size < 2:
        raise ValidationError("need at least two (n, risk) pairs for a slope")
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx <= 0.0:
        raise ValidationError("sample sizes must not all be equal")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    resid = ly - (intercept + slope * lx)
    dof = max(lx.size - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, intercept, stderr


@dataclass(frozen=True)
class RateStudyResult:
    """Everything a rate study produced, aggregates and raw runs alike.

    `samples` holds (n, replicate, pehe) for every successful run and
    `failures` holds (n, replicate, message) for the excluded ones.
    """

    estimator: str
    sizes: tuple
    median_pehe: tuple
    iqr_low: tuple
    iqr_high: tuple
    slope: float
    intercept: float
    stderr: float
    oracle_exponent: float | None
    replicate_seeds: tuple
    degenerate: bool
    samples: tuple
    failures: tuple

    def __post_init__(self):
        sizes = tuple(int(v) for v in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        for name in ("median_pehe", "iqr_low", "iqr_high"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "replicate_seeds", tuple(int(v) for v in self.replicate_seeds))
        object.__setattr__(self, "samples", tuple(tuple(s) for s in self.samples))
        object.__setattr__(self, "failures", tuple(tuple(f) for f in self.failures))
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValidationError(f"sample sizes must be strictly increasing, got {sizes}")
        if len(self.replicate_seeds) < 3:
            raise ValidationError(
                f"need at least 3 replicates, got {len(self.replicate_seeds)}"
            )
        if not math.isfinite(self.slope):
            raise ValidationError(f"fitted slope is not finite: {self.slope!r}")


def rate_study_result_to_json_dict(res: RateStudyResult) -> dict:
    return {
        "estimator": res.estimator,
        "sizes": list(res.sizes),
        "median_pehe": list(res.median_pehe),
        "iqr_low": list(res.iqr_low),
        "iqr_high": list(res.iqr_high),
        "slope": res.slope,
        "intercept": res.intercept,
        "stderr": res.stderr,
        "oracle_exponent": res.oracle_exponent,
        "replicate_seeds": list(res.replicate_seeds),
        "degenerate": res.degenerate,
        "samples": [{"n": n, "replicate": r, "pehe": p} for n, r, p in res.samples],
        "failures": [{"n": n, "replicate": r, "error": msg} for n, r, msg in res.failures],
    }


def rate_study_table(res: RateStudyResult) -> str:
    """Plain-text summary, one row per sample size."""
    lines = [f"estimator: {res.estimator}", f"{'n':>8}  {'median':>12}  {'iqr':>25}"]
    for n, med, lo, hi in zip(res.sizes, res.median_pehe, res.iqr_low, res.iqr_high):
        lines.append(f"{n:>8}  {med:>12.6g}  [{lo:>10.6g}, {hi:>10.6g}]")
    oracle = "n/a" if res.oracle_exponent is None else f"{res.oracle_exponent:+.4f}"
    lines.append(f"slope {res.slope:+.4f} (stderr {res.stderr:.4f}), oracle {oracle}")
    if res.degenerate:
        lines.append("degenerate: error at the float floor, slope not meaningful")
    return "\n".join(lines)


def _oracle_from_generator(cfg: GeneratorConfig):
    s0, s1 = cfg.surface0, cfg.surface1
    if isinstance(s0, GpDrawSurface) and isinstance(s1, GpDrawSurface):
        return optimal_rate_oracle(
            s0.nu, s1.nu, len(cfg.relevant_dims0), len(cfg.relevant_dims1)
        )
    return None


def _rate_task(payload):
    """One (replicate, size) cell; returns (n, replicate, pehe, error)."""
    generator, estimator, ri, n, seed, query_points = payload
    ds_seed, q_seed = (
        int(v) for v in np.random.SeedSequence([seed, ri, n]).generate_state(2)
    )
    real = realize(replace(generator, n=n, seed=ds_seed))
    ds = real.sample()
    Xq = np.random.default_rng(q_seed).uniform(size=(query_points, generator.d))
    f0q, f1q = real.surface_values(Xq)
    try:
        plan = fold_plan(ds, estimator.J, ds_seed)
        fitted = fit_estimator(estimator, ds, plan, seed=ds_seed)
        err = pehe(fitted.predict_ite(Xq), f1q - f0q)
    except (ValidationError, NumericalError) as exc:
        return (n, ri, None, str(exc))
    return (n, ri, err, None)


def run_rate_study(
    generator: GeneratorConfig,
    estimator,
    sizes,
    R: int,
    seed: int = 0,
    query_points: int = _MIN_QUERY,
    workers: int = 1,
) -> RateStudyResult:
    """Measure an estimator's error-decay exponent on synthetic data.

    For every (size, replicate) pair a fresh surface pair and dataset are
    drawn, the estimator is fit on all of it, and its squared effect error
    is scored on `query_points` new feature vectors.  Failed runs are
    recorded and excluded; more than 20% of them aborts the study.
    """
    if isinstance(estimator, str):
        estimator = EstimatorSpec(estimator)
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) < 2:
        raise ValidationError(f"need at least two sample sizes, got {sizes}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError(f"sample sizes must be strictly increasing, got {sizes}")
    if R < 3:
        raise ValidationError(f"need at least 3 replicates, got {R}")
    if query_points < _MIN_QUERY:
        raise ValidationError(
            f"query set must have at least {_MIN_QUERY} points, got {query_points}"
        )

    replicate_seeds = tuple(int(s) for s in np.random.SeedSequence(seed).generate_state(R))
    payloads = [
        (generator, estimator, ri, n, seed, query_points)
        for ri in range(R)
        for n in sizes
    ]
    samples = []
    failures = []
    for n, ri, err, msg in parallel_map(_rate_task, payloads, workers):
        if msg is not None:
            failures.append((n, ri, msg))
        else:
            samples.append((n, ri, err))

    total = R * len(sizes)
    if len(failures) > 0.2 * total:
        raise StudyError(
            f"{len(failures)} of {total} runs failed, exceeding the 20% budget"
        )

    medians, lows, highs = [], [], []
    for n in sizes:
        errs = [p for m, _, p in samples if m == n]
        if not errs:
            raise StudyError(f"no successful replicates at n={n}")
        medians.append(float(np.median(errs)))
        lo, hi = np.percentile(errs, [25.0, 75.0])
        lows.append(float(lo))
        highs.append(float(hi))

    degenerate = any(m < DEGENERATE_FLOOR for m in medians)
    # clip so the log is finite; a flat clipped line shows up as slope ~ 0
    slope, intercept, stderr = fit_loglog_slope(sizes, np.maximum(medians, 1e-300))

    return RateStudyResult(
        estimator=estimator.name,
        sizes=sizes,
        median_pehe=tuple(medians),
        iqr_low=tuple(lows),
        iqr_high=tuple(highs),
        slope=slope,
        intercept=intercept,
        stderr=stderr,
        oracle_exponent=_oracle_from_generator(generator),
        replicate_seeds=replicate_seeds,
        degenerate=degenerate,
        samples=tuple(samples),
        failures=tuple(failures),
    )
