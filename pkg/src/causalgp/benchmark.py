"""Roster comparison harness.

Replicates a synthetic data source R times, fits every estimator on the
train rows of a shared 60/20/20 split, and reports root mean squared
effect error per estimator with 95% normal-approximation intervals.
All estimators within one replicate see the same dataset and the same
split membership, so the comparison is paired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import make_split
from .errors import NumericalError, ValidationError
from .estimators import ESTIMATOR_NAMES, EstimatorSpec, fit_estimator
from .metrics import sqrt_pehe
from .parallel import parallel_map
from .synthgen import GeneratorConfig, generate, ihdp_realization

DEFAULT_FRACTIONS = (0.6, 0.2, 0.2)

# in-sample covers everything the search ever saw (train and validation
# folds); in_sample_train narrows to the rows the final model was fit on
SCOPES = ("in_sample", "out_of_sample", "in_sample_train")


@dataclass(frozen=True)
class IhdpSource:
    """The mixed-covariate observational analog. Response surfaces and
    propensity are fixed by surface_seed; benchmark replicates redraw
    covariates, noise and assignment only."""

    n: int = 747
    surface_seed: int = 0

    def __post_init__(self):
        if int(self.n) < 4:
            raise ValidationError(f"source size must be at least 4, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "surface_seed", int(self.surface_seed))

    def to_json_dict(self) -> dict:
        return {"kind": "ihdp_analog", "n": self.n, "surface_seed": self.surface_seed}


def default_roster(budget: int = 24, J: int = 10) -> tuple:
    return tuple(EstimatorSpec(name, budget=budget, J=J) for name in ESTIMATOR_NAMES)


def source_to_json_dict(source) -> dict:
    if isinstance(source, GeneratorConfig):
        return {"kind": "generator", "config": source.to_json_dict()}
    return source.to_json_dict()


def _draw(source, seed: int):
    if isinstance(source, GeneratorConfig):
        return generate(replace(source, seed=seed))
    if isinstance(source, IhdpSource):
        return ihdp_realization(source.surface_seed).sample(source.n, seed=seed)
    raise ValidationError(f"unsupported dataset source {type(source).__name__}")


def _run_task(payload):
    """One (replicate, estimator) cell; returns (ri, name, scores, error)."""
    source, spec, ri, seed, fractions = payload
    try:
        ds = _draw(source, seed)
        if ds.true_ite is None:
            raise ValidationError("benchmark sources must carry the true effect")
        split = make_split(ds, fractions, spec.J, seed)
        fitted = fit_estimator(spec, ds, split, seed=seed)
        preds = fitted.predict_ite(ds.features)
        scores = {}
        for scope, idx in (
            ("in_sample", np.sort(np.concatenate([split.train_idx, split.valid_idx]))),
            ("out_of_sample", split.test_idx),
            ("in_sample_train", split.train_idx),
        ):
            scores[scope] = sqrt_pehe(preds[idx], ds.true_ite[idx])
        return (ri, spec.name, scores, None)
    except (ValidationError, NumericalError) as exc:
        return (ri, spec.name, None, str(exc))


@dataclass(frozen=True)
class IntervalStat:
    """Mean with a 95% normal interval; lo/hi are None below 2 samples."""

    mean: float | None
    lo: float | None
    hi: float | None
    count: int

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "lo": self.lo, "hi": self.hi, "count": self.count}


def _interval(values) -> IntervalStat:
    k = len(values)
    if k == 0:
        return IntervalStat(None, None, None, 0)
    m = float(np.mean(values))
    if k == 1:
        return IntervalStat(m, None, None, 1)
    half = 1.96 * float(np.std(values, ddof=1)) / math.sqrt(k)
    return IntervalStat(m, m - half, m + half, k)


@dataclass(frozen=True)
class EstimatorResult:
    name: str
    in_sample: IntervalStat
    out_of_sample: IntervalStat
    in_sample_train: IntervalStat
    replicates: tuple  # (replicate, in, out, in_train) for successes
    failures: tuple  # (replicate, message)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "in_sample": self.in_sample.to_json_dict(),
            "out_of_sample": self.out_of_sample.to_json_dict(),
            "in_sample_train": self.in_sample_train.to_json_dict(),
            "replicates": [
                {
                    "replicate": ri,
                    "in_sample": a,
                    "out_of_sample": b,
                    "in_sample_train": c,
                }
                for ri, a, b, c in self.replicates
            ],
            "failures": [{"replicate": ri, "error": msg} for ri, msg in self.failures],
        }


@dataclass(frozen=True)
class BenchmarkReport:
    source: object
    roster: tuple
    R: int
    seed: int
    fractions: tuple
    replicate_seeds: tuple
    results: tuple


def benchmark_report_to_json_dict(report: BenchmarkReport) -> dict:
    return {
        "source": source_to_json_dict(report.source),
        "roster": [spec.to_json_dict() for spec in report.roster],
        "R": report.R,
        "seed": report.seed,
        "fractions": list(report.fractions),
        "replicate_seeds": list(report.replicate_seeds),
        "results": [res.to_json_dict() for res in report.results],
    }


def benchmark_table(report: BenchmarkReport) -> str:
    """Plain-text layout: one row per estimator, one column per scope."""

    def cell(stat: IntervalStat) -> str:
        if stat.mean is None:
            return "n/a"
        if stat.lo is None:
            return f"{stat.mean:.4f}"
        return f"{stat.mean:.4f} +/- {stat.mean - stat.lo:.4f}"

    lines = [f"{'estimator':<14} {'in-sample':>22} {'out-of-sample':>22} {'train-only':>22}"]
    for res in report.results:
        lines.append(
            f"{res.name:<14} {cell(res.in_sample):>22} {cell(res.out_of_sample):>22}"
            f" {cell(res.in_sample_train):>22}"
        )
    return "\n".join(lines)


def run_benchmark(
    source,
    roster=None,
    R: int = 50,
    seed: int = 0,
    fractions=DEFAULT_FRACTIONS,
    workers: int = 1,
) -> BenchmarkReport:
    """Fit every roster entry on R replicates of `source`.

    Failures are recorded per (estimator, replicate) and excluded from the
    aggregates; a run with partial failures still succeeds.
    """
    if roster is None:
        roster = default_roster()
    roster = tuple(roster)
    names = [spec.name for spec in roster]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate estimator names in roster: {names}")
    if not roster:
        raise ValidationError("roster must not be empty")
    if int(R) < 1:
        raise ValidationError(f"need at least 1 replicate, got {R}")
    R = int(R)
    fractions = tuple(float(f) for f in fractions)

    replicate_seeds = tuple(
        int(np.random.SeedSequence([int(seed), ri]).generate_state(1)[0]) for ri in range(R)
    )
    payloads = [
        (source, spec, ri, replicate_seeds[ri], fractions)
        for ri in range(R)
        for spec in roster
    ]
    raw = parallel_map(_run_task, payloads, workers)

    by_name = {name: {"rows": [], "failures": []} for name in names}
    for ri, name, scores, error in raw:
        if error is not None:
            by_name[name]["failures"].append((ri, error))
        else:
            by_name[name]["rows"].append(
                (ri, scores["in_sample"], scores["out_of_sample"], scores["in_sample_train"])
            )

    results = []
    for spec in roster:
        rows = sorted(by_name[spec.name]["rows"])
        stats = [
            _interval([row[1 + k] for row in rows]) for k in range(3)
        ]
        results.append(
            EstimatorResult(
                name=spec.name,
                in_sample=stats[0],
                out_of_sample=stats[1],
                in_sample_train=stats[2],
                replicates=tuple(rows),
                failures=tuple(sorted(by_name[spec.name]["failures"])),
            )
        )

    return BenchmarkReport(
        source=source,
        roster=roster,
        R=R,
        seed=int(seed),
        fractions=fractions,
        replicate_seeds=replicate_seeds,
        results=tuple(results),
    )
