"""Observational datasets, CSV I/O, and train/valid/test split plans.

One row per subject: features x1..xd, a binary treatment indicator w, and
the observed outcome y.  Synthetic datasets additionally carry the hidden
counterfactual outcome (y_cf) and the true effect (ite); estimators only
ever see the (features, treatments, outcomes) triple via `estimator_view`.

CSV format: comma separated, '.' decimal point, UTF-8, mandatory header
``x1,...,xd,w,y[,y_cf][,ite]`` in that column order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "EstimatorView",
    "ObservationalDataset",
    "SplitPlan",
    "FeatureScaler",
    "load_csv",
    "write_csv",
    "make_split",
    "fold_plan",
]


def _as_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"features must be a 2-d array, got shape {X.shape}")
    return X


def _as_treatments(w, n: int) -> np.ndarray:
    w = np.asarray(w)
    if w.shape != (n,):
        raise ValidationError(f"treatments must have shape ({n},), got {w.shape}")
    wi = np.asarray(w, dtype=np.float64)
    bad = np.nonzero((wi != 0.0) & (wi != 1.0))[0]
    if bad.size:
        raise ValidationError(
            f"treatment values must be 0 or 1; found {wi[bad[0]]!r} at subject index {bad[0]}"
        )
    return wi.astype(np.int64)


def _as_outcomes(y, n: int, name: str) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise ValidationError(f"{name} must have shape ({n},), got {y.shape}")
    return y


@dataclass(frozen=True, eq=False)
class EstimatorView:
    """What an estimator is allowed to see: features, treatments, outcomes."""

    features: np.ndarray
    treatments: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        X = _as_features(self.features)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "treatments", _as_treatments(self.treatments, X.shape[0]))
        object.__setattr__(self, "outcomes", _as_outcomes(self.outcomes, X.shape[0], "outcomes"))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "EstimatorView":
        idx = np.asarray(indices, dtype=np.int64)
        return EstimatorView(self.features[idx], self.treatments[idx], self.outcomes[idx])

    def arm_indices(self, arm: int) -> np.ndarray:
        return np.nonzero(self.treatments == arm)[0]

    def __eq__(self, other):
        if not isinstance(other, EstimatorView):
            return NotImplemented
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.treatments, other.treatments)
            and np.array_equal(self.outcomes, other.outcomes)
        )

    def __hash__(self):
        return hash((self.n, self.d))


@dataclass(frozen=True, eq=False)
class ObservationalDataset:
    """A dataset with optional hidden fields for synthetic ground truth.

    `counterfactuals` holds the unobserved potential outcome for each
    subject (the outcome under treatment 1-w); `true_ite` holds the
    noiseless effect f1(x) - f0(x).  Both are None for real data.
    """

    features: np.ndarray
    treatments: np.ndarray
    outcomes: np.ndarray
    counterfactuals: np.ndarray | None = None
    true_ite: np.ndarray | None = None

    def __post_init__(self):
        X = _as_features(self.features)
        object.__setattr__(self, "features", X)
        n = X.shape[0]
        object.__setattr__(self, "treatments", _as_treatments(self.treatments, n))
        object.__setattr__(self, "outcomes", _as_outcomes(self.outcomes, n, "outcomes"))
        if self.counterfactuals is not None:
            object.__setattr__(self, "counterfactuals", _as_outcomes(self.counterfactuals, n, "counterfactuals"))
        if self.true_ite is not None:
            object.__setattr__(self, "true_ite", _as_outcomes(self.true_ite, n, "true_ite"))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def estimator_view(self) -> EstimatorView:
        return EstimatorView(self.features, self.treatments, self.outcomes)

    def take(self, indices) -> "ObservationalDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return ObservationalDataset(
            self.features[idx],
            self.treatments[idx],
            self.outcomes[idx],
            None if self.counterfactuals is None else self.counterfactuals[idx],
            None if self.true_ite is None else self.true_ite[idx],
        )

    def __eq__(self, other):
        if not isinstance(other, ObservationalDataset):
            return NotImplemented
        def same(a, b):
            if a is None or b is None:
                return (a is None) == (b is None)
            return np.array_equal(a, b)
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.treatments, other.treatments)
            and np.array_equal(self.outcomes, other.outcomes)
            and same(self.counterfactuals, other.counterfactuals)
            and same(self.true_ite, other.true_ite)
        )

    def __hash__(self):
        return hash((self.n, self.d))


# --------------------------------------------------------------------------
# CSV I/O


def _parse_header(fields: list[str]) -> tuple[int, bool, bool]:
    tokens = [f.strip() for f in fields]
    d = 0
    while d < len(tokens) and tokens[d] == f"x{d + 1}":
        d += 1
    if d == 0:
        raise ParseError("header: missing feature column 'x1'")
    rest = tokens[d:]
    if not rest or rest[0] != "w":
        raise ParseError("header: missing mandatory column 'w' after the feature block")
    if len(rest) < 2 or rest[1] != "y":
        raise ParseError("header: missing mandatory column 'y'")
    tail = rest[2:]
    allowed = ([], ["y_cf"], ["ite"], ["y_cf", "ite"])
    if tail not in allowed:
        raise ParseError(f"header: unexpected column(s) {tail} after 'y' (allowed: y_cf, ite)")
    return d, "y_cf" in tail, "ite" in tail


def load_csv(path) -> ObservationalDataset:
    """Load a dataset from a CSV file; see the module docstring for the schema.

    Parse failures name the data row (1-based, excluding the header) and
    the column; treatment values outside {0,1} raise ValidationError.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file (header row required)") from None
        d, has_cf, has_ite = _parse_header(header)
        names = [f"x{k + 1}" for k in range(d)] + ["w", "y"] + (["y_cf"] if has_cf else []) + (["ite"] if has_ite else [])
        rows = []
        for rownum, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(names):
                raise ParseError(
                    f"{path}: row {rownum} has {len(record)} cells, expected {len(names)}"
                )
            vals = []
            for name, cell in zip(names, record):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {rownum}, column {name}: non-numeric cell {cell!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.float64)
    X = arr[:, :d]
    w_raw = arr[:, d]
    bad = np.nonzero((w_raw != 0.0) & (w_raw != 1.0))[0]
    if bad.size:
        raise ValidationError(
            f"{path}: row {bad[0] + 1}, column w: treatment must be 0 or 1, got {w_raw[bad[0]]!r}"
        )
    y = arr[:, d + 1]
    col = d + 2
    y_cf = None
    ite = None
    if has_cf:
        y_cf = arr[:, col]
        col += 1
    if has_ite:
        ite = arr[:, col]
    return ObservationalDataset(X, w_raw.astype(np.int64), y, y_cf, ite)


def _fmt(v: float) -> str:
    # repr gives the shortest string that round-trips the double exactly
    return repr(float(v))


def write_csv(path, ds: ObservationalDataset) -> None:
    """Write a dataset in the canonical CSV schema (exact float round-trip)."""
    names = [f"x{k + 1}" for k in range(ds.d)] + ["w", "y"]
    if ds.counterfactuals is not None:
        names.append("y_cf")
    if ds.true_ite is not None:
        names.append("ite")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(ds.n):
            row = [_fmt(v) for v in ds.features[i]]
            row.append(str(int(ds.treatments[i])))
            row.append(_fmt(ds.outcomes[i]))
            if ds.counterfactuals is not None:
                row.append(_fmt(ds.counterfactuals[i]))
            if ds.true_ite is not None:
                row.append(_fmt(ds.true_ite[i]))
            writer.writerow(row)


# --------------------------------------------------------------------------
# Split plans


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Disjoint train/valid/test index sets plus fold labels on the train set.

    `fold_labels` has one entry per subject of the parent dataset: 0 for
    subjects outside the train set, and a label in 1..J for train members.
    """

    train_idx: np.ndarray
    valid_idx: np.ndarray
    test_idx: np.ndarray
    fold_labels: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("train_idx", "valid_idx", "test_idx"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        object.__setattr__(self, "fold_labels", np.asarray(self.fold_labels, dtype=np.int64))
        n = self.fold_labels.shape[0]
        pooled = np.concatenate([self.train_idx, self.valid_idx, self.test_idx])
        if pooled.size and (pooled.min() < 0 or pooled.max() >= n):
            raise ValidationError("split indices out of range for the fold-label vector")
        if len(set(pooled.tolist())) != pooled.size:
            raise ValidationError("train/valid/test index sets must be disjoint")
        labelled = np.nonzero(self.fold_labels > 0)[0]
        if sorted(labelled.tolist()) != sorted(self.train_idx.tolist()):
            raise ValidationError("every train index needs exactly one fold label in 1..J")
        if self.train_idx.size:
            J = int(self.fold_labels.max())
            for j in range(1, J + 1):
                if not np.any(self.fold_labels == j):
                    raise ValidationError(f"fold {j} is empty")

    @property
    def J(self) -> int:
        return int(self.fold_labels.max()) if self.train_idx.size else 0

    def fold_members(self, j: int) -> np.ndarray:
        return np.nonzero(self.fold_labels == j)[0]

    def fold_complement(self, j: int) -> np.ndarray:
        lab = self.fold_labels
        return np.nonzero((lab > 0) & (lab != j))[0]

    def __eq__(self, other):
        if not isinstance(other, SplitPlan):
            return NotImplemented
        return (
            np.array_equal(self.train_idx, other.train_idx)
            and np.array_equal(self.valid_idx, other.valid_idx)
            and np.array_equal(self.test_idx, other.test_idx)
            and np.array_equal(self.fold_labels, other.fold_labels)
            and self.seed == other.seed
        )

    def to_json_dict(self) -> dict:
        return {
            "train_idx": self.train_idx.tolist(),
            "valid_idx": self.valid_idx.tolist(),
            "test_idx": self.test_idx.tolist(),
            "fold_labels": self.fold_labels.tolist(),
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "SplitPlan":
        required = {"train_idx", "valid_idx", "test_idx", "fold_labels", "seed"}
        unknown = set(d) - required
        if unknown:
            raise ValidationError(f"split plan: unknown field(s) {sorted(unknown)}")
        missing = required - set(d)
        if missing:
            raise ValidationError(f"split plan: missing field(s) {sorted(missing)}")
        return cls(d["train_idx"], d["valid_idx"], d["test_idx"], d["fold_labels"], int(d["seed"]))

    @classmethod
    def from_json(cls, blob: str) -> "SplitPlan":
        return cls.from_json_dict(json.loads(blob))


def _largest_remainder(total: int, fractions) -> list[int]:
    raw = [total * f for f in fractions]
    base = [int(math.floor(v)) for v in raw]
    short = total - sum(base)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def make_split(ds, fractions, J: int, seed: int) -> SplitPlan:
    """Stratified train/valid/test split with round-robin fold labels.

    Bucket sizes follow the fractions exactly (largest-remainder rounding);
    both treatment arms are spread proportionally across buckets and folds,
    so every fold's treated count stays within one subject of the
    train-wide treated fraction.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValidationError(f"fractions must be three positive numbers, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError(f"fractions must sum to 1, got {sum(fractions)!r}")
    if J < 2:
        raise ValidationError(f"fold count must be at least 2, got {J}")
    n = ds.n
    w = np.asarray(ds.treatments)
    rng = np.random.default_rng(seed)

    targets = _largest_remainder(n, fractions)
    arms = [rng.permutation(np.nonzero(w == a)[0]) for a in (0, 1)]
    allocs = [_largest_remainder(len(arm), fractions) for arm in arms]

    # repair per-arm rounding so bucket totals hit the global targets
    def bucket_sums():
        return [allocs[0][b] + allocs[1][b] for b in range(3)]

    guard = 0
    while bucket_sums() != targets:
        sums = bucket_sums()
        over = next(b for b in range(3) if sums[b] > targets[b])
        under = next(b for b in range(3) if sums[b] < targets[b])
        donor = max((0, 1), key=lambda a: allocs[a][over])
        allocs[donor][over] -= 1
        allocs[donor][under] += 1
        guard += 1
        if guard > 12:
            raise ValidationError("split allocation failed to converge")

    buckets = [[], [], []]
    for a in (0, 1):
        start = 0
        for b in range(3):
            buckets[b].append(arms[a][start : start + allocs[a][b]])
            start += allocs[a][b]
    train_parts, valid_parts, test_parts = (np.concatenate(bk) if bk else np.array([], dtype=np.int64) for bk in buckets)

    if J > len(train_parts):
        raise ValidationError(f"fold count J={J} exceeds the train-set size {len(train_parts)}")

    # single round-robin pass over the arm-grouped train sequence keeps both
    # the global fold sizes and each arm's per-fold counts within 1
    labels = np.zeros(n, dtype=np.int64)
    for pos, idx in enumerate(train_parts):
        labels[idx] = (pos % J) + 1

    return SplitPlan(
        np.sort(train_parts),
        np.sort(valid_parts),
        np.sort(test_parts),
        labels,
        int(seed),
    )


def fold_plan(ds, J: int, seed: int) -> SplitPlan:
    """A split plan that places every subject in the train set (folds only)."""
    if J < 2:
        raise ValidationError(f"fold count must be at least 2, got {J}")
    n = ds.n
    if J > n:
        raise ValidationError(f"fold count J={J} exceeds the dataset size {n}")
    w = np.asarray(ds.treatments)
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.nonzero(w == a)[0]) for a in (0, 1)])
    labels = np.zeros(n, dtype=np.int64)
    for pos, idx in enumerate(order):
        labels[idx] = (pos % J) + 1
    empty = np.array([], dtype=np.int64)
    return SplitPlan(np.arange(n, dtype=np.int64), empty, empty, labels, int(seed))


# --------------------------------------------------------------------------
# Feature standardization (train statistics only)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-column zero-mean unit-variance transform fitted on train rows."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "FeatureScaler":
        X = _as_features(X)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0.0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X) -> np.ndarray:
        X = _as_features(X)
        if X.shape[1] != self.mean.shape[0]:
            raise ValidationError(
                f"scaler fitted on {self.mean.shape[0]} columns, got {X.shape[1]}"
            )
        return (X - self.mean) / self.scale

    @classmethod
    def identity(cls, d: int) -> "FeatureScaler":
        return cls(np.zeros(d), np.ones(d))
