"""Dataset construction, CSV round-trips, and split/fold plans."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalgp.dataset import (
    EstimatorView,
    FeatureScaler,
    ObservationalDataset,
    SplitPlan,
    fold_plan,
    load_csv,
    make_split,
    write_csv,
)
from causalgp.errors import ParseError, ValidationError


def _toy_dataset(n=8, d=2, seed=0, with_hidden=True):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, d))
    w = (rng.uniform(size=n) < 0.5).astype(np.int64)
    y = rng.normal(size=n)
    if not with_hidden:
        return ObservationalDataset(X, w, y)
    return ObservationalDataset(X, w, y, counterfactuals=rng.normal(size=n), true_ite=rng.normal(size=n))


class TestConstruction:
    def test_basic_shapes(self):
        ds = _toy_dataset(n=5, d=3)
        assert ds.n == 5
        assert ds.d == 3

    def test_treatment_outside_01_rejected(self):
        X = np.zeros((3, 1))
        w = np.array([0, 2, 1])
        y = np.zeros(3)
        with pytest.raises(ValidationError, match="2"):
            ObservationalDataset(X, w, y)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            ObservationalDataset(np.zeros((3, 1)), np.zeros(3, dtype=int), np.zeros(4))

    def test_view_hides_counterfactuals(self):
        ds = _toy_dataset(with_hidden=True)
        bare = ObservationalDataset(ds.features, ds.treatments, ds.outcomes)
        assert ds.estimator_view() == bare.estimator_view()

    def test_view_inequality_on_different_outcomes(self):
        ds = _toy_dataset()
        other = ObservationalDataset(ds.features, ds.treatments, ds.outcomes + 1.0)
        assert ds.estimator_view() != other.estimator_view()

    def test_take_preserves_hidden_fields(self):
        ds = _toy_dataset()
        sub = ds.take(np.array([1, 3]))
        assert sub.n == 2
        np.testing.assert_array_equal(sub.true_ite, ds.true_ite[[1, 3]])


class TestCsv:
    def test_three_row_file(self, tmp_path):
        p = tmp_path / "tiny.csv"
        p.write_text("x1,w,y\n0.1,0,1.5\n0.2,1,-0.5\n0.3,0,2.0\n", encoding="utf-8")
        ds = load_csv(p)
        assert ds.n == 3
        assert ds.d == 1
        assert ds.counterfactuals is None
        np.testing.assert_allclose(ds.outcomes, [1.5, -0.5, 2.0])

    def test_counterfactual_column_populates_hidden_field(self, tmp_path):
        p = tmp_path / "cf.csv"
        p.write_text("x1,w,y,y_cf\n0.1,0,1.0,2.0\n", encoding="utf-8")
        ds = load_csv(p)
        assert ds.counterfactuals is not None
        np.testing.assert_allclose(ds.counterfactuals, [2.0])

    def test_bad_treatment_cites_row_5(self, tmp_path):
        rows = ["x1,w,y"] + [f"0.{i},0,1.0" for i in range(1, 5)] + ["0.5,2,1.0"]
        p = tmp_path / "bad_w.csv"
        p.write_text("\n".join(rows) + "\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="row 5"):
            load_csv(p)

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        p = tmp_path / "bad_cell.csv"
        p.write_text("x1,w,y\n0.1,0,1.0\nnope,1,2.0\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_csv(p)
        assert "row 2" in str(err.value)
        assert "x1" in str(err.value)

    def test_missing_mandatory_column(self, tmp_path):
        p = tmp_path / "no_y.csv"
        p.write_text("x1,w\n0.1,0\n", encoding="utf-8")
        with pytest.raises(ParseError, match="y"):
            load_csv(p)

    def test_unknown_column_rejected(self, tmp_path):
        p = tmp_path / "extra.csv"
        p.write_text("x1,w,y,bonus\n0.1,0,1.0,9\n", encoding="utf-8")
        with pytest.raises(ParseError, match="bonus"):
            load_csv(p)

    def test_short_row_names_row(self, tmp_path):
        p = tmp_path / "short.csv"
        p.write_text("x1,x2,w,y\n0.1,0.2,0,1.0\n0.3,1\n", encoding="utf-8")
        with pytest.raises(ParseError, match="row 2"):
            load_csv(p)

    def test_round_trip_exact(self, tmp_path):
        ds = _toy_dataset(n=12, d=3, seed=5)
        p = tmp_path / "rt.csv"
        write_csv(p, ds)
        back = load_csv(p)
        # repr-based formatting gives exact float round-trips
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.outcomes, ds.outcomes)
        np.testing.assert_array_equal(back.counterfactuals, ds.counterfactuals)
        np.testing.assert_array_equal(back.true_ite, ds.true_ite)
        np.testing.assert_array_equal(back.treatments, ds.treatments)

    @settings(max_examples=25, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=9),
        d=st.integers(min_value=1, max_value=4),
        seed=st.integers(),
    )
    def test_round_trip_relative_tolerance(self, tmp_path_factory, n, d, seed):
        rng = np.random.default_rng(abs(seed) % 2**32)
        X = rng.normal(scale=100.0, size=(n, d))
        w = (rng.uniform(size=n) < 0.5).astype(np.int64)
        y = rng.normal(scale=1e-3, size=n)
        ds = ObservationalDataset(X, w, y)
        p = tmp_path_factory.mktemp("rt") / "f.csv"
        write_csv(p, ds)
        back = load_csv(p)
        np.testing.assert_allclose(back.features, ds.features, rtol=1e-12)
        np.testing.assert_allclose(back.outcomes, ds.outcomes, rtol=1e-12)


class TestSplit:
    def test_documented_sizes(self):
        ds = _toy_dataset(n=10, d=1, seed=3)
        plan = make_split(ds, (0.6, 0.2, 0.2), J=3, seed=7)
        assert len(plan.train_idx) == 6
        assert len(plan.valid_idx) == 2
        assert len(plan.test_idx) == 2
        sizes = sorted(len(plan.fold_members(j)) for j in range(1, plan.J + 1))
        assert sizes == [2, 2, 2]

    def test_determinism(self):
        ds = _toy_dataset(n=10, d=1, seed=3)
        a = make_split(ds, (0.6, 0.2, 0.2), J=3, seed=7)
        b = make_split(ds, (0.6, 0.2, 0.2), J=3, seed=7)
        assert a == b

    def test_j_larger_than_train_rejected(self):
        ds = _toy_dataset(n=5, d=1)
        with pytest.raises(ValidationError):
            make_split(ds, (0.6, 0.2, 0.2), J=10, seed=0)

    def test_fractions_must_sum_to_one(self):
        ds = _toy_dataset(n=10, d=1)
        with pytest.raises(ValidationError):
            make_split(ds, (0.5, 0.2, 0.2), J=2, seed=0)

    def test_disjoint_and_complete(self):
        ds = _toy_dataset(n=23, d=2, seed=11)
        plan = make_split(ds, (0.6, 0.2, 0.2), J=4, seed=1)
        everything = np.concatenate([plan.train_idx, plan.valid_idx, plan.test_idx])
        assert len(set(everything.tolist())) == len(everything) == 23

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=12, max_value=60),
        st.integers(min_value=2, max_value=5),
        st.integers(min_value=0, max_value=2**31),
    )
    def test_fold_sizes_and_stratification(self, n, J, seed):
        rng = np.random.default_rng(seed % 1000)
        X = rng.uniform(size=(n, 1))
        w = (rng.uniform(size=n) < 0.4).astype(np.int64)
        y = rng.normal(size=n)
        ds = ObservationalDataset(X, w, y)
        plan = make_split(ds, (0.6, 0.2, 0.2), J=J, seed=seed)
        sizes = [len(plan.fold_members(j)) for j in range(1, J + 1)]
        assert max(sizes) - min(sizes) <= 1
        n_train = len(plan.train_idx)
        treated_frac = ds.treatments[plan.train_idx].mean()
        for j in range(1, J + 1):
            members = plan.fold_members(j)
            expected = treated_frac * len(members)
            assert abs(ds.treatments[members].sum() - expected) <= 1.0 + 1e-9

    def test_both_arms_in_train_when_groups_allow(self):
        rng = np.random.default_rng(4)
        n = 30
        X = rng.uniform(size=(n, 1))
        w = np.array([1] * 6 + [0] * 24)
        ds = ObservationalDataset(X, w, rng.normal(size=n))
        plan = make_split(ds, (0.6, 0.2, 0.2), J=3, seed=9)
        assert ds.treatments[plan.train_idx].sum() >= 1
        assert (1 - ds.treatments[plan.train_idx]).sum() >= 1

    def test_json_round_trip(self):
        ds = _toy_dataset(n=14, d=1, seed=2)
        plan = make_split(ds, (0.6, 0.2, 0.2), J=2, seed=42)
        blob = plan.to_json()
        back = SplitPlan.from_json(blob)
        assert back == plan
        # zero-based index arrays are part of the wire format
        payload = json.loads(blob)
        assert min(payload["train_idx"]) >= 0
        assert payload["seed"] == 42

    def test_fold_plan_covers_everything(self):
        ds = _toy_dataset(n=9, d=1, seed=6)
        plan = fold_plan(ds, J=3, seed=5)
        assert len(plan.train_idx) == 9
        assert len(plan.valid_idx) == 0
        got = sorted(np.concatenate([plan.fold_members(j) for j in range(1, 4)]).tolist())
        assert got == list(range(9))


class TestScaler:
    def test_train_only_statistics(self):
        X = np.array([[0.0], [2.0], [100.0]])
        sc = FeatureScaler.fit(X[:2])
        Z = sc.transform(X)
        np.testing.assert_allclose(Z[:2].mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(Z[:2].std(axis=0), 1.0, atol=1e-12)
        assert Z[2, 0] > 1.0

    def test_constant_column_guard(self):
        X = np.ones((4, 2))
        sc = FeatureScaler.fit(X)
        Z = sc.transform(X)
        assert np.all(np.isfinite(Z))
