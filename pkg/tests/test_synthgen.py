"""Generator contracts: overlap, unconfoundedness by construction, surface
regularity knobs, and the IHDP-style analog."""

import numpy as np
import pytest

from causalgp.dataset import load_csv, write_csv
from causalgp.errors import ValidationError
from causalgp.synthgen import (
    ConstantPropensity,
    EXACT_DRAW_CAP,
    GeneratorConfig,
    GpDrawSurface,
    LinearSurface,
    LogisticPropensity,
    PolynomialSurface,
    generate,
    generator_config_from_json_dict,
    gp_draw_surface,
    ihdp_analog,
    ihdp_realization,
    realize,
)


def _linear_config(**overrides):
    base = dict(
        n=50,
        d=2,
        surface0=LinearSurface((1.0,)),
        surface1=LinearSurface((1.0,), intercept=2.0),
        relevant_dims0=(1,),
        relevant_dims1=(1,),
        noise0=0.0,
        noise1=0.0,
        propensity=ConstantPropensity(0.5),
        seed=11,
    )
    base.update(overrides)
    return GeneratorConfig(**base)


class TestGenerate:
    def test_constant_effect_two(self):
        ds = generate(_linear_config())
        np.testing.assert_allclose(ds.true_ite, 2.0, atol=1e-12)
        np.testing.assert_allclose(
            np.where(ds.treatments == 1, ds.outcomes - ds.counterfactuals,
                     ds.counterfactuals - ds.outcomes),
            2.0, atol=1e-12,
        )

    def test_saturated_propensity_hits_the_clamp(self):
        fractions = []
        for seed in range(5):
            cfg = _linear_config(n=1000, propensity=ConstantPropensity(1.0),
                                 overlap_clamp=(0.05, 0.95), seed=seed)
            ds = generate(cfg)
            fractions.append(ds.treatments.mean())
        assert 0.90 <= float(np.mean(fractions)) <= 0.99

    def test_identical_surface_specs_give_zero_ite(self):
        surf = GpDrawSurface(nu=1.5, length_scale=0.3, variance=1.0)
        cfg = _linear_config(surface0=surf, surface1=surf,
                             relevant_dims0=(1,), relevant_dims1=(1,))
        ds = generate(cfg)
        np.testing.assert_allclose(ds.true_ite, 0.0, atol=1e-12)
        assert np.any(ds.outcomes != 0.0)

    def test_features_live_on_unit_cube(self):
        ds = generate(_linear_config(n=200, seed=3))
        assert ds.features.min() >= 0.0 and ds.features.max() <= 1.0
        assert set(np.unique(ds.treatments)) <= {0, 1}

    def test_regenerated_assignments_keep_potential_outcomes(self):
        cfg = _linear_config(
            n=300,
            surface0=GpDrawSurface(nu=0.5, length_scale=0.2, variance=1.0),
            surface1=GpDrawSurface(nu=2.5, length_scale=0.4, variance=2.0),
            noise0=0.5, noise1=0.3,
            propensity=LogisticPropensity((3.0, -2.0), bias=-0.5, steepness=2.0),
            seed=21,
        )
        a = generate(cfg)
        b = generate(cfg, omega_seed=999)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.true_ite, b.true_ite)
        y0_a = np.where(a.treatments == 1, a.counterfactuals, a.outcomes)
        y0_b = np.where(b.treatments == 1, b.counterfactuals, b.outcomes)
        y1_a = np.where(a.treatments == 1, a.outcomes, a.counterfactuals)
        y1_b = np.where(b.treatments == 1, b.outcomes, b.counterfactuals)
        np.testing.assert_array_equal(y0_a, y0_b)
        np.testing.assert_array_equal(y1_a, y1_b)
        assert np.any(a.treatments != b.treatments)

    def test_realized_propensity_is_clamped(self):
        cfg = _linear_config(
            n=400,
            propensity=LogisticPropensity((8.0, 8.0), bias=-8.0, steepness=4.0),
            overlap_clamp=(0.1, 0.9),
            seed=5,
        )
        r = realize(cfg)
        gamma = r.propensity(generate(cfg).features)
        assert gamma.min() >= 0.1 - 1e-12 and gamma.max() <= 0.9 + 1e-12
        # the unclamped map actually leaves the band, so the clamp is active
        raw = r.gamma_raw(generate(cfg).features)
        assert raw.min() < 0.1 or raw.max() > 0.9

    def test_same_config_is_bitwise_stable(self):
        cfg = _linear_config(
            n=64,
            surface0=GpDrawSurface(nu=1.5, length_scale=0.25, variance=1.0),
            noise0=0.4, noise1=0.2, seed=9,
        )
        assert generate(cfg) == generate(cfg)

    def test_csv_round_trip_keeps_hidden_columns(self, tmp_path):
        ds = generate(_linear_config(n=20, seed=2))
        path = tmp_path / "synthetic.csv"
        write_csv(path, ds)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,w,y,y_cf,ite"
        assert load_csv(path) == ds

    def test_polynomial_surface_values(self):
        cfg = _linear_config(
            surface0=PolynomialSurface((1.0, 2.0)),
            relevant_dims0=(1, 2),
            surface1=LinearSurface((0.0,), intercept=0.0),
            relevant_dims1=(1,),
            seed=4,
        )
        ds = generate(cfg)
        s = ds.features[:, 0] + ds.features[:, 1]
        np.testing.assert_allclose(-ds.true_ite, 1.0 + 2.0 * s, atol=1e-12)


class TestConfigValidation:
    def test_dims_must_be_in_range(self):
        with pytest.raises(ValidationError):
            _linear_config(relevant_dims0=(0,))
        with pytest.raises(ValidationError):
            _linear_config(relevant_dims0=(3,))

    def test_clamp_must_be_interior(self):
        for clamp in [(0.0, 0.9), (0.5, 0.4), (0.1, 1.0)]:
            with pytest.raises(ValidationError):
                _linear_config(overlap_clamp=clamp)

    def test_linear_weight_count_checked_at_realize(self):
        cfg = _linear_config(surface0=LinearSurface((1.0, 2.0)), relevant_dims0=(1,))
        with pytest.raises(ValidationError):
            realize(cfg)

    def test_logistic_weight_count_checked(self):
        cfg = _linear_config(propensity=LogisticPropensity((1.0,)))
        with pytest.raises(ValidationError):
            realize(cfg)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValidationError):
            _linear_config(noise0=-0.1)

    def test_json_round_trip_and_strictness(self):
        cfg = _linear_config(
            surface0=GpDrawSurface(nu=0.5, length_scale=0.3, variance=1.5, resolution=32),
            propensity=LogisticPropensity((1.0, -1.0), bias=0.2, steepness=3.0),
        )
        back = generator_config_from_json_dict(cfg.to_json_dict())
        assert back == cfg
        blob = cfg.to_json_dict()
        blob["alpha"] = 1
        with pytest.raises(ValidationError, match="alpha"):
            generator_config_from_json_dict(blob)
        bad = cfg.to_json_dict()
        bad["surface0"] = {"kind": "gp_draw", "nu": 0.5}
        with pytest.raises(ValidationError, match="missing"):
            generator_config_from_json_dict(bad)


class TestGpDrawSurface:
    def test_irrelevant_dimension_is_ignored(self):
        surf = gp_draw_surface(1.5, 0.3, 1.0, dims=(1,), seed=5)
        rng = np.random.default_rng(0)
        a = rng.uniform(size=(40, 2))
        b = a.copy()
        b[:, 1] = rng.uniform(size=40)
        np.testing.assert_array_equal(surf(a), surf(b))

    def test_zero_variance_is_the_zero_surface(self):
        surf = gp_draw_surface(1.5, 0.3, 0.0, dims=(1, 2), seed=1)
        X = np.random.default_rng(1).uniform(size=(10, 2))
        np.testing.assert_array_equal(surf(X), np.zeros(10))

    def test_deterministic_given_seed(self):
        X = np.random.default_rng(2).uniform(size=(25, 1))
        a = gp_draw_surface(0.5, 0.2, 1.0, dims=(1,), seed=7)(X)
        b = gp_draw_surface(0.5, 0.2, 1.0, dims=(1,), seed=7)(X)
        c = gp_draw_surface(0.5, 0.2, 1.0, dims=(1,), seed=8)(X)
        np.testing.assert_array_equal(a, b)
        assert np.any(a != c)

    def test_lattice_cap(self):
        with pytest.raises(ValidationError, match="cap"):
            gp_draw_surface(1.5, 0.3, 1.0, dims=(1, 2, 3, 4), grid_resolution=64)

    def test_exact_draw_marginal_variance(self):
        """Pooled variance of lattice values over 50 seeds tracks sigma^2."""
        values = []
        for seed in range(50):
            surf = gp_draw_surface(0.5, 0.15, 2.0, dims=(1,), grid_resolution=64, seed=seed)
            assert surf.draw_method == "exact"
            grid = np.linspace(0.0, 1.0, 64)[:, None]
            values.append(surf(grid))
        pooled = float(np.var(np.concatenate(values)))
        assert 0.8 * 2.0 <= pooled <= 1.2 * 2.0

    def test_fourier_fallback_marginal_variance(self):
        assert 64 * 64 > EXACT_DRAW_CAP
        values = []
        rng = np.random.default_rng(0)
        Xq = rng.uniform(size=(500, 2))
        for seed in range(10):
            surf = gp_draw_surface(1.5, 0.15, 1.5, dims=(1, 2), grid_resolution=64, seed=seed)
            assert surf.draw_method == "rff"
            values.append(surf(Xq))
        pooled = float(np.var(np.concatenate(values)))
        assert 0.8 * 1.5 <= pooled <= 1.2 * 1.5


class TestIhdpAnalog:
    def test_default_size_and_treated_count(self):
        for seed in range(5):
            ds = ihdp_analog(seed=seed)
            assert ds.n == 747 and ds.d == 25
            assert 100 <= int(ds.treatments.sum()) <= 180

    def test_arms_differ_and_treated_surface_is_linear(self):
        r = ihdp_realization(seed=3)
        rng = np.random.default_rng(0)
        x = r.sample_features(1, rng)
        for j in range(25):
            a, b, c = x.copy(), x.copy(), x.copy()
            a[0, j], b[0, j], c[0, j] = 0.0, 0.5, 1.0
            second_diff = r.f1(a)[0] - 2.0 * r.f1(b)[0] + r.f1(c)[0]
            assert abs(second_diff) <= 1e-8
        X = r.sample_features(200, rng)
        assert not np.allclose(r.f0(X), r.f1(X))

    def test_overlap_within_clamp(self):
        r = ihdp_realization(seed=1)
        X = r.sample_features(1000, np.random.default_rng(5))
        gamma = r.propensity(X)
        assert gamma.min() >= 0.05 - 1e-12 and gamma.max() <= 0.95 + 1e-12

    def test_deterministic(self):
        assert ihdp_analog(seed=4) == ihdp_analog(seed=4)
        assert ihdp_analog(seed=4) != ihdp_analog(seed=5)

    def test_covariates_are_mixed(self):
        ds = ihdp_analog(seed=2)
        binary = [len(np.unique(ds.features[:, j])) <= 2 for j in range(25)]
        assert sum(binary) == 19
        assert not any(binary[:6])
