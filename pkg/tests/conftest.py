"""Session fixtures for the Monte-Carlo studies shared between module tests
and the acceptance suite. Each fixture runs one seeded study once per session;
everything downstream asserts against the same frozen run."""

import numpy as np
import pytest

from causalgp.benchmark import IhdpSource, default_roster, run_benchmark
from causalgp.dataset import fold_plan
from causalgp.empirical_bayes import EbConfig, select_hyperparameters
from causalgp.estimators import EstimatorSpec
from causalgp.metrics import run_rate_study
from causalgp.synthgen import (
    ConstantPropensity,
    GeneratorConfig,
    GpDrawSurface,
    LogisticPropensity,
    generate,
)

# Selection-direction study: rough arm (nu=1/2, short scale) vs smooth arm
# (nu=5/2), moderate noise. The fine lattice matters: at coarse resolution the
# draws are piecewise linear between nodes, which erases the roughness the
# study is about.
SELECTION_SETTINGS = dict(
    ell0=0.15, ell1=0.5, noise0=0.25, noise1=0.25, gamma=0.4,
    resolution=2048, budget=40, J=10,
)


def run_selection_study(n: int, replicates: int = 20, seed0: int = 0):
    """Per replicate: selected multitask (nu0, nu1) under the information
    criterion and the single augmented nu under the likelihood criterion."""
    s = SELECTION_SETTINGS
    out = []
    for r in range(replicates):
        cfg = GeneratorConfig(
            n=n,
            d=1,
            surface0=GpDrawSurface(0.5, s["ell0"], 1.0, resolution=s["resolution"]),
            surface1=GpDrawSurface(2.5, s["ell1"], 1.0, resolution=s["resolution"]),
            relevant_dims0=(1,),
            relevant_dims1=(1,),
            noise0=s["noise0"],
            noise1=s["noise1"],
            propensity=ConstantPropensity(s["gamma"]),
            seed=seed0 + 1000 + r,
        )
        ds = generate(cfg)
        plan = fold_plan(ds, s["J"], seed0 + r)
        rep_info = select_hyperparameters(
            ds, plan,
            EbConfig(criterion="information", J=s["J"], budget=s["budget"], seed=seed0 + r),
            "multitask",
        )
        rep_lik = select_hyperparameters(
            ds, plan,
            EbConfig(criterion="likelihood", J=s["J"], budget=s["budget"], seed=seed0 + r),
            "augmented",
        )
        out.append(
            (
                rep_info.candidates[rep_info.selected_index].smoothness,
                rep_lik.candidates[rep_lik.selected_index].smoothness,
            )
        )
    return out


@pytest.fixture(scope="session")
def selection_study_400():
    return run_selection_study(n=400)


@pytest.fixture(scope="session")
def selection_study_100():
    return run_selection_study(n=100)


# Rate-trend study: both arms nu=1/2 in d=1, multitask estimator locked to the
# matched smoothness pair. Likelihood EB keeps the continuous fit stable at
# every size; the information/likelihood contrast is someone else's test.
RATE_SIZES = (50, 100, 200, 400)


def rate_generator(biased: bool) -> GeneratorConfig:
    if biased:
        prop = LogisticPropensity(weights=(1.0,), bias=-0.5, steepness=3.0)
    else:
        prop = ConstantPropensity(0.5)
    return GeneratorConfig(
        n=400,
        d=1,
        surface0=GpDrawSurface(0.5, 0.2, 1.0, resolution=2048),
        surface1=GpDrawSurface(0.5, 0.2, 1.0, resolution=2048),
        relevant_dims0=(1,),
        relevant_dims1=(1,),
        noise0=0.3,
        noise1=0.3,
        propensity=prop,
        overlap_clamp=(0.1, 0.9),
        seed=0,
    )


def run_rate_pair(seed: int):
    spec = EstimatorSpec("mtgp_lik", budget=50, J=10, smoothness_grid=((0.5, 0.5),))
    flat = run_rate_study(rate_generator(False), spec, sizes=RATE_SIZES, R=10, seed=seed)
    steep = run_rate_study(rate_generator(True), spec, sizes=RATE_SIZES, R=10, seed=seed)
    return flat, steep


@pytest.fixture(scope="session")
def rate_studies():
    """{seed: (constant-propensity result, steep-propensity result)}."""
    return {seed: run_rate_pair(seed) for seed in (0, 1, 2)}


@pytest.fixture(scope="session")
def analog_benchmark():
    return run_benchmark(IhdpSource(), roster=default_roster(), R=50, seed=0)


def out_of_sample(report, name):
    for result in report.results:
        if result.name == name:
            return result.out_of_sample
    raise KeyError(name)
