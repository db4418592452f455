"""Random problem instances shared by module and acceptance tests."""

import numpy as np

from causalgp.gp import AugmentedPrior, MultiTaskPrior
from causalgp.kernels import LmcKernelSpec, ScalarKernelSpec


def random_scalar_spec(rng, d):
    if rng.uniform() < 0.75:
        nu = rng.choice([0.5, 1.5, 2.5])
        return ScalarKernelSpec(
            "matern", float(nu), tuple(rng.uniform(0.3, 2.0, size=d)), float(rng.uniform(0.5, 3.0))
        )
    return ScalarKernelSpec(
        "squared_exponential", None, tuple(rng.uniform(0.3, 2.0, size=d)), float(rng.uniform(0.5, 3.0))
    )


def random_lmc_spec(rng, d, eps=None):
    eps = float(rng.uniform(1e-5, 1e-3)) if eps is None else eps
    return LmcKernelSpec.from_correlations(
        random_scalar_spec(rng, d),
        random_scalar_spec(rng, d),
        float(rng.uniform(0.4, 2.0)),
        float(rng.uniform(0.2, 3.0)),
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(-1.0, 1.0)),
        eps,
    )


def random_multitask_instance(rng, n_max=6, d_max=3, m_queries=None):
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, 6)) if m_queries is None else m_queries
    prior = MultiTaskPrior(
        random_lmc_spec(rng, d),
        noise0=float(rng.uniform(0.05, 0.5)),
        noise1=float(rng.uniform(0.05, 0.5)),
    )
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    w = rng.integers(0, 2, size=n)
    y = rng.normal(0.0, 1.5, size=n)
    Xq = rng.uniform(-1.0, 1.0, size=(m, d))
    return prior, X, w, y, Xq


def random_augmented_instance(rng, n_max=6, d_max=3, m_queries=None):
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, 6)) if m_queries is None else m_queries
    kernel = random_scalar_spec(rng, d + 1)
    prior = AugmentedPrior(kernel, noise=float(rng.uniform(0.05, 0.5)))
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    w = rng.integers(0, 2, size=n)
    y = rng.normal(0.0, 1.5, size=n)
    Xq = rng.uniform(-1.0, 1.0, size=(m, d))
    return prior, X, w, y, Xq


def oracle_kernel_tuple(spec):
    return (spec.family, spec.nu, spec.length_scales, spec.variance)
