"""Reference implementations used as test oracles.

Everything here is written the slow, obvious way: scalar math, explicit
loops, and direct matrix inversion.  Library results are checked against
this independent arithmetic rather than against themselves.
"""

import math

import numpy as np


# --------------------------------------------------------------------------
# Scalar kernels (closed forms, scalar arithmetic)


def matern_value(nu, length_scales, variance, x, xp):
    r2 = 0.0
    for k in range(len(x)):
        r2 += ((x[k] - xp[k]) / length_scales[k]) ** 2
    r = math.sqrt(r2)
    if nu == 0.5:
        return variance * math.exp(-r)
    if nu == 1.5:
        return variance * (1.0 + math.sqrt(3.0) * r) * math.exp(-math.sqrt(3.0) * r)
    if nu == 2.5:
        return variance * (1.0 + math.sqrt(5.0) * r + 5.0 * r2 / 3.0) * math.exp(-math.sqrt(5.0) * r)
    raise ValueError(f"no closed form for nu={nu}")


def se_value(length_scales, variance, x, xp):
    r2 = sum(((x[k] - xp[k]) / length_scales[k]) ** 2 for k in range(len(x)))
    return variance * math.exp(-0.5 * r2)


def scalar_value(kind, nu, length_scales, variance, x, xp):
    if kind == "matern":
        return matern_value(nu, length_scales, variance, x, xp)
    if kind == "squared_exponential":
        return se_value(length_scales, variance, x, xp)
    raise ValueError(kind)


def lmc_coefficients(a00, b11, a01, b01, eps):
    A = np.array([[a00**2, a01], [a01, eps]])
    B = np.array([[eps, b01], [b01, b11]])
    return A, B


def lmc_entry(k0, k1, A, B, x, xp, t, tp):
    """k0/k1 are (kind, nu, length_scales, variance) tuples."""
    v0 = scalar_value(*k0, x, xp)
    v1 = scalar_value(*k1, x, xp)
    return A[t][tp] * v0 + B[t][tp] * v1


# --------------------------------------------------------------------------
# Dense GP posterior / evidence by direct inversion


def dense_tasked_posterior(entry, X, w, y, noise_for, Xq, centers):
    """Posterior moments and evidence for task-indexed observations.

    entry(x, t, xp, tp) -> prior covariance scalar.
    noise_for(t) -> observation noise variance for arm t.
    centers = (m0, m1): constants subtracted per arm before inference and
    added back to the reported means.
    """
    n = len(y)
    m = len(Xq)
    z = np.array([y[i] - centers[w[i]] for i in range(n)])
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            K[i, j] = entry(X[i], w[i], X[j], w[j])
    A = K + np.diag([noise_for(w[i]) for i in range(n)])
    Ainv = np.linalg.inv(A)

    def cross(t):
        Ks = np.empty((n, m))
        for i in range(n):
            for q in range(m):
                Ks[i, q] = entry(X[i], w[i], Xq[q], t)
        return Ks

    Ks0, Ks1 = cross(0), cross(1)
    mean0 = centers[0] + Ks0.T @ Ainv @ z
    mean1 = centers[1] + Ks1.T @ Ainv @ z
    var0 = np.array([entry(Xq[q], 0, Xq[q], 0) for q in range(m)]) - np.einsum("iq,ij,jq->q", Ks0, Ainv, Ks0)
    var1 = np.array([entry(Xq[q], 1, Xq[q], 1) for q in range(m)]) - np.einsum("iq,ij,jq->q", Ks1, Ainv, Ks1)
    cov01 = np.array([entry(Xq[q], 0, Xq[q], 1) for q in range(m)]) - np.einsum("iq,ij,jq->q", Ks0, Ainv, Ks1)
    sign, logdet = np.linalg.slogdet(A)
    assert sign > 0
    lml = -0.5 * z @ Ainv @ z - 0.5 * logdet - 0.5 * n * math.log(2.0 * math.pi)
    return {
        "mean0": mean0,
        "mean1": mean1,
        "var0": var0,
        "var1": var1,
        "cov01": cov01,
        "ite_mean": mean1 - mean0,
        "ite_var": var0 + var1 - 2.0 * cov01,
        "lml": lml,
    }


def multitask_entry_fn(k0, k1, A, B):
    def entry(x, t, xp, tp):
        return lmc_entry(k0, k1, A, B, x, xp, t, tp)
    return entry


def augmented_entry_fn(kind, nu, length_scales, variance):
    """Scalar kernel over the (x, w) augmented input; last scale is for w."""
    def entry(x, t, xp, tp):
        xa = list(x) + [float(t)]
        xpa = list(xp) + [float(tp)]
        return scalar_value(kind, nu, length_scales, variance, xa, xpa)
    return entry


def arm_centers(w, y):
    m = [0.0, 0.0]
    for a in (0, 1):
        vals = [y[i] for i in range(len(y)) if w[i] == a]
        if vals:
            m[a] = sum(vals) / len(vals)
    return (m[0], m[1])


def global_center(y):
    c = float(np.mean(y))
    return (c, c)


def dense_single_task(entry_xx, X, y, noise, Xq):
    """Single-output GP with constant-mean centering, direct inversion."""
    n = len(y)
    c = float(np.mean(y))
    z = np.asarray(y, dtype=float) - c
    K = np.array([[entry_xx(X[i], X[j]) for j in range(n)] for i in range(n)])
    A = K + noise * np.eye(n)
    Ainv = np.linalg.inv(A)
    Ks = np.array([[entry_xx(X[i], Xq[q]) for q in range(len(Xq))] for i in range(n)])
    mean = c + Ks.T @ Ainv @ z
    var = np.array([entry_xx(Xq[q], Xq[q]) for q in range(len(Xq))]) - np.einsum(
        "iq,ij,jq->q", Ks, Ainv, Ks
    )
    return mean, var


# --------------------------------------------------------------------------
# Information objective by hand loop


def hand_information_objective(entry, train, eval_pts, noise_for, centers):
    """Factual-bias and counterfactual-variance sums via the dense oracle."""
    Xtr, wtr, ytr = train
    Xev, wev, yev = eval_pts
    post = dense_tasked_posterior(entry, Xtr, wtr, ytr, noise_for, Xev, centers)
    bias = 0.0
    cf_var = 0.0
    for i in range(len(yev)):
        mu = post["mean1"][i] if wev[i] == 1 else post["mean0"][i]
        bias += (yev[i] - mu) ** 2
        other = 1 - wev[i]
        v = post["var1"][i] if other == 1 else post["var0"][i]
        cf_var += v + noise_for(other)
    return bias, cf_var


# --------------------------------------------------------------------------
# Ordinary least squares on (log n, log risk)


def ols_loglog(ns, risks):
    lx = np.log(np.asarray(ns, dtype=float))
    ly = np.log(np.asarray(risks, dtype=float))
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    dof = max(len(lx) - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, intercept, stderr
