"""Independent numerical oracles used by the test suite.

Everything here is deliberately written from the closed forms with its
own constants and integration routines, so the implementation under
test is never on both sides of a comparison.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

R_CONST = math.sqrt(2.0 / math.pi)
S_CONST = (2.0 / (4.0 - math.pi)) ** (1.0 / 3.0)


def signed_cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def shape_g_reference(gamma: float) -> float:
    """Closed-form shape evaluated directly from its printed constants."""
    t = S_CONST * signed_cbrt(gamma)
    return t / math.sqrt(R_CONST**2 + t * t * (R_CONST**2 - 1.0))


def csn_pdf_reference(u, gamma: float):
    """Mean-0 variance-1 skew-normal density, written out from scratch."""
    t = S_CONST * signed_cbrt(gamma)
    xi = -t
    omega = math.sqrt(1.0 + t * t)
    alpha = shape_g_reference(gamma)
    z = (np.asarray(u, dtype=float) - xi) / omega
    return 2.0 / omega * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * ndtr(alpha * z)


def composite_gl(f, lo: float, hi: float, panel: float = 0.125, nodes: int = 16) -> float:
    """Composite Gauss-Legendre quadrature, panel width fine enough to
    resolve the near-half-normal cutoff at extreme skewness."""
    if hi <= lo:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, max(2, int(np.ceil((hi - lo) / panel)) + 1))
    mid = 0.5 * (edges[1:, None] + edges[:-1, None])
    half = 0.5 * (edges[1:, None] - edges[:-1, None])
    t = half * x[None, :] + mid
    return float(np.sum(half * w[None, :] * f(t)))


def csn_cdf_quad(u: float, gamma: float) -> float:
    """CSN cdf by quadrature of the reference density over (-12, u]."""
    return composite_gl(lambda t: csn_pdf_reference(t, gamma), -12.0, min(u, 12.0))


def csn_cdf_adaptive(u: float, gamma: float) -> float:
    """CSN cdf by scipy's adaptive quadrature (spot-check variant)."""
    val, _ = quad(lambda t: csn_pdf_reference(t, gamma), -12.0, u, epsabs=1e-13, limit=200)
    return val


def csn_moments_quad(pdf, gamma: float) -> tuple[float, float]:
    """Quadrature mean and variance of a supplied density."""
    mean = composite_gl(lambda t: t * pdf(t, gamma), -12.0, 12.0)
    second = composite_gl(lambda t: t * t * pdf(t, gamma), -12.0, 12.0)
    return mean, second - mean * mean


def sn_cdf_quad(u: float, alpha: float) -> float:
    """cdf of the plain skew normal SN(0, 1, alpha) by quadrature."""

    def dens(t):
        return 2.0 * np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi) * ndtr(alpha * t)

    return composite_gl(dens, -12.0, min(u, 12.0))


def owen_t_gl(h: float, a: float, nodes: int = 64) -> float:
    """Owen's T from its defining integral with fixed Gauss-Legendre nodes."""
    if a == 0.0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * a * (x + 1.0)
    f = np.exp(-0.5 * h * h * (1.0 + t * t)) / (1.0 + t * t)
    return float(0.5 * a * np.sum(w * f) / (2.0 * math.pi))


def cell_probs(fine: np.ndarray, dens: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Probabilities of the cells [edges[k], edges[k+1]) for a density
    tabulated on a fine grid, via the interpolated cumulative integral."""
    from scipy.integrate import cumulative_trapezoid

    cdf = np.concatenate([[0.0], cumulative_trapezoid(dens, fine)])
    cdf /= cdf[-1]
    at_edges = np.interp(edges, fine, cdf)
    return np.diff(at_edges)


def quantile_by_bisection(cdf, p: float, gamma: float, lo: float = -14.0, hi: float = 14.0) -> float:
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if cdf(mid, gamma) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bernoulli_loglik_reference(p: float, y: int) -> float:
    return math.log(p) if y == 1 else math.log1p(-p)


def _truncnorm_draw(rng, mean, positive):
    """Inverse-cdf draw of N(mean, 1) truncated to a half line."""
    from scipy.special import ndtri

    u = rng.random(mean.shape)
    lo = ndtr(-mean)  # P(X - mean < -mean) = P(X < 0)
    with np.errstate(divide="ignore"):
        q = np.where(positive, lo + u * (1.0 - lo), u * lo)
        q = np.clip(q, 1e-15, 1.0 - 1e-15)
        return mean + ndtri(q)


def albert_chib_2pno(
    y: np.ndarray,
    iterations: int,
    burnin: int,
    seed: int,
    mu_a: float = 1.0,
    sigma_a: float = 0.7,
    sigma_d: float = 1.5,
) -> dict[str, np.ndarray]:
    """Conjugate data-augmentation Gibbs sampler for the two-parameter
    normal-ogive model, in the slope/intercept parametrisation
    m_ij = a_i * theta_j + d_i (so b_i = -d_i / a_i).

    This is a completely different algorithm from the package sampler
    (exact Gibbs on latent normal utilities rather than random-walk
    Metropolis), which makes it a usable cross-check of the stationary
    distribution on symmetric data.
    """
    rng = np.random.default_rng(seed)
    nitems, nsub = y.shape
    positive = y == 1

    score = y.sum(axis=0).astype(float)
    sd = score.std() if score.std() > 1e-12 else 1.0
    theta = (score - score.mean()) / sd
    a = np.ones(nitems)
    d = np.zeros(nitems)

    prior_prec = np.diag([1.0 / sigma_a**2, 1.0 / sigma_d**2])
    prior_mean = np.array([mu_a, 0.0])

    keep_theta = np.zeros(nsub)
    keep_a = np.zeros(nitems)
    keep_b = np.zeros(nitems)
    kept = 0
    for t in range(iterations):
        m = a[:, None] * theta[None, :] + d[:, None]
        ystar = _truncnorm_draw(rng, m, positive)

        # theta_j | rest: N(0,1) prior
        prec = 1.0 + np.sum(a * a)
        mean = (a @ (ystar - d[:, None])) / prec
        theta = mean + rng.standard_normal(nsub) / math.sqrt(prec)

        # (a_i, d_i) | rest: bivariate normal regression, a truncated positive
        x = np.column_stack([theta, np.ones(nsub)])
        xtx = x.T @ x
        post_prec = xtx + prior_prec
        cov = np.linalg.inv(post_prec)
        chol = np.linalg.cholesky(cov)
        rhs = x.T @ ystar.T + (prior_prec @ prior_mean)[:, None]
        post_mean = cov @ rhs
        for i in range(nitems):
            for _ in range(100):
                draw = post_mean[:, i] + chol @ rng.standard_normal(2)
                if draw[0] > 0:
                    break
            a[i], d[i] = draw

        if t >= burnin:
            keep_theta += theta
            keep_a += a
            keep_b += -d / a
            kept += 1
    return {
        "theta_mean": keep_theta / kept,
        "a_mean": keep_a / kept,
        "b_mean": keep_b / kept,
    }
