"""Model state, priors and likelihood for the 2PCSP and 3PCSP models.

2PCSP: P(Y_ij = 1) = Phi_CSN(a_i * (theta_j - b_i), gamma_i)
3PCSP: P(Y_ij = 1) = c_i + (1 - c_i) * Phi_CSN(a_i * (theta_j - b_i), gamma_i)

Each item's skewness is a three-component point-mass mixture: a point
mass at 0 (symmetric item) and continuous negative / positive components
gamma_neg and gamma_pos selected by the one-hot indicator Z with
Dirichlet-distributed weights w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betainc, betaln, gammaln, ndtr

from . import csn
from .csn import GAMMA_MAX

__all__ = [
    "ItemState",
    "Abilities",
    "ResponseMatrix",
    "AuxIndicators",
    "PriorConfig",
    "predictor",
    "icc",
    "mixture_icc",
    "loglik",
    "log_prior",
    "norm_logpdf",
    "truncnorm_pos_logpdf",
    "trunc_beta_logpdf",
    "beta_logpdf",
    "dirichlet_logpdf",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ItemState:
    """Parameters of one test item.

    ``z`` is the one-hot symmetry indicator over (symmetric, negative,
    positive) and ``w`` its mixture weights; the effective skewness is
    0, gamma_neg or gamma_pos according to which entry of z is 1.
    """

    a: float
    b: float
    c: float = 0.0
    gamma_neg: float = -0.5
    gamma_pos: float = 0.5
    z: tuple[int, int, int] = (1, 0, 0)
    w: tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"discrimination must be positive, got {self.a}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"guessing must lie in [0, 1), got {self.c}")
        if not -GAMMA_MAX < self.gamma_neg < 0.0:
            raise ValueError(f"gamma_neg must lie in (-{GAMMA_MAX}, 0), got {self.gamma_neg}")
        if not 0.0 < self.gamma_pos < GAMMA_MAX:
            raise ValueError(f"gamma_pos must lie in (0, {GAMMA_MAX}), got {self.gamma_pos}")
        if sorted(self.z) != [0, 0, 1]:
            raise ValueError(f"z must be one-hot over three components, got {self.z}")
        if len(self.w) != 3 or any(wk <= 0 for wk in self.w):
            raise ValueError(f"w must have three positive components, got {self.w}")
        if abs(sum(self.w) - 1.0) > 1e-12:
            raise ValueError(f"w must sum to 1 within 1e-12, got sum {sum(self.w)!r}")

    @property
    def gamma(self) -> float:
        """Effective skewness selected by the one-hot indicator."""
        k = self.z.index(1)
        return (0.0, self.gamma_neg, self.gamma_pos)[k]


@dataclass(frozen=True)
class Abilities:
    """Latent trait vector, one entry per subject."""

    theta: np.ndarray

    def __post_init__(self) -> None:
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 1:
            raise ValueError("theta must be a 1-d vector")
        if not np.all(np.isfinite(th)):
            raise ValueError("theta entries must be finite")
        object.__setattr__(self, "theta", th)

    def __len__(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class ResponseMatrix:
    """I x J binary response matrix with item and subject labels.

    Entries must be exactly 0 or 1; missing responses are rejected, the
    likelihood below assumes a complete matrix.
    """

    y: np.ndarray
    item_ids: tuple[str, ...]
    subject_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        y = np.asarray(self.y)
        if y.ndim != 2:
            raise ValueError("responses must be a 2-d matrix")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("responses must contain only 0/1 entries")
        y = y.astype(np.int8)
        item_ids = tuple(str(s) for s in self.item_ids)
        subject_ids = tuple(str(s) for s in self.subject_ids)
        if len(item_ids) != y.shape[0]:
            raise ValueError(
                f"{len(item_ids)} item ids for {y.shape[0]} item rows"
            )
        if len(subject_ids) != y.shape[1]:
            raise ValueError(
                f"{len(subject_ids)} subject ids for {y.shape[1]} subject columns"
            )
        if len(set(item_ids)) != len(item_ids):
            raise ValueError("duplicate item ids")
        if len(set(subject_ids)) != len(subject_ids):
            raise ValueError("duplicate subject ids")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "item_ids", item_ids)
        object.__setattr__(self, "subject_ids", subject_ids)

    @property
    def n_items(self) -> int:
        return self.y.shape[0]

    @property
    def n_subjects(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class AuxIndicators:
    """Per-response guessing indicators D; D_ij = 1 marks a guessed answer."""

    d: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.d)
        if d.ndim != 2 or not np.isin(d, (0, 1)).all():
            raise ValueError("indicators must be a 2-d 0/1 matrix")
        object.__setattr__(self, "d", d.astype(np.int8))

    def check_against(self, y: np.ndarray) -> None:
        """A guessed answer is necessarily correct: D_ij = 1 requires Y_ij = 1."""
        if self.d.shape != y.shape:
            raise ValueError(f"indicator shape {self.d.shape} != response shape {y.shape}")
        if np.any((self.d == 1) & (np.asarray(y) == 0)):
            raise ValueError("D_ij = 1 at a pair with Y_ij = 0")


@dataclass
class PriorConfig:
    """Hyperparameters of all priors.

    dirichlet   weights prior (symmetric, negative, positive components)
    beta_skew   Beta(alpha, beta) shared by gamma_pos and -gamma_neg,
                truncated to (0, GAMMA_MAX)
    mu_a, sigma_a   normal prior on discrimination, truncated to a > 0
    mu_b, sigma_b   normal prior on difficulty
    beta_guess  Beta prior on the guessing parameter when it is estimated
    """

    dirichlet: tuple[float, float, float] = (0.1, 0.01, 0.01)
    beta_skew: tuple[float, float] = (1.0, 1.0)
    mu_a: float = 1.0
    sigma_a: float = 0.7
    mu_b: float = 0.0
    sigma_b: float = 1.0
    beta_guess: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        if any(x <= 0 for x in self.dirichlet):
            raise ValueError("dirichlet parameters must be positive")
        if any(x <= 0 for x in self.beta_skew):
            raise ValueError("beta_skew parameters must be positive")
        if any(x <= 0 for x in self.beta_guess):
            raise ValueError("beta_guess parameters must be positive")
        if self.sigma_a <= 0 or self.sigma_b <= 0:
            raise ValueError("prior scales must be positive")


def predictor(a, b, theta):
    """Linear predictor a * (theta - b); requires a > 0."""
    return a * (theta - b)


def icc(m, gamma, c: float = 0.0):
    """Item characteristic curve c + (1 - c) * Phi_CSN(m, gamma).

    Strictly increasing in ``m`` with lower asymptote ``c``.
    """
    if not 0.0 <= c < 1.0:
        raise ValueError(f"guessing must lie in [0, 1), got {c}")
    return c + (1.0 - c) * csn.cdf(m, gamma)


def mixture_icc(m, w, gamma_neg: float, gamma_pos: float):
    """ICC with the indicator integrated out:

    w0 * Phi_CSN(m, 0) + w1 * Phi_CSN(m, gamma_neg) + w2 * Phi_CSN(m, gamma_pos).
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (3,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"w must be a 3-point simplex vector, got {w!r}")
    if not -GAMMA_MAX < gamma_neg < 0.0:
        raise ValueError(f"gamma_neg must lie in (-{GAMMA_MAX}, 0), got {gamma_neg}")
    if not 0.0 < gamma_pos < GAMMA_MAX:
        raise ValueError(f"gamma_pos must lie in (0, {GAMMA_MAX}), got {gamma_pos}")
    return (
        w[0] * csn.cdf(m, 0.0)
        + w[1] * csn.cdf(m, gamma_neg)
        + w[2] * csn.cdf(m, gamma_pos)
    )


def loglik(items: Sequence, theta, y, d) -> float:
    """Log-likelihood of the responses given the augmentation mask.

    Pairs with d_ij = 1 contribute 0 (a guessed answer has likelihood 1);
    pairs with d_ij = 0 contribute the Bernoulli term at the item's
    effective skewness.  Returns -inf if a cdf value underflows to
    exactly 0 or 1 at an observed contradiction.
    """
    th = theta.theta if isinstance(theta, Abilities) else np.asarray(theta, dtype=float)
    ymat = y.y if isinstance(y, ResponseMatrix) else np.asarray(y)
    dmat = d.d if isinstance(d, AuxIndicators) else np.asarray(d)
    if ymat.shape != (len(items), th.shape[0]):
        raise ValueError(
            f"response shape {ymat.shape} does not match {len(items)} items x {th.shape[0]} subjects"
        )
    if dmat.shape != ymat.shape:
        raise ValueError(f"indicator shape {dmat.shape} != response shape {ymat.shape}")
    if np.any((dmat == 1) & (ymat == 0)):
        raise ValueError("D_ij = 1 at a pair with Y_ij = 0")

    total = 0.0
    for i, item in enumerate(items):
        g = item.gamma
        m = predictor(item.a, item.b, th)
        p = np.atleast_1d(csn.cdf(m, g))
        q = np.atleast_1d(csn.cdf(-m, -g))  # 1 - p by reflection, no cancellation
        with np.errstate(divide="ignore"):
            terms = np.where(ymat[i] == 1, np.log(p), np.log(q))
        total += float(np.where(dmat[i] == 0, terms, 0.0).sum())
    return total


def log_prior(items: Sequence, theta, config: PriorConfig, estimate_c: bool = False) -> float:
    """Joint log prior density of items and abilities.

    Sums truncated-normal terms for a, normal for b, standard normal for
    theta, Dirichlet for w and truncated Beta for the two skewness
    components; the guessing Beta term is added only when ``estimate_c``.
    Out-of-support values yield -inf rather than an exception, so the
    result can serve directly as a Metropolis-Hastings rejection.
    """
    th = theta.theta if isinstance(theta, Abilities) else np.asarray(theta, dtype=float)
    total = float(np.sum(norm_logpdf(th, 0.0, 1.0)))
    a_skew, b_skew = config.beta_skew
    for item in items:
        total += truncnorm_pos_logpdf(item.a, config.mu_a, config.sigma_a)
        total += norm_logpdf(item.b, config.mu_b, config.sigma_b)
        total += dirichlet_logpdf(np.asarray(item.w, dtype=float), np.asarray(config.dirichlet))
        total += trunc_beta_logpdf(-item.gamma_neg, a_skew, b_skew)
        total += trunc_beta_logpdf(item.gamma_pos, a_skew, b_skew)
        if estimate_c:
            total += beta_logpdf(item.c, *config.beta_guess)
        if not math.isfinite(total):
            return -math.inf
    return total


# --- prior log-density building blocks (shared with the sampler) ---


def norm_logpdf(x, mu: float, sigma: float):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    out = -0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI
    return float(out) if np.ndim(x) == 0 else out


def truncnorm_pos_logpdf(x: float, mu: float, sigma: float) -> float:
    """Log density of N(mu, sigma^2) truncated to (0, inf)."""
    if not x > 0:
        return -math.inf
    return norm_logpdf(x, mu, sigma) - math.log(ndtr(mu / sigma))


def beta_logpdf(x: float, a: float, b: float) -> float:
    if not 0.0 < x < 1.0:
        return -math.inf
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - betaln(a, b)


def trunc_beta_logpdf(x: float, a: float, b: float, upper: float = GAMMA_MAX) -> float:
    """Log density of Beta(a, b) truncated to (0, upper).

    Normalised by the regularised incomplete beta function at ``upper``,
    so the density is proper and usable in Metropolis-Hastings ratios.
    """
    if not 0.0 < x < upper:
        return -math.inf
    return beta_logpdf(x, a, b) - math.log(betainc(a, b, upper))


def dirichlet_logpdf(w, alpha) -> float:
    w = np.asarray(w, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
        return -math.inf
    lognorm = float(np.sum(gammaln(alpha)) - gammaln(alpha.sum()))
    return float(np.sum((alpha - 1.0) * np.log(w))) - lognorm
