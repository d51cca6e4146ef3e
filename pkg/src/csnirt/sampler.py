"""Metropolis-within-Gibbs sampler for the finite-mixture skew-probit models.

One iteration sweeps six blocks in the order

    (theta)  (a, b)  (w, Z)  (gamma_neg, gamma_pos)  (D)  (c)

where theta, (a, b) and the two skewness components use random-walk
Metropolis moves, (w, Z) uses a joint independence proposal from the
prior (so only the likelihood ratio enters the acceptance probability),
and D and c are exact Gibbs draws.  All likelihood terms are restricted
to response pairs with D_ij = 0; a pair flagged as guessed contributes
nothing.

Proposal scales are adapted toward standard target acceptance rates
(0.44 for scalar moves, 0.234 for the bivariate (a, b) move) during
burn-in only; the post-burn-in kernel is fixed.

Items are conditionally independent given (theta, D) and subjects given
the items, so every block updates all of its coordinates in one
vectorised pass.  The current response-probability matrix is cached and
patched after each acceptance instead of being recomputed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.special import owens_t as _owens_t

from . import csn
from .model import PriorConfig, ResponseMatrix, trunc_beta_logpdf

__all__ = [
    "TuningConfig",
    "ChainState",
    "DrawStore",
    "NumericalError",
    "ALL_BLOCKS",
    "default_blocks",
    "initial_state",
    "step_zw",
    "step_gamma",
    "step_ab",
    "step_theta",
    "step_d",
    "step_c",
    "run_chain",
    "run_chains",
]

ALL_BLOCKS = ("theta", "ab", "zw", "gamma", "d", "c")

# clamps applied inside logs only; extreme proposals can push the linear
# predictor past +-40 where the cdf saturates
_P_FLOOR = 1e-300
_Q_FLOOR = 1e-16


class NumericalError(RuntimeError):
    """Raised when the sampler cannot reach a finite starting likelihood."""


@dataclass
class TuningConfig:
    """Proposal scales and adaptation settings.

    sigma_ab is the base 2x2 proposal covariance of the joint (a, b)
    move, shared across items; per-item scalar multipliers are adapted
    on top of it.  Adaptation nudges log-scales toward adapt_target
    (scalar blocks) and adapt_target_ab (the bivariate block) every
    adapt_window iterations, during burn-in only.
    """

    tau_gamma_neg: float = 0.15
    tau_gamma_pos: float = 0.15
    sigma_ab: np.ndarray = field(
        default_factory=lambda: np.diag([0.05**2, 0.05**2])
    )
    sigma_theta: float = 0.5
    adapt_target: float = 0.44
    adapt_target_ab: float = 0.234
    adapt_window: int = 50

    def __post_init__(self) -> None:
        self.sigma_ab = np.asarray(self.sigma_ab, dtype=float)
        if self.tau_gamma_neg <= 0 or self.tau_gamma_pos <= 0 or self.sigma_theta <= 0:
            raise ValueError("proposal scales must be positive")
        if self.sigma_ab.shape != (2, 2):
            raise ValueError("sigma_ab must be a 2x2 covariance matrix")
        if not np.allclose(self.sigma_ab, self.sigma_ab.T):
            raise ValueError("sigma_ab must be symmetric")
        if np.any(np.linalg.eigvalsh(self.sigma_ab) <= 0):
            raise ValueError("sigma_ab must be positive definite")
        if not 0.0 < self.adapt_target < 1.0 or not 0.0 < self.adapt_target_ab < 1.0:
            raise ValueError("acceptance targets must lie in (0, 1)")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be a positive iteration count")


@dataclass
class ChainState:
    """Complete parameter vector at one iteration, including latents."""

    a: np.ndarray          # (I,)  discrimination
    b: np.ndarray          # (I,)  difficulty
    c: np.ndarray          # (I,)  guessing
    gamma_neg: np.ndarray  # (I,)  negative skewness component
    gamma_pos: np.ndarray  # (I,)  positive skewness component
    z: np.ndarray          # (I,)  mixture component index in {0, 1, 2}
    w: np.ndarray          # (I,3) mixture weights
    theta: np.ndarray      # (J,)  abilities
    d: np.ndarray          # (I,J) guessing indicators
    iteration: int = 0

    @property
    def gamma(self) -> np.ndarray:
        """Effective per-item skewness selected by z."""
        return np.where(self.z == 0, 0.0, np.where(self.z == 1, self.gamma_neg, self.gamma_pos))

    def copy(self) -> "ChainState":
        return ChainState(
            a=self.a.copy(), b=self.b.copy(), c=self.c.copy(),
            gamma_neg=self.gamma_neg.copy(), gamma_pos=self.gamma_pos.copy(),
            z=self.z.copy(), w=self.w.copy(), theta=self.theta.copy(),
            d=self.d.copy(), iteration=self.iteration,
        )


@dataclass
class DrawStore:
    """Thinned post-burn-in draws of one chain plus acceptance counters.

    Draw arrays have the stored draw as the leading axis.  The full D
    matrix is not snapshotted (it is an exactly resampled augmentation
    variable); its per-item counts d_count are kept instead.
    """

    a: np.ndarray          # (n, I)
    b: np.ndarray
    c: np.ndarray
    gamma_neg: np.ndarray
    gamma_pos: np.ndarray
    z: np.ndarray          # (n, I) int
    w: np.ndarray          # (n, I, 3)
    theta: np.ndarray      # (n, J)
    d_count: np.ndarray    # (n, I) int
    iteration: np.ndarray  # (n,) iteration index of each stored draw
    acceptance: dict[str, tuple[int, int]]  # block -> (accepts, attempts)
    seed: int
    chain_id: int
    iterations: int
    burnin: int
    thin: int
    model: str
    config: dict[str, str] = field(default_factory=dict)
    final_scales: dict[str, np.ndarray | float] = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.a.shape[0]

    @property
    def n_items(self) -> int:
        return self.a.shape[1]

    @property
    def gamma(self) -> np.ndarray:
        """Effective skewness per stored draw and item."""
        return np.where(self.z == 0, 0.0, np.where(self.z == 1, self.gamma_neg, self.gamma_pos))

    def acceptance_rates(self) -> dict[str, float]:
        return {
            k: (acc / att if att else math.nan)
            for k, (acc, att) in self.acceptance.items()
        }


def default_blocks(model: str) -> tuple[str, ...]:
    """Blocks swept for each model mode.

    The two-parameter model fixes D = 0 and c = 0; the fixed-c mode
    keeps the D draw (the augmentation is still needed) but skips the
    conjugate c draw.
    """
    if model == "2pcsp":
        return ("theta", "ab", "zw", "gamma")
    if model == "3pcsp":
        return ALL_BLOCKS
    if model == "3pcsp-fixed-c":
        return ("theta", "ab", "zw", "gamma", "d")
    raise ValueError(f"unknown model {model!r}")


# --- cdf plumbing -----------------------------------------------------------


def _cdf_vector(m: np.ndarray, gamma: float) -> np.ndarray:
    """Phi_CSN(m, gamma) over a vector; fast path for the symmetric case."""
    if gamma == 0.0:
        return ndtr(m)
    p = csn.to_direct(gamma)
    zz = (m - p.xi) / p.omega
    out = ndtr(zz) - 2.0 * _owens_t(zz, p.alpha)
    return np.clip(out, 0.0, 1.0, out=out)


def _cdf_rows(m: np.ndarray, gammas: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Row-wise Phi_CSN for a matrix whose skewness varies by row."""
    if out is None:
        out = np.empty_like(m)
    for i in range(m.shape[0]):
        out[i] = _cdf_vector(m[i], gammas[i])
    return out


def _bernoulli_terms(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-pair log-likelihood terms with clamped logs."""
    lp = np.log(np.maximum(p, _P_FLOOR))
    lq = np.log1p(-np.minimum(p, 1.0 - _Q_FLOOR))
    return np.where(y == 1, lp, lq)


def _row_loglik(p: np.ndarray, y: np.ndarray, active: np.ndarray | None) -> np.ndarray:
    """Per-item log-likelihood over pairs with D_ij = 0; shape (I,)."""
    terms = _bernoulli_terms(p, y)
    if active is not None:
        terms = np.where(active, terms, 0.0)
    return terms.sum(axis=1)


def _col_loglik(p: np.ndarray, y: np.ndarray, active: np.ndarray | None) -> np.ndarray:
    """Per-subject log-likelihood over pairs with D_ij = 0; shape (J,)."""
    terms = _bernoulli_terms(p, y)
    if active is not None:
        terms = np.where(active, terms, 0.0)
    return terms.sum(axis=0)


def _predictor_matrix(a: np.ndarray, b: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return a[:, None] * (theta[None, :] - b[:, None])


def _current_p(state: ChainState) -> np.ndarray:
    return _cdf_rows(_predictor_matrix(state.a, state.b, state.theta), state.gamma)


def _active_mask(state: ChainState, has_guessing: bool) -> np.ndarray | None:
    return (state.d == 0) if has_guessing else None


def _dirichlet_rows(rng: np.random.Generator, alpha: np.ndarray, size: int) -> np.ndarray:
    """Dirichlet draws that stay finite for very small concentration values.

    Uses log-Gamma variates via the Gamma(alpha + 1) * U^(1/alpha) boost
    and normalises with a log-sum-exp, so components underflow to tiny
    positives instead of the 0/0 a direct Gamma draw can produce when
    alpha is far below 1.
    """
    g = rng.gamma(alpha + 1.0, size=(size, alpha.shape[0]))
    u = rng.random((size, alpha.shape[0]))
    with np.errstate(divide="ignore"):
        logx = np.log(g) + np.log(u) / alpha
    logx -= logx.max(axis=1, keepdims=True)
    x = np.exp(logx)
    return x / x.sum(axis=1, keepdims=True)


# --- block updates ----------------------------------------------------------
#
# Each _update_* mutates the state in place, patches the cached
# probability matrix p for accepted moves and returns (accepts, attempts).


def _update_theta(
    state: ChainState,
    y: np.ndarray,
    p: np.ndarray,
    active: np.ndarray | None,
    scale: float,
    rng: np.random.Generator,
) -> tuple[int, int]:
    nsub = state.theta.shape[0]
    theta_star = state.theta + scale * rng.standard_normal(nsub)
    m_star = _predictor_matrix(state.a, state.b, theta_star)
    p_star = _cdf_rows(m_star, state.gamma)
    logr = _col_loglik(p_star, y, active) - _col_loglik(p, y, active)
    logr += 0.5 * (state.theta**2 - theta_star**2)  # N(0,1) prior ratio
    accept = np.log(rng.random(nsub)) < logr
    state.theta[accept] = theta_star[accept]
    p[:, accept] = p_star[:, accept]
    return int(accept.sum()), nsub


def _update_ab(
    state: ChainState,
    y: np.ndarray,
    p: np.ndarray,
    active: np.ndarray | None,
    chol: np.ndarray,
    log_scale: np.ndarray,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> tuple[int, int, np.ndarray]:
    nitems = state.a.shape[0]
    eps = rng.standard_normal((nitems, 2)) @ chol.T
    eps *= np.exp(log_scale)[:, None]
    a_star = state.a + eps[:, 0]
    b_star = state.b + eps[:, 1]
    m_star = _predictor_matrix(a_star, b_star, state.theta)
    p_star = _cdf_rows(m_star, state.gamma)
    logr = _row_loglik(p_star, y, active) - _row_loglik(p, y, active)
    # truncated-normal prior on a and normal prior on b; the truncation
    # constant and the symmetric proposal cancel
    sa2, sb2 = priors.sigma_a**2, priors.sigma_b**2
    logr += ((state.a - priors.mu_a) ** 2 - (a_star - priors.mu_a) ** 2) / (2.0 * sa2)
    logr += ((state.b - priors.mu_b) ** 2 - (b_star - priors.mu_b) ** 2) / (2.0 * sb2)
    logr = np.where(a_star > 0.0, logr, -np.inf)
    accept = np.log(rng.random(nitems)) < logr
    state.a[accept] = a_star[accept]
    state.b[accept] = b_star[accept]
    p[accept] = p_star[accept]
    return int(accept.sum()), nitems, accept


def _update_zw(
    state: ChainState,
    y: np.ndarray,
    p: np.ndarray,
    active: np.ndarray | None,
    priors: PriorConfig,
    rng: np.random.Generator,
) -> tuple[int, int]:
    nitems = state.a.shape[0]
    alpha = np.asarray(priors.dirichlet, dtype=float)
    w_star = _dirichlet_rows(rng, alpha, nitems)
    u_comp = rng.random(nitems)
    z_star = (u_comp[:, None] >= np.cumsum(w_star, axis=1)).sum(axis=1)
    u_acc = rng.random(nitems)

    gamma_cur = state.gamma
    gamma_star = np.where(
        z_star == 0, 0.0, np.where(z_star == 1, state.gamma_neg, state.gamma_pos)
    )
    logr = np.zeros(nitems)
    m = _predictor_matrix(state.a, state.b, state.theta)
    for i in np.nonzero(gamma_star != gamma_cur)[0]:
        p_star_row = _cdf_vector(m[i], gamma_star[i])
        terms_cur = _bernoulli_terms(p[i], y[i])
        terms_new = _bernoulli_terms(p_star_row, y[i])
        if active is not None:
            terms_cur = np.where(active[i], terms_cur, 0.0)
            terms_new = np.where(active[i], terms_new, 0.0)
        logr[i] = terms_new.sum() - terms_cur.sum()
    accept = np.log(u_acc) < logr
    changed = accept & (gamma_star != gamma_cur)
    state.z[accept] = z_star[accept]
    state.w[accept] = w_star[accept]
    for i in np.nonzero(changed)[0]:
        p[i] = _cdf_vector(m[i], gamma_star[i])
    return int(accept.sum()), nitems


def _update_gamma(
    state: ChainState,
    y: np.ndarray,
    p: np.ndarray,
    active: np.ndarray | None,
    scales_neg: np.ndarray,
    scales_pos: np.ndarray,
    priors: PriorConfig,
    rng: np.random.Generator,
    window: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[tuple[int, int], tuple[int, int]]:
    """Random-walk update of the component indicated by z; the other
    component (and both, for symmetric items) carries over unchanged.

    ``window``, when given, is (acc_neg, att_neg, acc_pos, att_pos)
    per-item counters that accumulate adaptation statistics.
    """
    a_skew, b_skew = priors.beta_skew
    m = None
    counts = []
    for comp, scales, values, sign, wslot in (
        (1, scales_neg, state.gamma_neg, -1.0, 0),
        (2, scales_pos, state.gamma_pos, +1.0, 2),
    ):
        idx = np.nonzero(state.z == comp)[0]
        acc_n = 0
        eps = rng.standard_normal(state.a.shape[0]) * scales
        u = rng.random(state.a.shape[0])
        for i in idx:
            cur = values[i]
            star = cur + eps[i]
            accepted = False
            # proposals outside the open support are rejected outright
            if 0.0 < sign * star < csn.GAMMA_MAX:
                if m is None:
                    m = _predictor_matrix(state.a, state.b, state.theta)
                p_star_row = _cdf_vector(m[i], star)
                row_active = active[i] if active is not None else None
                terms_cur = _bernoulli_terms(p[i], y[i])
                terms_new = _bernoulli_terms(p_star_row, y[i])
                if row_active is not None:
                    terms_cur = np.where(row_active, terms_cur, 0.0)
                    terms_new = np.where(row_active, terms_new, 0.0)
                logr = terms_new.sum() - terms_cur.sum()
                logr += trunc_beta_logpdf(sign * star, a_skew, b_skew) - trunc_beta_logpdf(
                    sign * cur, a_skew, b_skew
                )
                if math.log(u[i]) < logr:
                    values[i] = star
                    p[i] = p_star_row
                    acc_n += 1
                    accepted = True
            if window is not None:
                window[wslot + 1][i] += 1
                if accepted:
                    window[wslot][i] += 1
        counts.append((acc_n, len(idx)))
    return counts[0], counts[1]


def _update_d(
    state: ChainState,
    y: np.ndarray,
    p: np.ndarray,
    rng: np.random.Generator,
) -> None:
    """Exact Gibbs draw of the guessing indicators.

    D_ij = 0 surely when Y_ij = 0; otherwise D_ij ~ Bernoulli(r_ij) with
    r_ij = c_i / (c_i + (1 - c_i) * Phi_CSN(m_ij, gamma_i)).
    """
    cc = state.c[:, None]
    denom = cc + (1.0 - cc) * p
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0.0, cc / denom, 0.0)
    u = rng.random(y.shape)
    state.d = ((y == 1) & (u < r)).astype(np.int8)


def _update_c(state: ChainState, priors: PriorConfig, rng: np.random.Generator) -> None:
    """Conjugate Beta draw given the per-item guess counts."""
    nsub = state.theta.shape[0]
    alpha_c, beta_c = priors.beta_guess
    sums = state.d.sum(axis=1)
    state.c = rng.beta(sums + alpha_c, nsub - sums + beta_c)


# --- public single-block operations ----------------------------------------
#
# These wrap the vectorised updates so one block can be exercised in
# isolation; they compute the probability matrix fresh on every call.
# run_chain uses the cached-matrix path directly.


def _coerce_y(y) -> np.ndarray:
    return y.y if isinstance(y, ResponseMatrix) else np.asarray(y)


def step_theta(state: ChainState, y, tuning: TuningConfig, rng: np.random.Generator) -> int:
    """One Metropolis sweep over all abilities; returns accepted count."""
    ymat = _coerce_y(y)
    p = _current_p(state)
    acc, _ = _update_theta(
        state, ymat, p, _active_mask(state, bool(state.d.any())), tuning.sigma_theta, rng
    )
    return acc


def step_ab(state: ChainState, y, priors: PriorConfig, tuning: TuningConfig, rng: np.random.Generator) -> int:
    """One joint (a, b) Metropolis sweep over all items."""
    ymat = _coerce_y(y)
    p = _current_p(state)
    chol = np.linalg.cholesky(tuning.sigma_ab)
    acc, _, _ = _update_ab(
        state, ymat, p, _active_mask(state, bool(state.d.any())),
        chol, np.zeros(state.a.shape[0]), priors, rng,
    )
    return acc


def step_zw(state: ChainState, y, priors: PriorConfig, rng: np.random.Generator) -> int:
    """One joint (w, Z) update per item from the prior proposal."""
    ymat = _coerce_y(y)
    p = _current_p(state)
    acc, _ = _update_zw(state, ymat, p, _active_mask(state, bool(state.d.any())), priors, rng)
    return acc


def step_gamma(state: ChainState, y, priors: PriorConfig, tuning: TuningConfig, rng: np.random.Generator) -> tuple[int, int]:
    """One random-walk sweep over the active skewness components."""
    ymat = _coerce_y(y)
    p = _current_p(state)
    nitems = state.a.shape[0]
    (acc_n, _), (acc_p, _) = _update_gamma(
        state, ymat, p, _active_mask(state, bool(state.d.any())),
        np.full(nitems, tuning.tau_gamma_neg), np.full(nitems, tuning.tau_gamma_pos),
        priors, rng,
    )
    return acc_n, acc_p


def step_d(state: ChainState, y, rng: np.random.Generator) -> None:
    """Exact Gibbs draw of the guessing indicators."""
    ymat = _coerce_y(y)
    _update_d(state, ymat, _current_p(state), rng)


def step_c(state: ChainState, priors: PriorConfig, rng: np.random.Generator) -> None:
    """Exact conjugate Gibbs draw of the guessing parameters."""
    _update_c(state, priors, rng)


# --- initialisation and the main loop ---------------------------------------


def initial_state(
    y: np.ndarray,
    priors: PriorConfig,
    model: str = "2pcsp",
    fixed_c: np.ndarray | None = None,
) -> ChainState:
    """Cheap data-driven starting point inside all supports.

    theta starts at the standardised subject score, b at the probit of
    one minus the item facility (clamped to [-4, 4]), a at 1, c at its
    prior mean (or the supplied constants), the skewness components at
    -0.5 / +0.5 with every item symmetric and w at the prior mean.
    """
    nitems, nsub = y.shape
    score = y.sum(axis=0).astype(float)
    sd = score.std()
    theta = (score - score.mean()) / sd if sd > 1e-12 else np.zeros(nsub)
    facility = y.mean(axis=1)
    with np.errstate(divide="ignore"):
        b = np.clip(ndtri(1.0 - facility), -4.0, 4.0)
    if model == "2pcsp":
        c = np.zeros(nitems)
    elif fixed_c is not None:
        c = np.asarray(fixed_c, dtype=float).copy()
        if c.shape != (nitems,):
            raise ValueError(f"fixed_c has shape {c.shape}, expected ({nitems},)")
        if np.any(c < 0.0) or np.any(c >= 1.0):
            raise ValueError("fixed guessing values must lie in [0, 1)")
    else:
        alpha_c, beta_c = priors.beta_guess
        c = np.full(nitems, alpha_c / (alpha_c + beta_c))
    alpha = np.asarray(priors.dirichlet, dtype=float)
    return ChainState(
        a=np.ones(nitems),
        b=b,
        c=c,
        gamma_neg=np.full(nitems, -0.5),
        gamma_pos=np.full(nitems, 0.5),
        z=np.zeros(nitems, dtype=np.int8),
        w=np.tile(alpha / alpha.sum(), (nitems, 1)),
        theta=theta,
        d=np.zeros((nitems, nsub), dtype=np.int8),
        iteration=0,
    )


def run_chain(
    y,
    priors: PriorConfig | None = None,
    tuning: TuningConfig | None = None,
    iterations: int = 2000,
    burnin: int = 0,
    thin: int = 1,
    seed=0,
    *,
    model: str = "2pcsp",
    fixed_c: np.ndarray | None = None,
    blocks: Sequence[str] | None = None,
    init: ChainState | None = None,
    chain_id: int = 0,
    config_echo: dict[str, str] | None = None,
) -> DrawStore:
    """Run one chain and return its thinned post-burn-in draws.

    ``blocks`` restricts the sweep to a subset of the six blocks (the
    remaining parameters stay fixed), which is how the fixed-c mode and
    the validation runs freeze parts of the state.  ``init`` overrides
    the data-driven starting point.  The run is deterministic given
    ``seed``.
    """
    priors = priors if priors is not None else PriorConfig()
    tuning = tuning if tuning is not None else TuningConfig()
    ymat = _coerce_y(y)
    if iterations <= burnin or burnin < 0:
        raise ValueError(f"need iterations > burnin >= 0, got {iterations}, {burnin}")
    if thin < 1:
        raise ValueError(f"thin must be >= 1, got {thin}")
    if blocks is None:
        blocks = default_blocks(model)
    else:
        blocks = tuple(blocks)
        unknown = set(blocks) - set(ALL_BLOCKS)
        if unknown:
            raise ValueError(f"unknown blocks {sorted(unknown)}")
    has_guessing = model in ("3pcsp", "3pcsp-fixed-c")

    rng = np.random.default_rng(seed)
    state = init.copy() if init is not None else initial_state(ymat, priors, model, fixed_c)
    if state.d.shape != ymat.shape:
        raise ValueError(f"state dimensions {state.d.shape} do not match responses {ymat.shape}")

    p = _current_p(state)
    for attempt in range(5):
        active = _active_mask(state, has_guessing)
        terms = _bernoulli_terms(p, ymat)
        ll0 = float(np.where(active, terms, 0.0).sum() if active is not None else terms.sum())
        if math.isfinite(ll0):
            break
        # shrink the starting point toward the prior centre and retry
        state.theta *= 0.5
        state.b *= 0.5
        p = _current_p(state)
    else:
        raise NumericalError("non-finite likelihood at initialisation after 5 retries")

    nitems, nsub = ymat.shape
    chol_ab = np.linalg.cholesky(tuning.sigma_ab)
    log_scale_ab = np.zeros(nitems)
    scale_theta = tuning.sigma_theta
    scales_gn = np.full(nitems, tuning.tau_gamma_neg)
    scales_gp = np.full(nitems, tuning.tau_gamma_pos)

    n_draws = (iterations - burnin) // thin
    store = DrawStore(
        a=np.empty((n_draws, nitems)),
        b=np.empty((n_draws, nitems)),
        c=np.empty((n_draws, nitems)),
        gamma_neg=np.empty((n_draws, nitems)),
        gamma_pos=np.empty((n_draws, nitems)),
        z=np.empty((n_draws, nitems), dtype=np.int8),
        w=np.empty((n_draws, nitems, 3)),
        theta=np.empty((n_draws, nsub)),
        d_count=np.empty((n_draws, nitems), dtype=np.int64),
        iteration=np.empty(n_draws, dtype=np.int64),
        acceptance={k: (0, 0) for k in ("theta", "ab", "zw", "gamma_neg", "gamma_pos")},
        seed=seed if isinstance(seed, int) else -1,
        chain_id=chain_id,
        iterations=iterations,
        burnin=burnin,
        thin=thin,
        model=model,
        config=dict(config_echo) if config_echo else {},
    )

    totals = {k: [0, 0] for k in ("theta", "ab", "zw", "gamma_neg", "gamma_pos")}
    win_theta = [0, 0]
    win_ab = np.zeros(nitems)
    win_gamma = (np.zeros(nitems), np.zeros(nitems), np.zeros(nitems), np.zeros(nitems))
    batch = 0
    stored = 0

    for t in range(1, iterations + 1):
        active = _active_mask(state, has_guessing)
        if "theta" in blocks:
            acc, att = _update_theta(state, ymat, p, active, scale_theta, rng)
            totals["theta"][0] += acc
            totals["theta"][1] += att
            win_theta[0] += acc
            win_theta[1] += att
        if "ab" in blocks:
            acc, att, acc_mask = _update_ab(
                state, ymat, p, active, chol_ab, log_scale_ab, priors, rng
            )
            totals["ab"][0] += acc
            totals["ab"][1] += att
            win_ab += acc_mask
        if "zw" in blocks:
            acc, att = _update_zw(state, ymat, p, active, priors, rng)
            totals["zw"][0] += acc
            totals["zw"][1] += att
        if "gamma" in blocks:
            (an, tn), (ap, tp) = _update_gamma(
                state, ymat, p, active, scales_gn, scales_gp, priors, rng,
                window=win_gamma if t <= burnin else None,
            )
            totals["gamma_neg"][0] += an
            totals["gamma_neg"][1] += tn
            totals["gamma_pos"][0] += ap
            totals["gamma_pos"][1] += tp
        if "d" in blocks and has_guessing:
            _update_d(state, ymat, p, rng)
        if "c" in blocks and has_guessing:
            _update_c(state, priors, rng)
        state.iteration = t

        # Robbins-Monro adaptation of the proposal scales during burn-in
        # only (frozen afterwards, so the post-burn-in kernel is fixed);
        # items adapt individually because their conditional posteriors
        # have very different widths
        if t <= burnin and t % tuning.adapt_window == 0:
            batch += 1
            step = min(0.5, 2.0 / math.sqrt(batch))
            if win_theta[1]:
                rate = win_theta[0] / win_theta[1]
                scale_theta *= math.exp(step * (rate - tuning.adapt_target))
            win_theta = [0, 0]
            log_scale_ab += step * (win_ab / tuning.adapt_window - tuning.adapt_target_ab)
            win_ab[:] = 0.0
            for acc_arr, att_arr, scales in (
                (win_gamma[0], win_gamma[1], scales_gn),
                (win_gamma[2], win_gamma[3], scales_gp),
            ):
                # adapt an item once it has gathered enough attempts in
                # its component; others carry their counters forward
                ready = att_arr >= 20
                if np.any(ready):
                    rate = acc_arr[ready] / att_arr[ready]
                    scales[ready] *= np.exp(step * (rate - tuning.adapt_target))
                    acc_arr[ready] = 0.0
                    att_arr[ready] = 0.0

        if t > burnin and (t - burnin) % thin == 0:
            store.a[stored] = state.a
            store.b[stored] = state.b
            store.c[stored] = state.c
            store.gamma_neg[stored] = state.gamma_neg
            store.gamma_pos[stored] = state.gamma_pos
            store.z[stored] = state.z
            store.w[stored] = state.w
            store.theta[stored] = state.theta
            store.d_count[stored] = state.d.sum(axis=1)
            store.iteration[stored] = t
            stored += 1

    store.acceptance = {k: (v[0], v[1]) for k, v in totals.items()}
    store.final_scales = {
        "theta": scale_theta,
        "ab_log_scale": log_scale_ab.copy(),
        "gamma_neg": scales_gn.copy(),
        "gamma_pos": scales_gp.copy(),
    }
    return store


def _run_chain_task(args) -> DrawStore:
    (ymat, priors, tuning, iterations, burnin, thin, child_seed, model,
     fixed_c, blocks, chain_id, config_echo, root_seed) = args
    store = run_chain(
        ymat, priors, tuning, iterations, burnin, thin, child_seed,
        model=model, fixed_c=fixed_c, blocks=blocks, chain_id=chain_id,
        config_echo=config_echo,
    )
    store.seed = root_seed
    return store


def run_chains(
    y,
    priors: PriorConfig | None = None,
    tuning: TuningConfig | None = None,
    iterations: int = 2000,
    burnin: int = 0,
    thin: int = 1,
    seed: int = 0,
    chains: int = 1,
    *,
    model: str = "2pcsp",
    fixed_c: np.ndarray | None = None,
    blocks: Sequence[str] | None = None,
    config_echo: dict[str, str] | None = None,
    workers: int | None = None,
) -> list[DrawStore]:
    """Run independent chains with deterministically split random streams.

    Chains run in parallel processes when ``workers`` allows; results are
    identical either way because each chain's stream is spawned from the
    root seed.
    """
    if chains < 1:
        raise ValueError("need at least one chain")
    ymat = _coerce_y(y)
    children = np.random.SeedSequence(seed).spawn(chains)
    tasks = [
        (ymat, priors, tuning, iterations, burnin, thin, children[k], model,
         fixed_c, blocks, k, config_echo, seed)
        for k in range(chains)
    ]
    if workers is None:
        import os

        workers = min(chains, os.cpu_count() or 1)
    if workers <= 1 or chains == 1:
        return [_run_chain_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_chain_task, tasks))
