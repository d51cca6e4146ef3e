"""Posterior summaries, symmetry classification and chain diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampler import DrawStore
from .synth import Scenario

__all__ = [
    "ItemSummary",
    "FitSummary",
    "RecoveryReport",
    "ChainDiagnostics",
    "summarize_items",
    "summarize",
    "recovery_report",
    "recovery_report_with_theta",
    "diagnostics",
    "ess",
    "split_rhat",
]

CLASS_LABELS = ("symmetric", "negative", "positive")

# reading aids for the skewness estimate: |gamma| below 0.4 is an
# insignificant level of asymmetry, above 0.9 a clearly significant one
INSIGNIFICANT_GAMMA = 0.4
CLEAR_GAMMA = 0.9


@dataclass(frozen=True)
class ItemSummary:
    """Posterior summary of one item.

    ``z_probs`` are the posterior means of the one-hot symmetry
    indicator; ``classification`` is their argmax (ties broken toward
    the earlier component) and ``gamma_est`` the posterior mean of the
    skewness over exactly the draws sitting in the modal component,
    which is 0 by construction when the modal component is symmetric.
    """

    item_id: str
    post_mean_a: float
    post_mean_b: float
    post_mean_c: float
    z_probs: tuple[float, float, float]
    classification: str
    gamma_est: float
    ci_a: tuple[float, float]
    ci_b: tuple[float, float]
    ci_c: tuple[float, float]
    ci_gamma: tuple[float, float]
    asymmetry_level: str
    level: float


@dataclass(frozen=True)
class FitSummary:
    """Item summaries plus pooled ability estimates."""

    items: list[ItemSummary]
    theta_mean: np.ndarray
    theta_sd: np.ndarray
    n_draws: int
    n_chains: int
    level: float


@dataclass(frozen=True)
class RecoveryReport:
    """True-versus-estimated comparison against a known scenario."""

    pairs: dict[str, np.ndarray]        # name -> (2, n) array of (true, estimate)
    rmse: dict[str, float]
    correlation: dict[str, float]
    confusion: np.ndarray               # (3, 3) true status x classified status


@dataclass(frozen=True)
class ChainDiagnostics:
    ess: dict[str, float]
    rhat: dict[str, float]
    constant: list[str]
    acceptance: dict[str, float]


def _as_stores(stores) -> list[DrawStore]:
    if isinstance(stores, DrawStore):
        return [stores]
    out = list(stores)
    if not out:
        raise ValueError("empty draw store collection")
    return out


def _pool(stores: Sequence[DrawStore], name: str) -> np.ndarray:
    return np.concatenate([getattr(s, name) for s in stores], axis=0)


def _quantile_ci(x: np.ndarray, level: float) -> tuple[float, float]:
    lo = (1.0 - level) / 2.0
    return (float(np.quantile(x, lo)), float(np.quantile(x, 1.0 - lo)))


def _asymmetry_level(gamma_est: float) -> str:
    if abs(gamma_est) < INSIGNIFICANT_GAMMA:
        return "insignificant"
    if abs(gamma_est) > CLEAR_GAMMA:
        return "clear-significant"
    return "moderate"


def summarize_items(stores, level: float = 0.95, item_ids: Sequence[str] | None = None) -> list[ItemSummary]:
    """Per-item posterior summaries pooled across chains.

    Requires at least one chain with at least two stored draws.
    """
    stores = _as_stores(stores)
    if not 0.0 < level < 1.0:
        raise ValueError("interval level must lie in (0, 1)")
    a = _pool(stores, "a")
    if a.shape[0] < 2:
        raise ValueError("need at least two stored draws to summarise")
    b = _pool(stores, "b")
    c = _pool(stores, "c")
    gn = _pool(stores, "gamma_neg")
    gp = _pool(stores, "gamma_pos")
    z = _pool(stores, "z")
    nitems = a.shape[1]
    if item_ids is None:
        item_ids = [f"item{k + 1}" for k in range(nitems)]
    elif len(item_ids) != nitems:
        raise ValueError(f"{len(item_ids)} ids for {nitems} items")

    out = []
    for i in range(nitems):
        z_probs = tuple(float(np.mean(z[:, i] == k)) for k in range(3))
        modal = int(np.argmax(z_probs))
        if modal == 0:
            gamma_est = 0.0
            ci_gamma = (0.0, 0.0)
        else:
            comp = gn[:, i] if modal == 1 else gp[:, i]
            cond = comp[z[:, i] == modal]
            gamma_est = float(cond.mean())
            ci_gamma = _quantile_ci(cond, level)
        out.append(
            ItemSummary(
                item_id=str(item_ids[i]),
                post_mean_a=float(a[:, i].mean()),
                post_mean_b=float(b[:, i].mean()),
                post_mean_c=float(c[:, i].mean()),
                z_probs=z_probs,
                classification=CLASS_LABELS[modal],
                gamma_est=gamma_est,
                ci_a=_quantile_ci(a[:, i], level),
                ci_b=_quantile_ci(b[:, i], level),
                ci_c=_quantile_ci(c[:, i], level),
                ci_gamma=ci_gamma,
                asymmetry_level=_asymmetry_level(gamma_est),
                level=level,
            )
        )
    return out


def summarize(stores, level: float = 0.95, item_ids: Sequence[str] | None = None) -> FitSummary:
    """Item summaries plus pooled posterior means and sds of the abilities."""
    stores = _as_stores(stores)
    items = summarize_items(stores, level=level, item_ids=item_ids)
    theta = _pool(stores, "theta")
    return FitSummary(
        items=items,
        theta_mean=theta.mean(axis=0),
        theta_sd=theta.std(axis=0, ddof=1),
        n_draws=theta.shape[0],
        n_chains=len(stores),
        level=level,
    )


def _true_status(gamma: np.ndarray) -> np.ndarray:
    return np.where(gamma == 0.0, 0, np.where(gamma < 0.0, 1, 2))


def _corr(x: np.ndarray, y: np.ndarray) -> float:
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return 1.0 if np.array_equal(x, y) else math.nan
    return float(np.corrcoef(x, y)[0, 1])


def recovery_report(summary: FitSummary, truth: Scenario) -> RecoveryReport:
    """Score a fit against the generating scenario.

    Emits (true, estimate) pairs, RMSE and Pearson correlation for a, b
    and theta, plus the 3x3 confusion matrix of symmetry classification
    against the true status (thresholded at gamma = 0).
    """
    if len(summary.items) != truth.n_items:
        raise ValueError(f"{len(summary.items)} item summaries for {truth.n_items} true items")
    if summary.theta_mean.shape[0] != truth.n_subjects:
        raise ValueError(
            f"{summary.theta_mean.shape[0]} ability estimates for {truth.n_subjects} subjects"
        )
    est_a = np.array([it.post_mean_a for it in summary.items])
    est_b = np.array([it.post_mean_b for it in summary.items])
    pairs = {
        "a": np.vstack([truth.true_a, est_a]),
        "b": np.vstack([truth.true_b, est_b]),
    }
    rmse = {k: float(np.sqrt(np.mean((v[0] - v[1]) ** 2))) for k, v in pairs.items()}
    correlation = {k: _corr(v[0], v[1]) for k, v in pairs.items()}

    confusion = np.zeros((3, 3), dtype=np.int64)
    classified = np.array([CLASS_LABELS.index(it.classification) for it in summary.items])
    for t, e in zip(_true_status(truth.true_gamma), classified):
        confusion[t, e] += 1
    return RecoveryReport(pairs=pairs, rmse=rmse, correlation=correlation, confusion=confusion)


def recovery_report_with_theta(
    summary: FitSummary, truth: Scenario, true_theta: np.ndarray
) -> RecoveryReport:
    """recovery_report extended with the ability pairs when truth is known."""
    rep = recovery_report(summary, truth)
    true_theta = np.asarray(true_theta, dtype=float)
    if true_theta.shape != summary.theta_mean.shape:
        raise ValueError("true theta dimensions do not match the summary")
    pairs = dict(rep.pairs)
    pairs["theta"] = np.vstack([true_theta, summary.theta_mean])
    rmse = dict(rep.rmse)
    rmse["theta"] = float(np.sqrt(np.mean((true_theta - summary.theta_mean) ** 2)))
    correlation = dict(rep.correlation)
    correlation["theta"] = _corr(true_theta, summary.theta_mean)
    return RecoveryReport(pairs=pairs, rmse=rmse, correlation=correlation, confusion=rep.confusion)


# --- MCMC diagnostics --------------------------------------------------------


def ess(x: np.ndarray) -> float:
    """Autocorrelation-based effective sample size of one chain.

    Uses FFT autocovariances with the initial-monotone-positive-sequence
    truncation, so white noise comes out close to the raw draw count.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 4:
        raise ValueError("need at least 4 draws for an ESS estimate")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return math.nan
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:n].real / n
    rho = acov / acov[0]
    # Geyer pair sums: keep while positive, enforce monotone decrease
    npairs = n // 2
    pair = rho[0 : 2 * npairs : 2] + rho[1 : 2 * npairs : 2]
    tau = 0.0
    prev = math.inf
    for g in pair:
        if g <= 0.0:
            break
        g = min(g, prev)
        tau += g
        prev = g
    tau = 2.0 * tau - 1.0
    tau = max(tau, 1.0 / n)
    return n / tau


def split_rhat(chains: Sequence[np.ndarray]) -> float:
    """Split-half potential scale reduction across chains.

    Each chain is split in two; near-zero pooled variance (a constant
    parameter) returns exactly 1.
    """
    halves = []
    for ch in chains:
        ch = np.asarray(ch, dtype=float)
        half = ch.shape[0] // 2
        if half < 2:
            raise ValueError("need at least 4 draws per chain for split R-hat")
        halves.append(ch[:half])
        halves.append(ch[half : 2 * half])
    n = min(h.shape[0] for h in halves)
    arr = np.stack([h[:n] for h in halves])
    within = arr.var(axis=1, ddof=1).mean()
    between = n * arr.mean(axis=1).var(ddof=1)
    if within < 1e-300:
        return 1.0
    var_plus = (n - 1) / n * within + between / n
    return float(np.sqrt(var_plus / within))


def _parameter_draws(stores: Sequence[DrawStore], include_theta: bool) -> dict[str, list[np.ndarray]]:
    params: dict[str, list[np.ndarray]] = {}
    nitems = stores[0].n_items
    for i in range(nitems):
        params[f"a[{i + 1}]"] = [s.a[:, i] for s in stores]
        params[f"b[{i + 1}]"] = [s.b[:, i] for s in stores]
        params[f"c[{i + 1}]"] = [s.c[:, i] for s in stores]
        params[f"gamma_neg[{i + 1}]"] = [s.gamma_neg[:, i] for s in stores]
        params[f"gamma_pos[{i + 1}]"] = [s.gamma_pos[:, i] for s in stores]
    if include_theta:
        nsub = stores[0].theta.shape[1]
        for j in range(nsub):
            params[f"theta[{j + 1}]"] = [s.theta[:, j] for s in stores]
    return params


def diagnostics(stores, include_theta: bool = True) -> ChainDiagnostics:
    """ESS, split R-hat and acceptance rates per scalar parameter.

    R-hat needs at least two chains and is omitted otherwise; parameters
    that never move are flagged as constant and excluded from both
    statistics.
    """
    stores = _as_stores(stores)
    if stores[0].n_draws < 4:
        raise ValueError("need at least 4 stored draws for diagnostics")
    params = _parameter_draws(stores, include_theta)
    ess_out: dict[str, float] = {}
    rhat_out: dict[str, float] = {}
    constant: list[str] = []
    for name, chains in params.items():
        pooled = np.concatenate(chains)
        if pooled.std() == 0.0:
            constant.append(name)
            continue
        ess_out[name] = float(sum(ess(ch) for ch in chains))
        if len(stores) >= 2:
            rhat_out[name] = split_rhat(chains)

    acc: dict[str, list[int]] = {}
    for s in stores:
        for k, (na, natt) in s.acceptance.items():
            acc.setdefault(k, [0, 0])
            acc[k][0] += na
            acc[k][1] += natt
    acceptance = {k: (v[0] / v[1] if v[1] else math.nan) for k, v in acc.items()}
    return ChainDiagnostics(ess=ess_out, rhat=rhat_out, constant=constant, acceptance=acceptance)
