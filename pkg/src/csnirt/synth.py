"""Synthetic response-matrix generator with known ground truth.

The two presets mirror the simulation design used to validate the
sampler: 40 items answered by a configurable number of subjects, either
all symmetric (gamma = 0 everywhere) or all asymmetric with skewness
sweeping the admissible range from -0.99 to 0.99.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csn import GAMMA_MAX
from .model import Abilities, ResponseMatrix
from .sampler import _cdf_rows, _predictor_matrix

__all__ = ["Scenario", "preset", "generate", "ASYMMETRIC_PRESET_GAMMAS", "PRESET_NAMES"]

# Monotone 40-point skewness grid of the asymmetric preset.
ASYMMETRIC_PRESET_GAMMAS = (
    -0.99, -0.99, -0.95, -0.93, -0.91, -0.90, -0.87, -0.83, -0.79, -0.74,
    -0.69, -0.63, -0.52, -0.39, -0.30, -0.21, -0.15, -0.11, -0.06, -0.02,
    0.02, 0.04, 0.09, 0.14, 0.19, 0.24, 0.34, 0.44, 0.60, 0.65,
    0.71, 0.78, 0.81, 0.85, 0.88, 0.91, 0.92, 0.95, 0.98, 0.99,
)

PRESET_NAMES = ("all-symmetric-40", "all-asymmetric-40")

# distinct deterministic substreams for item-parameter and response draws
_ITEM_STREAM = 0
_RESPONSE_STREAM = 1


@dataclass(frozen=True)
class Scenario:
    """Ground-truth parameters of one synthetic test."""

    n_items: int
    n_subjects: int
    true_a: np.ndarray
    true_b: np.ndarray
    true_c: np.ndarray
    true_gamma: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        for name in ("true_a", "true_b", "true_c", "true_gamma"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.n_items,):
                raise ValueError(f"{name} must have length n_items={self.n_items}")
            object.__setattr__(self, name, arr)
        if self.n_items < 1 or self.n_subjects < 1:
            raise ValueError("need at least one item and one subject")
        if np.any(self.true_a <= 0):
            raise ValueError("true_a must be positive")
        if np.any((self.true_c < 0) | (self.true_c >= 1)):
            raise ValueError("true_c must lie in [0, 1)")
        if np.any(np.abs(self.true_gamma) >= GAMMA_MAX):
            raise ValueError(f"|true_gamma| must stay below {GAMMA_MAX}")


def _truncated_positive_normal(rng: np.random.Generator, mu: float, sigma: float, n: int) -> np.ndarray:
    """Positive draws of N(mu, sigma^2) by redrawing rejected values."""
    x = mu + sigma * rng.standard_normal(n)
    while np.any(x <= 0):
        bad = x <= 0
        x[bad] = mu + sigma * rng.standard_normal(int(bad.sum()))
    return x


def preset(name: str, n_subjects: int, seed: int = 0) -> Scenario:
    """Build one of the named 40-item scenarios.

    Discrimination and difficulty are drawn once from a ~ N(1, 0.7^2)
    truncated positive and b ~ N(0, 1) and frozen by the seed; the
    guessing floor is 0 in both presets.
    """
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose one of {PRESET_NAMES}")
    n_items = 40
    rng = np.random.default_rng([seed, _ITEM_STREAM])
    a = _truncated_positive_normal(rng, 1.0, 0.7, n_items)
    b = rng.standard_normal(n_items)
    gamma = (
        np.zeros(n_items)
        if name == "all-symmetric-40"
        else np.asarray(ASYMMETRIC_PRESET_GAMMAS)
    )
    return Scenario(
        n_items=n_items,
        n_subjects=n_subjects,
        true_a=a,
        true_b=b,
        true_c=np.zeros(n_items),
        true_gamma=gamma,
        seed=seed,
    )


def generate(s: Scenario) -> tuple[ResponseMatrix, Abilities]:
    """Simulate responses from the scenario; deterministic given its seed.

    theta_j ~ N(0, 1) and Y_ij ~ Bernoulli(c_i + (1 - c_i) *
    Phi_CSN(a_i (theta_j - b_i), gamma_i)).  Returns the matrix together
    with the true abilities for recovery scoring.
    """
    rng = np.random.default_rng([s.seed, _RESPONSE_STREAM])
    theta = rng.standard_normal(s.n_subjects)
    m = _predictor_matrix(s.true_a, s.true_b, theta)
    p = _cdf_rows(m, s.true_gamma)
    p = s.true_c[:, None] + (1.0 - s.true_c[:, None]) * p
    y = (rng.random((s.n_items, s.n_subjects)) < p).astype(np.int8)
    width_i = len(str(s.n_items))
    width_j = len(str(s.n_subjects))
    rm = ResponseMatrix(
        y=y,
        item_ids=tuple(f"item{k + 1:0{width_i}d}" for k in range(s.n_items)),
        subject_ids=tuple(f"s{k + 1:0{width_j}d}" for k in range(s.n_subjects)),
    )
    return rm, Abilities(theta)
