import itertools
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import beta as beta_dist
from scipy.stats import dirichlet as dirichlet_dist
from scipy.stats import norm, truncnorm

from csnirt import csn
from csnirt.model import (
    Abilities,
    AuxIndicators,
    ItemState,
    PriorConfig,
    ResponseMatrix,
    dirichlet_logpdf,
    icc,
    log_prior,
    loglik,
    mixture_icc,
    predictor,
    trunc_beta_logpdf,
    truncnorm_pos_logpdf,
)

import oracles


class TestTypes:
    def test_item_state_effective_gamma(self):
        it = ItemState(a=1.0, b=0.0, z=(0, 1, 0), gamma_neg=-0.3, gamma_pos=0.8)
        assert it.gamma == -0.3
        assert ItemState(a=1.0, b=0.0, z=(1, 0, 0)).gamma == 0.0
        assert ItemState(a=1.0, b=0.0, z=(0, 0, 1), gamma_pos=0.8).gamma == 0.8

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(a=0.0, b=0.0),
            dict(a=-1.0, b=0.0),
            dict(a=1.0, b=0.0, c=1.0),
            dict(a=1.0, b=0.0, gamma_neg=0.1),
            dict(a=1.0, b=0.0, gamma_pos=0.99527),
            dict(a=1.0, b=0.0, z=(1, 1, 0)),
            dict(a=1.0, b=0.0, w=(0.5, 0.5, 0.1)),
        ],
    )
    def test_item_state_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ItemState(**kwargs)

    def test_response_matrix_validation(self):
        y = np.array([[0, 1], [1, 0]])
        rm = ResponseMatrix(y=y, item_ids=("i1", "i2"), subject_ids=("s1", "s2"))
        assert rm.n_items == 2 and rm.n_subjects == 2
        with pytest.raises(ValueError):
            ResponseMatrix(y=np.array([[0, 2]]), item_ids=("i1",), subject_ids=("s1", "s2"))
        with pytest.raises(ValueError):
            ResponseMatrix(y=y, item_ids=("i1", "i1"), subject_ids=("s1", "s2"))
        with pytest.raises(ValueError):
            ResponseMatrix(y=y, item_ids=("i1",), subject_ids=("s1", "s2"))

    def test_aux_indicator_consistency(self):
        d = AuxIndicators(d=np.array([[1, 0]]))
        d.check_against(np.array([[1, 0]]))
        with pytest.raises(ValueError):
            d.check_against(np.array([[0, 0]]))

    def test_abilities_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Abilities(theta=np.array([0.0, np.inf]))


class TestPredictor:
    def test_examples(self):
        assert predictor(1.0, 0.0, 0.0) == 0.0
        assert predictor(2.0, 1.0, 1.0) == 0.0
        assert predictor(1.5, -0.5, 1.0) == pytest.approx(2.25)

    def test_vectorised(self):
        th = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_allclose(predictor(2.0, 0.5, th), 2.0 * (th - 0.5))


class TestIcc:
    def test_probit_at_zero(self):
        assert icc(0.0, 0.0, 0.0) == 0.5

    def test_guessing_floor_shift(self):
        assert icc(0.0, 0.0, 0.2) == pytest.approx(0.6, abs=1e-15)

    def test_skewed_value_matches_quadrature(self):
        want = oracles.csn_cdf_quad(1.2, -0.9)
        assert icc(1.2, -0.9, 0.0) == pytest.approx(want, abs=1e-10)

    def test_rejects_bad_guessing(self):
        with pytest.raises(ValueError):
            icc(0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            icc(0.0, 0.0, -0.1)

    @given(
        st.floats(min_value=-0.98, max_value=0.98),
        st.floats(min_value=0.0, max_value=0.9),
    )
    @settings(max_examples=100)
    def test_monotone_in_m_with_limits(self, gamma, c):
        m = np.linspace(-8, 8, 33)
        p = icc(m, gamma, c)
        assert np.all(np.diff(p) >= -1e-14)
        assert icc(-40.0, gamma, c) == pytest.approx(c, abs=1e-12)
        assert icc(40.0, gamma, c) == pytest.approx(1.0, abs=1e-12)


class TestMixtureIcc:
    def test_degenerate_weight_is_probit(self):
        from scipy.special import ndtr

        for m in (-1.3, 0.0, 2.2):
            assert mixture_icc(m, (1.0, 0.0, 0.0), -0.8, 0.6) == pytest.approx(
                ndtr(m), abs=1e-14
            )

    def test_balanced_weights_at_zero(self):
        # reflection makes the two skew terms average to 1/2 at m = 0
        val = mixture_icc(0.0, (1 / 3, 1 / 3, 1 / 3), -0.7, 0.7)
        assert val == pytest.approx(0.5, abs=1e-14)

    def test_convex_combination_matches_oracles(self):
        w = (0.5, 0.2, 0.3)
        want = (
            0.5 * oracles.csn_cdf_quad(0.4, 0.0)
            + 0.2 * oracles.csn_cdf_quad(0.4, -0.8)
            + 0.3 * oracles.csn_cdf_quad(0.4, 0.6)
        )
        assert mixture_icc(0.4, w, -0.8, 0.6) == pytest.approx(want, abs=1e-10)

    def test_matches_one_hot_icc(self):
        # concentrating the weight on component k reproduces icc at that
        # component's skewness
        gn, gp = -0.55, 0.35
        for k, gamma in [(0, 0.0), (1, gn), (2, gp)]:
            w = [0.0, 0.0, 0.0]
            w[k] = 1.0
            for m in (-1.1, 0.2, 1.7):
                assert mixture_icc(m, w, gn, gp) == pytest.approx(
                    icc(m, gamma, 0.0), abs=1e-14
                )

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            mixture_icc(0.0, (0.5, 0.5, 0.5), -0.5, 0.5)
        with pytest.raises(ValueError):
            mixture_icc(0.0, (1, 0, 0), 0.5, 0.5)


def _single_pair(y, d, m=0.0, gamma=0.0):
    items = [ItemState(a=1.0, b=-m, z=(1, 0, 0) if gamma == 0 else (0, 0, 1),
                       gamma_pos=gamma if gamma > 0 else 0.5)]
    return loglik(items, Abilities(np.zeros(1)), np.array([[y]]), np.array([[d]]))


class TestLoglik:
    def test_guessed_pair_contributes_nothing(self):
        assert _single_pair(y=1, d=1) == 0.0

    def test_single_bernoulli_term(self):
        assert _single_pair(y=1, d=0) == pytest.approx(math.log(0.5), abs=1e-14)

    def test_two_by_two_matches_direct_sum(self):
        items = [
            ItemState(a=1.2, b=-0.3, z=(0, 0, 1), gamma_pos=0.7),
            ItemState(a=0.8, b=0.5, z=(0, 1, 0), gamma_neg=-0.4),
        ]
        theta = Abilities(np.array([0.4, -1.1]))
        y = np.array([[1, 0], [1, 1]])
        d = np.array([[0, 0], [0, 1]])
        want = 0.0
        for i, it in enumerate(items):
            for j in range(2):
                if d[i, j] == 1:
                    continue
                p = oracles.csn_cdf_quad(it.a * (theta.theta[j] - it.b), it.gamma)
                want += math.log(p) if y[i, j] == 1 else math.log1p(-p)
        got = loglik(items, theta, y, d)
        assert got == pytest.approx(want, abs=1e-10)

    def test_dimension_mismatch(self):
        items = [ItemState(a=1.0, b=0.0)]
        with pytest.raises(ValueError):
            loglik(items, Abilities(np.zeros(2)), np.array([[1]]), np.array([[0]]))

    def test_rejects_inconsistent_d(self):
        items = [ItemState(a=1.0, b=0.0)]
        with pytest.raises(ValueError):
            loglik(items, Abilities(np.zeros(1)), np.array([[0]]), np.array([[1]]))

    def test_contradiction_underflow_gives_neg_inf(self):
        # a correct response where the curve has underflowed to exactly 0
        items = [ItemState(a=10.0, b=60.0)]
        val = loglik(items, Abilities(np.zeros(1)), np.array([[1]]), np.array([[0]]))
        assert val == -math.inf

    @given(st.integers(0, 1), st.floats(-3, 3), st.floats(-0.9, 0.9))
    @settings(max_examples=50)
    def test_never_positive(self, y, th, gamma):
        z = (1, 0, 0) if gamma == 0 else ((0, 1, 0) if gamma < 0 else (0, 0, 1))
        it = ItemState(
            a=1.0, b=0.0, z=z,
            gamma_neg=gamma if gamma < 0 else -0.5,
            gamma_pos=gamma if gamma > 0 else 0.5,
        )
        assert loglik([it], Abilities(np.array([th])), np.array([[y]]), np.array([[0]])) <= 0.0


class TestMarginalisation:
    @pytest.mark.parametrize("c", [0.0, 0.2, 0.5])
    def test_d_augmentation_preserves_model(self, c):
        # summing the augmented likelihood over the guessing indicators
        # recovers the guessing-floor Bernoulli likelihood
        rng = np.random.default_rng(3)
        items = [
            ItemState(a=1.1, b=0.2, c=c, z=(0, 0, 1), gamma_pos=0.6),
            ItemState(a=0.7, b=-0.5, c=c, z=(0, 1, 0), gamma_neg=-0.3),
        ]
        theta = Abilities(rng.standard_normal(2))
        for y_flat in itertools.product((0, 1), repeat=4):
            y = np.array(y_flat).reshape(2, 2)
            total = 0.0
            # enumerate d <= y; pairs with y = 0, d = 1 have likelihood 0
            free = [(i, j) for i in range(2) for j in range(2) if y[i, j] == 1]
            for bits in itertools.product((0, 1), repeat=len(free)):
                d = np.zeros((2, 2), dtype=int)
                for (i, j), bit in zip(free, bits):
                    d[i, j] = bit
                mass = 1.0
                for i in range(2):
                    for j in range(2):
                        mass *= c if d[i, j] == 1 else 1.0 - c
                total += mass * math.exp(loglik(items, theta, y, d))
            direct = 1.0
            for i, it in enumerate(items):
                for j in range(2):
                    p = icc(it.a * (theta.theta[j] - it.b), it.gamma, c)
                    direct *= p if y[i, j] == 1 else 1.0 - p
            assert total == pytest.approx(direct, abs=1e-12)


class TestLogPrior:
    def _items(self, **over):
        base = dict(a=1.0, b=0.0, c=0.1, gamma_neg=-0.5, gamma_pos=0.5,
                    z=(1, 0, 0), w=(0.5, 0.25, 0.25))
        base.update(over)
        return [SimpleNamespace(**base)]

    def test_matches_component_sum(self):
        cfg = PriorConfig(dirichlet=(0.5, 0.5, 0.5), beta_skew=(1.0, 1.0))
        items = [ItemState(a=1.3, b=-0.2, c=0.1, gamma_neg=-0.4, gamma_pos=0.6,
                           z=(0, 0, 1), w=(0.6, 0.2, 0.2))]
        theta = Abilities(np.array([0.3, -0.8]))
        it = items[0]
        a_trunc = truncnorm((0 - cfg.mu_a) / cfg.sigma_a, np.inf, loc=cfg.mu_a, scale=cfg.sigma_a)
        want = (
            norm.logpdf(theta.theta).sum()
            + a_trunc.logpdf(it.a)
            + norm.logpdf(it.b, cfg.mu_b, cfg.sigma_b)
            + dirichlet_dist.logpdf(np.array(it.w), np.array(cfg.dirichlet))
            # uniform Beta truncated to (0, GAMMA_MAX) has density 1/GAMMA_MAX
            + 2.0 * -math.log(csn.GAMMA_MAX)
        )
        assert log_prior(items, theta, cfg) == pytest.approx(float(want), abs=1e-10)

    def test_guessing_term_added_when_estimated(self):
        cfg = PriorConfig(beta_guess=(2.0, 5.0))
        items = [ItemState(a=1.0, b=0.0, c=0.3)]
        theta = Abilities(np.zeros(1))
        base = log_prior(items, theta, cfg, estimate_c=False)
        with_c = log_prior(items, theta, cfg, estimate_c=True)
        assert with_c - base == pytest.approx(float(beta_dist.logpdf(0.3, 2.0, 5.0)), abs=1e-10)

    def test_negative_discrimination_is_rejected(self):
        cfg = PriorConfig()
        assert log_prior(self._items(a=-1.0), Abilities(np.zeros(1)), cfg) == -math.inf
        assert log_prior(self._items(a=0.0), Abilities(np.zeros(1)), cfg) == -math.inf

    def test_skewness_outside_truncation_is_rejected(self):
        cfg = PriorConfig()
        assert log_prior(self._items(gamma_pos=0.99527), Abilities(np.zeros(1)), cfg) == -math.inf
        assert log_prior(self._items(gamma_neg=-1.0), Abilities(np.zeros(1)), cfg) == -math.inf


class TestPriorDensities:
    def test_truncated_beta_matches_renormalised_scipy(self):
        a, b, hi = 2.0, 3.0, csn.GAMMA_MAX
        x = 0.4
        want = beta_dist.logpdf(x, a, b) - math.log(beta_dist.cdf(hi, a, b))
        assert trunc_beta_logpdf(x, a, b) == pytest.approx(float(want), abs=1e-12)

    def test_truncated_beta_outside_support(self):
        assert trunc_beta_logpdf(csn.GAMMA_MAX, 1.0, 1.0) == -math.inf
        assert trunc_beta_logpdf(0.0, 1.0, 1.0) == -math.inf
        assert trunc_beta_logpdf(-0.2, 1.0, 1.0) == -math.inf

    def test_uniform_truncated_beta_is_flat(self):
        # Beta(1,1) truncated to (0, GAMMA_MAX) integrates to 1
        assert trunc_beta_logpdf(0.3, 1.0, 1.0) == pytest.approx(
            -math.log(csn.GAMMA_MAX), abs=1e-14
        )

    def test_truncnorm_pos_matches_scipy(self):
        mu, sigma = 1.0, 0.7
        ref = truncnorm((0 - mu) / sigma, np.inf, loc=mu, scale=sigma)
        assert truncnorm_pos_logpdf(1.4, mu, sigma) == pytest.approx(
            float(ref.logpdf(1.4)), abs=1e-12
        )
        assert truncnorm_pos_logpdf(-0.1, mu, sigma) == -math.inf

    def test_dirichlet_logpdf_matches_scipy(self):
        w = np.array([0.2, 0.5, 0.3])
        alpha = np.array([0.1, 0.01, 0.01])
        assert dirichlet_logpdf(w, alpha) == pytest.approx(
            float(dirichlet_dist.logpdf(w, alpha)), abs=1e-10
        )


def test_prior_config_validation():
    with pytest.raises(ValueError):
        PriorConfig(dirichlet=(0.0, 0.1, 0.1))
    with pytest.raises(ValueError):
        PriorConfig(sigma_a=-1.0)
    with pytest.raises(ValueError):
        PriorConfig(beta_guess=(1.0, 0.0))
