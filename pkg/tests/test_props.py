import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from gmol import core, props
from gmol.core import GmolParams
from gmol.errors import AccuracyError, DomainError, MomentError
from gmol.props import SeriesAccuracy

from conftest import SCENARIOS

mp.mp.dps = 50


def _quad(f, a=0.0, b=math.inf):
    val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=1000)
    return val


class TestOmegaRho:
    def test_omega_examples(self):
        assert props.omega(0, 0, 0.3, 0.7) == pytest.approx(0.4)
        assert props.omega(0, 1, 0.3, 0.7) == pytest.approx(-0.4)
        assert props.omega(4, 2, 0.5, 0.5) == 0.0
        with pytest.raises(DomainError):
            props.omega(1, 3, 0.3, 0.7)

    def test_rho_alpha_one(self):
        assert props.rho(0, 1.0, 0.4) == pytest.approx(-0.6)
        assert props.rho(1, 1.0, 0.4) == pytest.approx(0.6)
        assert props.rho(3, 1.0, 0.4) == 0.0

    def test_rho_vanishes_when_alpha_equals_lam(self):
        assert all(props.rho(j, 0.35, 0.35) == 0.0 for j in range(6))

    def test_rho_zero_against_high_precision(self):
        oracle = mp.nsum(lambda i: mp.mpf("0.4") * mp.mpf("0.8") ** i, [0, mp.inf])
        assert props.rho(0, 0.2, 0.6) == pytest.approx(float(oracle), rel=1e-10)

    @pytest.mark.parametrize("j", [0, 1, 2, 5, 10])
    @pytest.mark.parametrize("alpha,lam", [(0.2, 0.6), (0.1, 0.3), (0.75, 0.1)])
    def test_rho_against_partial_sum(self, j, alpha, lam):
        a, l = mp.mpf(alpha), mp.mpf(lam)
        start = 0 if j < 2 else j - 1
        oracle = mp.nsum(lambda i: (-1) ** j * (l - a) * (1 - a) ** i * mp.binomial(i + 1, j), [start, mp.inf])
        assert props.rho(j, alpha, lam) == pytest.approx(float(oracle), rel=1e-9)

    def test_rho_cap(self):
        with pytest.raises(AccuracyError):
            props.rho(0, 0.01, 0.5, SeriesAccuracy(j_max=10))


class TestMixture:
    def test_lomax_case_is_empty(self):
        rep = props.mixture_rep(GmolParams(1, 1, 2.0, 3.0))
        assert len(rep) == 0 and rep.tail_bound == 0.0

    def test_tau_star(self, scenario):
        rep = props.mixture_rep(scenario)
        assert np.allclose(rep.tau_star, (np.arange(len(rep)) + 1) * scenario.tau)

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    def test_reconstruction_reference_points(self, x):
        th = SCENARIOS[0]
        assert abs(props.mixture_rep(th).pdf(x) - core.pdf(x, th)) < 1e-8

    def test_reconstruction_log_grid(self, scenario):
        x = np.geomspace(1e-3, 1e3, 300) * scenario.beta
        rep = props.mixture_rep(scenario)
        assert np.max(np.abs(rep.pdf(x) - core.pdf(x, scenario))) < 1e-7

    def test_mass_sums_to_zero(self, scenario):
        rep = props.mixture_rep(scenario)
        assert abs(rep.phi.sum() + props._abs_phi_tail(len(rep), scenario.alpha, scenario.lam) * 0) < 1e-8

    @pytest.mark.parametrize("alpha,lam", [(0.6, 0.2), (0.75, 0.3), (0.9, 0.95)])
    def test_closed_form_matches_rho_route(self, alpha, lam):
        rep = props.mixture_rep(GmolParams(alpha, lam, 1.0, 1.0))
        tight = SeriesAccuracy(tail_tol=1e-15, j_max=2000)
        for k in range(6):
            assert rep.phi[k] == pytest.approx(props.phi_from_rho(k, alpha, lam, tight), rel=1e-9, abs=1e-12)

    def test_rho_route_diverges_for_small_alpha(self):
        with pytest.raises(AccuracyError):
            props.phi_from_rho(0, 0.2, 0.6)

    def test_term_cap(self):
        with pytest.raises(AccuracyError):
            props.mixture_rep(GmolParams(0.05, 0.0, 1.0, 1.0))

    @given(st.floats(0.05, 1.0), st.floats(0.0, 1.0), st.floats(0.3, 10), st.floats(0.2, 10))
    @settings(max_examples=40, deadline=None)
    def test_reconstruction_property(self, a, lam, tau, beta):
        th = GmolParams(a, lam, tau, beta)
        try:
            rep = props.mixture_rep(th)
        except AccuracyError:
            assume(False)
        x = np.geomspace(1e-3, 1e3, 40) * beta
        assert np.max(np.abs(rep.pdf(x) - core.pdf(x, th))) <= rep.tail_bound + 1e-9


class TestMoments:
    def test_lomax_examples(self):
        assert props.moment(1, GmolParams(1, 1, 2, 1)) == pytest.approx(1.0, rel=1e-13)
        assert props.moment(2, GmolParams(1, 1, 6, 2)) == pytest.approx(0.4, rel=1e-13)

    def test_against_quadrature_reference(self):
        th = GmolParams(0.5, 0.4, 9, 7)
        ref = _quad(lambda x: x * core.pdf(x, th))
        assert props.moment(1, th) == pytest.approx(ref, rel=1e-6)

    @pytest.mark.parametrize("th", SCENARIOS + [GmolParams(0.2, 0.6, 4.0, 0.8), GmolParams(0.1, 0.3, 3.6, 3.0)])
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_against_quadrature(self, th, p):
        if not p < th.tau - 0.5:
            pytest.skip("moment too close to non-existence for quadrature")
        ref = _quad(lambda x: x**p * core.pdf(x, th))
        assert props.moment(p, th) == pytest.approx(ref, rel=1e-5)

    def test_nonexistent(self):
        with pytest.raises(MomentError):
            props.moment(1, SCENARIOS[0])
        with pytest.raises(MomentError):
            props.moment(2, GmolParams(0.5, 0.5, 2.0, 1.0))
        with pytest.raises(DomainError):
            props.moment(0, SCENARIOS[2])


class TestIncompleteMoments:
    @pytest.mark.parametrize("th", [SCENARIOS[2], GmolParams(0.2, 0.6, 4.0, 0.8), GmolParams(0.1, 0.3, 3.0, 3.0)])
    def test_limit_equals_moment(self, th):
        # the neglected tail beyond s decays like s^(1 - tau)
        assert props.incomplete_moment(1, 1e9 * th.beta, th) == pytest.approx(props.moment(1, th), rel=1e-6)

    def test_lomax_quadrature(self):
        th = GmolParams(1, 1, 6, 2)
        ref = _quad(lambda x: x * core.lomax_pdf(x, th.base), 0, 2)
        assert props.incomplete_moment(1, 2.0, th) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("th", [SCENARIOS[1], SCENARIOS[2], GmolParams(0.3, 0.8, 2.5, 1.0)])
    def test_against_quadrature(self, th):
        for s in (0.1, 0.5, 1.0, 3.0, 10.0):
            s = s * th.beta
            ref = _quad(lambda x: x * core.pdf(x, th), 0, s)
            assert props.incomplete_moment(1, s, th) == pytest.approx(ref, rel=1e-7)

    def test_vanishes_near_zero(self):
        assert props.incomplete_moment(1, 1e-9, SCENARIOS[2]) < 1e-12

    def test_nondecreasing(self):
        th = SCENARIOS[1]
        vals = [props.incomplete_moment(1, s, th) for s in np.geomspace(1e-3, 1e3, 60)]
        assert np.all(np.diff(vals) >= -1e-12)


class TestCurves:
    TH = GmolParams(1, 1, 6.0, 2.0)

    def test_lorenz_reference(self):
        th = self.TH
        med = core.quantile(0.5, th)
        ref = _quad(lambda x: x * core.pdf(x, th), 0, med) / _quad(lambda x: x * core.pdf(x, th))
        assert props.lorenz(0.5, th) == pytest.approx(ref, rel=1e-9)

    def test_lorenz_near_one(self):
        assert props.lorenz(1 - 1e-12, self.TH) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("th", [TH, GmolParams(0.2, 0.6, 3.0, 0.8), SCENARIOS[2]])
    def test_lorenz_below_diagonal_and_convex(self, th):
        nu = np.linspace(0.01, 0.99, 100)
        L = props.lorenz(nu, th)
        assert np.all((L >= 0) & (L <= nu + 1e-12))
        assert np.all(np.diff(L, 2) >= -1e-9)

    def test_bonferroni_identity(self):
        nu = np.linspace(0.05, 0.95, 19)
        B = props.bonferroni(nu, SCENARIOS[2])
        assert np.allclose(B * nu, props.lorenz(nu, SCENARIOS[2]), rtol=1e-14)
        assert np.all((B >= 0) & (B <= 1))

    def test_lorenz_needs_mean(self):
        with pytest.raises(MomentError):
            props.lorenz(0.5, SCENARIOS[0])
        with pytest.raises(DomainError):
            props.lorenz(1.0, self.TH)


class TestShapeMeasures:
    def test_bowley_lomax(self):
        assert props.bowley_skewness(GmolParams(1, 1, 1, 1)) == pytest.approx(0.5, rel=1e-14)

    def test_bowley_symmetric_quantiles(self):
        assert props.bowley_skewness(None, q=lambda u: 10 * u) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(0.05, 1.0), st.floats(0, 1), st.floats(0.2, 10), st.floats(0.1, 10), st.floats(0.01, 100))
    @settings(max_examples=60, deadline=None)
    def test_scale_invariance(self, a, lam, tau, beta, c):
        th, thc = GmolParams(a, lam, tau, beta), GmolParams(a, lam, tau, beta * c)
        assert props.moors_kurtosis(thc) == pytest.approx(props.moors_kurtosis(th), abs=1e-12 * max(1, abs(props.moors_kurtosis(th))))
        assert -1 < props.bowley_skewness(th) < 1

    def test_matches_bisection_quantiles(self, scenario):
        th = scenario

        def q_bisect(u):
            hi = float(core.quantile(u, th)) * 4 + 1
            return optimize.brentq(lambda x: float(core.cdf(x, th)) - u, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)

        assert props.bowley_skewness(th) == pytest.approx(props.bowley_skewness(th, q=q_bisect), abs=1e-9)
        assert props.moors_kurtosis(th) == pytest.approx(props.moors_kurtosis(th, q=q_bisect), abs=1e-9)


class TestGeneratingFunction:
    def test_near_zero(self, scenario):
        assert props.mgf(-1e-9, scenario) == pytest.approx(1.0, abs=1e-6)

    def test_lomax_reference(self):
        th = GmolParams(1, 1, 2, 1)
        ref = _quad(lambda x: math.exp(-x) * 2.0 / (1 + x) ** 3)
        assert props.mgf(-1.0, th) == pytest.approx(ref, rel=1e-10)

    def test_slope_at_zero_is_mean(self):
        th = SCENARIOS[2]
        h = 1e-4
        slope = (1.0 - props.mgf(-h, th)) / h
        assert slope == pytest.approx(props.moment(1, th), rel=1e-3)

    @pytest.mark.parametrize("t", [-0.1, -1.0, -5.0])
    def test_mixture_matches_quadrature(self, scenario, t):
        assert props.mgf_mixture(t, scenario) == pytest.approx(props.mgf(t, scenario), rel=1e-5)

    def test_rejects_nonnegative_t(self):
        with pytest.raises(DomainError):
            props.mgf(0.0, SCENARIOS[0])

    def test_kummer_closed_form(self):
        # non-integer shapes so every mixture component has a defined Gamma(-tau)
        th = GmolParams(0.6, 0.3, math.sqrt(2.0), 0.8)
        d = props.mgf_kummer_diagnostic(-1.0, th)
        assert d["kummer_error"] < 1e-8
        assert d["kummer_as_printed_error"] > 1e-3

    def test_lomax_kummer_against_mpmath(self):
        tau, beta, t = 2.5, 1.5, -0.7
        ref = tau * mp.hyperu(1, 1 - tau, -beta * t)
        assert props._lomax_mgf_kummer(t, tau, beta) == pytest.approx(float(ref), rel=1e-10)
