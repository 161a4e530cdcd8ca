import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylnagy.errors import DomainError, ResourceError
from weylnagy.kernels import (
    ClassParams,
    Metric,
    TailKernel,
    deriv_truncation_bound,
    eval_poisson_kernel,
    eval_scaled_series,
    eval_scaled_tail,
    eval_scaled_tail_deriv,
    eval_series,
    phase,
    reduce_angle,
    tail_bound,
    truncation_index,
    weyl_nagy_kernel_value,
)
from weylnagy.special import hurwitz_zeta_scaled


class TestClassParams:
    def test_beta_reduced_mod4(self):
        p = ClassParams(3.0, -1.0, 2)
        assert p.beta == -1.0
        assert p.beta_mod4 == 3.0

    def test_metric_parse(self):
        assert ClassParams(3.0, 0.0, 2, "inf").p is Metric.LINF
        assert ClassParams(3.0, 0.0, 2, "1").p is Metric.L1
        with pytest.raises(DomainError):
            Metric.parse("2")

    @pytest.mark.parametrize("kw", [dict(n=0), dict(n=2.5), dict(r=0.0), dict(r=math.inf), dict(beta=math.nan)])
    def test_invalid(self, kw):
        args = dict(r=3.0, beta=0.0, n=2) | kw
        with pytest.raises(DomainError):
            ClassParams(**args)

    def test_phase_exact_at_integers(self):
        assert phase(1.0) == (0.0, 1.0)
        assert phase(-2.0) == (-1.0, 0.0)
        assert phase(7.0) == (0.0, -1.0)


class TestTruncationIndex:
    def test_r10_n5(self):
        k = truncation_index(ClassParams(10.0, 0.0, 5), 1e-12)
        assert k.eps_M < 1e-12
        assert k.M % 5 == 0 and (k.M // 5) & (k.M // 5 - 1) == 0
        assert tail_bound(10.0, 5, k.M // 2) >= 1e-12
        j = np.arange(k.M + 1, 50 * k.M, dtype=float)
        dropped = math.fsum((5.0 / j) ** 10)
        assert dropped <= k.eps_M

    def test_r3_n1_half(self):
        k = truncation_index(ClassParams(3.0, 0.0, 1), 0.5)
        assert k.M == 2
        dropped = float(mp.zeta(3)) - 1.0 - 1.0 / 8.0
        assert np.isclose(dropped, 0.0770569, atol=1e-6)
        assert dropped <= k.eps_M <= 0.5

    def test_below_min_r(self):
        with pytest.raises(DomainError):
            truncation_index(ClassParams(1.0, 0.0, 10), 1e-10)

    def test_nonpositive_tol(self):
        with pytest.raises(DomainError):
            truncation_index(ClassParams(3.0, 0.0, 1), 0.0)

    def test_resource_cap(self):
        with pytest.raises(ResourceError) as info:
            truncation_index(ClassParams(1.1, 0.0, 1), 1e-12)
        assert info.value.achievable > 1e-12

    def test_m_below_n_rejected(self):
        with pytest.raises(DomainError):
            TailKernel(ClassParams(3.0, 0.0, 5), 4, 0.1)


class TestScaledTail:
    def test_beta0_t0_is_partial_zeta(self):
        k = truncation_index(ClassParams(3.5, 0.0, 4), 1e-8)
        j = np.arange(4, k.M + 1, dtype=float)
        assert np.isclose(eval_scaled_tail(k, 0.0), math.fsum((4.0 / j) ** 3.5), rtol=1e-14, atol=0)

    def test_odd_kernel_vanishes_at_zero(self):
        k = truncation_index(ClassParams(3.0, 1.0, 1), 1e-6)
        assert eval_scaled_tail(k, 0.0) == 0.0

    def test_alternating_at_pi(self):
        k = truncation_index(ClassParams(4.0, 0.0, 2), 1e-10)
        ref = 16.0 * (1.0 - 7.0 * math.pi**4 / 720.0)
        assert abs(eval_scaled_tail(k, math.pi) - ref) <= k.eps_M + 1e-14

    def test_vectorized_matches_scalar(self):
        k = truncation_index(ClassParams(2.5, 0.3, 3), 1e-5)
        t = np.linspace(-4.0, 4.0, 7)
        v = eval_scaled_tail(k, t)
        assert v.shape == t.shape
        assert np.allclose(v, [eval_scaled_tail(k, x) for x in t], rtol=0, atol=1e-13)

    @given(st.floats(3.0, 12.0), st.integers(1, 30), st.floats(-8.0, 8.0), st.floats(-10.0, 10.0))
    def test_period_four_in_beta(self, r, n, beta, t):
        a = truncation_index(ClassParams(r, beta, n), 1e-5)
        b = truncation_index(ClassParams(r, beta + 4.0, n), 1e-5)
        assert abs(eval_scaled_tail(a, t) - eval_scaled_tail(b, t)) <= 2 * a.eps_M

    @given(st.floats(3.0, 12.0), st.integers(1, 30), st.floats(-8.0, 8.0), st.floats(-10.0, 10.0))
    def test_half_period_negates(self, r, n, beta, t):
        a = truncation_index(ClassParams(r, beta, n), 1e-5)
        b = truncation_index(ClassParams(r, beta + 2.0, n), 1e-5)
        assert abs(eval_scaled_tail(a, t) + eval_scaled_tail(b, t)) <= 2 * a.eps_M

    @given(st.floats(3.0, 12.0), st.integers(1, 30), st.floats(0.0, 4.0), st.floats(-10.0, 10.0))
    def test_bounded_by_scaled_zeta(self, r, n, beta, t):
        k = truncation_index(ClassParams(r, beta, n), 1e-5)
        assert abs(eval_scaled_tail(k, t)) <= hurwitz_zeta_scaled(r, n) + k.eps_M

    @given(st.floats(3.0, 12.0), st.integers(1, 30), st.floats(0.0, 4.0), st.floats(-10.0, 10.0))
    def test_truncation_certificate(self, r, n, beta, t):
        k = truncation_index(ClassParams(r, beta, n), 1e-4)
        k4 = TailKernel(k.params, 4 * k.M, tail_bound(r, n, 4 * k.M))
        assert abs(eval_scaled_tail(k, t) - eval_scaled_tail(k4, t)) <= k.eps_M


class TestScaledTailDerivative:
    def test_even_kernel_slope_zero(self):
        k = truncation_index(ClassParams(4.0, 0.0, 3), 1e-8)
        assert eval_scaled_tail_deriv(k, 0.0, 1) == 0.0

    def test_second_derivative_basel(self):
        k = truncation_index(ClassParams(4.0, 0.0, 1), 1e-10)
        got = eval_scaled_tail_deriv(k, 0.0, 2)
        assert abs(got + math.pi**2 / 6) <= deriv_truncation_bound(k, 2) + 1e-14

    def test_matches_finite_difference(self):
        k = truncation_index(ClassParams(5.0, 1.0, 3), 1e-12)
        h = 1e-5
        fd = (eval_scaled_tail(k, 0.7 + h) - eval_scaled_tail(k, 0.7 - h)) / (2 * h)
        assert abs(eval_scaled_tail_deriv(k, 0.7, 1) - fd) < 1e-6

    def test_second_order_decay(self):
        k = truncation_index(ClassParams(6.0, 0.7, 3), 1e-12)
        exact = eval_scaled_tail_deriv(k, 0.4, 1)

        def err(h):
            fd = (eval_scaled_tail(k, 0.4 + h) - eval_scaled_tail(k, 0.4 - h)) / (2 * h)
            return abs(fd - exact)

        e4, e5 = err(1e-4), err(1e-5)
        assert e5 < e4 / 30.0

    def test_order_domain(self):
        k = truncation_index(ClassParams(3.0, 0.0, 1), 1e-6)
        with pytest.raises(DomainError):
            eval_scaled_tail_deriv(k, 0.1, 3)
        k2 = truncation_index(ClassParams(2.5, 0.0, 1), 1e-6)
        with pytest.raises(DomainError):
            eval_scaled_tail_deriv(k2, 0.1, 2)


class TestPoissonKernel:
    def test_geometric(self):
        assert np.isclose(eval_poisson_kernel(0.5, 0.0, 0.0), 1.0, rtol=1e-15, atol=0)

    def test_odd_at_zero(self):
        assert abs(eval_poisson_kernel(0.5, 1.0, 0.0)) < 1e-16

    def test_against_direct_sum(self):
        k = np.arange(1, 501, dtype=float)
        ref = math.fsum(0.9**k * np.cos(k * 1.1 - 0.3 * math.pi / 2))
        assert np.isclose(eval_poisson_kernel(0.9, 0.3, 1.1), ref, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            eval_poisson_kernel(q, 0.0, 0.3)


class TestWeylNagyKernel:
    def test_basel_negated(self):
        assert np.isclose(weyl_nagy_kernel_value(ClassParams(2.0, 2.0, 1), 0.0), -math.pi**2 / 6, rtol=1e-13, atol=0)

    def test_basel(self):
        assert np.isclose(weyl_nagy_kernel_value(ClassParams(2.0, 0.0, 1), 0.0), math.pi**2 / 6, rtol=1e-13, atol=0)

    def test_dirichlet_beta(self):
        # sum k^-3 sin(k pi/2) = 1 - 1/27 + 1/125 - ... = pi^3/32
        got = weyl_nagy_kernel_value(ClassParams(3.0, 1.0, 1), math.pi / 2)
        assert np.isclose(got, math.pi**3 / 32, rtol=1e-13, atol=0)

    def test_domain(self):
        with pytest.raises(DomainError):
            weyl_nagy_kernel_value(ClassParams(1.0, 0.0, 1), 0.5)


def _polylog_tail(s, beta, n, t):
    mp.mp.dps = 30
    z = mp.expj(t)
    total = mp.polylog(s, z) - mp.fsum(z**k / mp.mpf(k) ** s for k in range(1, n))
    total *= mp.mpf(n) ** s
    c, sn = phase(beta)
    return float(c * mp.re(total) + sn * mp.im(total))


class TestUntruncatedSeries:
    @pytest.mark.parametrize("s", [2, 3, 5])
    @pytest.mark.parametrize("n", [1, 4, 20])
    @pytest.mark.parametrize("t", [1e-6, 3e-3, 0.2, 1.0, 3.0, -2.2])
    def test_against_polylog(self, s, n, t):
        v, e = eval_series(float(s), 0.6, n, t)
        ref = _polylog_tail(s, 0.6, n, t)
        assert abs(v[0] - ref) <= max(e[0], 1e-13 * (1.0 + abs(ref)))

    @pytest.mark.parametrize("n", [1, 3, 50])
    @pytest.mark.parametrize("t", [1e-5, 0.1, 2.0])
    def test_exponent_one_closed_form(self, n, t):
        v, e = eval_series(1.0, 1.4, n, t)
        ref = _polylog_tail(1, 1.4, n, t)
        assert abs(v[0] - ref) <= max(e[0], 1e-12 * (1.0 + abs(ref)))

    @pytest.mark.parametrize("t", [1e-4, 0.05, 0.29, 0.31, 1.3])
    def test_large_exponent_direct_sum(self, t):
        # the k-th term of (n/k)^30 is below 1e-17 beyond k = 4n
        n = 20
        k = np.arange(n, 400, dtype=float)
        ref = math.fsum((n / k) ** 30 * np.cos(k * t - 0.9 * math.pi / 2))
        v, e = eval_series(30.0, 0.9, n, t)
        assert abs(v[0] - ref) <= max(e[0], 1e-14)

    @given(st.floats(3.0, 9.0), st.integers(1, 40), st.floats(0.0, 4.0), st.floats(-7.0, 7.0))
    def test_agrees_with_truncated(self, r, n, beta, t):
        k = truncation_index(ClassParams(r, beta, n), 1e-7)
        v, e = eval_scaled_series(k.params, t)
        assert abs(v - eval_scaled_tail(k, t)) <= k.eps_M + e + 1e-12

    def test_zero_divergent_for_exponent_one(self):
        with pytest.raises(DomainError):
            eval_series(1.0, 0.0, 2, 0.0)

    def test_reduce_angle_keeps_range(self):
        t = np.array([-math.pi, 0.0, 1.0, math.pi, 7.0])
        red = reduce_angle(t)
        assert np.all(np.abs(red) <= math.pi)
        assert red[2] == 1.0
