import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ellipk

from weylnagy.errors import ConsistencyError, DomainError
from weylnagy.estimators import (
    Regime,
    classify_regime,
    estimate,
    estimate_kolmogorov_pinf,
    estimate_stechkin_pinf,
    estimate_telyakovskii_pinf,
    estimate_thm1,
    estimate_thm1_sharp,
    estimate_thm3,
    integral_form_value,
    r_representations,
    remainder_scale,
    zeta_form_bracket,
)
from weylnagy.kernels import ClassParams
from weylnagy.special import hurwitz_zeta_scaled


def P(r, n, beta=0.0, p="1"):
    return ClassParams(r, beta, n, p)


class TestCoarseBracket:
    def test_r4_n100(self):
        e = estimate_thm1(P(4.0, 100))
        assert np.isclose(e.principal, 100 / (4 * math.pi), rtol=1e-15)
        half = 25 * (2 / math.pi) * (0.5 + 0.04)
        assert np.isclose(e.bracket_hi - e.principal, half, rtol=1e-14)
        assert np.isclose(e.principal - e.bracket_lo, half, rtol=1e-14)
        assert e.theorem == "thm1"

    def test_degenerate_corner(self):
        e = estimate_thm1(P(3.0, 3))
        assert np.isclose(e.principal, 1 / math.pi)
        assert np.isclose(e.bracket_hi - e.principal, 4 / math.pi)
        assert e.bracket_lo < 0 < e.bracket_hi

    def test_r2_rejected(self):
        with pytest.raises(DomainError):
            estimate_thm1(P(2.0, 10))


class TestSharpBracket:
    def test_r5_n100(self):
        e = estimate_thm1_sharp(P(5.0, 100))
        assert np.isclose(e.bracket_lo, (20 / 3 - 1) / math.pi, rtol=1e-14)
        assert np.isclose(e.bracket_hi, (20 * 4 / 3 + 2) / math.pi, rtol=1e-14)

    def test_lower_bound_reported_as_printed(self):
        e = estimate_thm1_sharp(P(2.5, 10))
        assert np.isclose(e.bracket_lo, (4 * (1 - 4) - 1) / math.pi, rtol=1e-14)
        assert e.bracket_lo < 0

    @given(st.floats(2.01, 500.0), st.integers(1, 10**6))
    def test_nested_in_coarse_bracket(self, r, n):
        s = estimate_thm1_sharp(P(r, n))
        c = estimate_thm1(P(r, n))
        tol = 1e-12 * max(1.0, abs(c.bracket_hi), abs(c.bracket_lo))
        assert c.bracket_lo - tol <= s.bracket_lo
        assert s.bracket_hi <= c.bracket_hi + tol

    def test_r2_rejected(self):
        with pytest.raises(DomainError):
            estimate_thm1_sharp(P(1.5, 10))


class TestRegimes:
    @pytest.mark.parametrize("r, n, want", [
        (3.0, 100, Regime.SmallR),
        (50.0, 10, Regime.MidR),
        (200.0, 10, Regime.LargeR),
        (11.0, 10, Regime.SmallR),
        (100.0, 10, Regime.MidR),
        (100.000001, 10, Regime.LargeR),
        (11.000001, 10, Regime.MidR),
        (3.0, 1, Regime.N1),
        (1e6, 1, Regime.N1),
    ])
    def test_table(self, r, n, want):
        assert classify_regime(r, n) is want

    @pytest.mark.parametrize("r, n", [(2.0, 5), (1.0, 1), (3.0, 0), (3.0, 2.5)])
    def test_domain(self, r, n):
        with pytest.raises(DomainError):
            classify_regime(r, n)

    @given(st.floats(2.0, 1e7, exclude_min=True), st.integers(1, 10**5))
    def test_total(self, r, n):
        assert classify_regime(r, n) in set(Regime)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 100, 1000, 10**5])
    def test_scales_at_upper_boundary_within_e(self, n):
        r = float(n * n)
        log_ratio = -r * math.log1p(1.0 / n) - (math.log(r / n**2) - r / n)
        assert 0.0 <= log_ratio <= 1.0
        assert remainder_scale(r, n) == r / n**2 * math.exp(-r / n)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 100, 1000, 10**5])
    def test_scales_at_lower_boundary(self, n):
        # at r = n+1 the two forms differ by n^3 e^{1+1/n} / ((n+1)^2 (n-1)),
        # which exceeds e and tends to e from above
        r = n + 1.0
        small = n / (r * (r - 2.0))
        mid = r / n**2 * math.exp(-r / n)
        ratio = small / mid
        assert np.isclose(ratio, n**3 * math.exp(1 + 1 / n) / ((n + 1) ** 2 * (n - 1)), rtol=1e-12)
        assert math.e < ratio <= 4.0
        assert remainder_scale(r, n) == small


class TestThm3:
    def test_small_r(self):
        e = estimate_thm3(P(3.0, 100))
        assert np.isclose(e.principal, 1 / (math.pi * (1 - math.exp(-0.03))), rtol=1e-13)
        assert np.isclose(e.principal, 10.770, atol=5e-4)
        assert np.isclose(e.delta, 100 / 3, rtol=1e-15)
        assert e.regime is Regime.SmallR

    def test_mid_r(self):
        e = estimate_thm3(P(50.0, 10))
        assert np.isclose(e.delta, 0.5 * math.exp(-5.0), rtol=1e-14)
        assert np.isclose(e.delta, 3.369e-3, atol=1e-6)

    def test_n1(self):
        assert estimate_thm3(P(10.0, 1)).delta == math.exp(-10.0)

    def test_large_r_log_space(self):
        e = estimate_thm3(P(1e5, 10))
        assert e.regime is Regime.LargeR
        assert e.delta == math.exp(-1e5 * math.log1p(0.1)) == 0.0 or e.delta > 0.0
        e2 = estimate_thm3(P(2000.0, 10))
        assert np.isclose(e2.delta, float(mp.power(mp.mpf(11) / 10, -2000)), rtol=1e-12)

    @given(st.floats(2.0, 1e4, exclude_min=True), st.integers(1, 10**5))
    def test_delta_positive(self, r, n):
        e = estimate_thm3(P(r, n))
        assert e.delta >= 0.0 and e.principal > 0.0

    def test_r2_rejected(self):
        with pytest.raises(DomainError):
            estimate_thm3(P(2.0, 5))


class TestZetaBracket:
    def test_riemann_zeta_four(self):
        lo, hi, R = zeta_form_bracket(P(4.0, 1))
        assert np.isclose(hi, math.pi**3 / 90, rtol=1e-14)
        assert lo < hi and R > 0

    def test_representations_agree_r25_n3(self):
        a, b = r_representations(2.5, 3)
        assert abs(a - b) <= 1e-11 * abs(a)

    @given(st.floats(2.05, 60.0), st.integers(1, 10**4))
    def test_representations_agree(self, r, n):
        a, b = r_representations(r, n)
        assert abs(a - b) <= 1e-11 * abs(a)

    @pytest.mark.parametrize("r, n", [(2.5, 3), (21.134236887805667, 267), (57.77803437281644, 792), (60.0, 1)])
    def test_against_positive_series(self, r, n):
        # n^r R = sum_{k>n} (n/k)^(r-1) (k-n)/k, summed in high precision
        mp.mp.dps = 40
        R, N = mp.mpf(r), mp.mpf(n)
        f = lambda k: (N / k) ** (R - 1) * (k - N) / k  # noqa: E731
        K = n + 3000
        em = f(K) / 2 - mp.diff(f, K, 1) / 12 + mp.diff(f, K, 3) / 720
        ref = mp.fsum(f(mp.mpf(k)) for k in range(n + 1, K)) + mp.quad(f, [K, mp.inf]) + em
        got, _ = r_representations(r, n)
        assert abs(mp.mpf(got) / ref - 1) < 1e-12

    def test_inconsistent_representations_raise(self, monkeypatch):
        import weylnagy.estimators as est

        monkeypatch.setattr(est, "_r_scaled_unshifted", lambda r, n: 2.0 * est._r_scaled_shifted(r, n))
        with pytest.raises(ConsistencyError):
            zeta_form_bracket(P(3.0, 5))

    def test_r2_rejected(self):
        with pytest.raises(DomainError):
            zeta_form_bracket(P(2.0, 5))
        with pytest.raises(DomainError):
            r_representations(2.0, 5)


class TestIntegralForm:
    def test_zeta_four(self):
        assert np.isclose(integral_form_value(P(4.0, 1), 1e-12), math.pi**3 / 90, rtol=1e-9)

    def test_r6_n9(self):
        assert np.isclose(integral_form_value(P(6.0, 9)), hurwitz_zeta_scaled(6.0, 9) / math.pi, rtol=1e-9)

    def test_near_two(self):
        assert np.isclose(integral_form_value(P(2.1, 2)), hurwitz_zeta_scaled(2.1, 2) / math.pi, rtol=1e-8)

    @given(st.floats(2.05, 60.0), st.integers(1, 2000))
    def test_equals_bracket_top(self, r, n):
        _, hi, _ = zeta_form_bracket(P(r, n))
        assert np.isclose(integral_form_value(P(r, n)), hi, rtol=1e-9)


class TestHistoricalPinf:
    def test_stechkin_large_r_limit(self):
        e = estimate_stechkin_pinf(P(500.0, 1, p="inf"))
        assert np.isclose(e.principal, 4 / math.pi, rtol=1e-13)
        assert e.theorem == "stechkin"

    def test_stechkin_r1(self):
        e = estimate_stechkin_pinf(P(1.0, 1, p="inf"))
        assert np.isclose(e.principal, 8 / math.pi**2 * ellipk(math.exp(-2.0)), rtol=1e-13)
        assert e.delta == 1.0 and e.regime is None

    def test_stechkin_log_growth(self):
        e = estimate_stechkin_pinf(P(5.0, 100, p="inf"))
        assert np.isclose(e.principal, 8 / math.pi**2 * ellipk(math.exp(-0.1)), rtol=1e-12)
        assert e.principal > estimate_stechkin_pinf(P(5.0, 10, p="inf")).principal

    def test_stechkin_domain(self):
        with pytest.raises(DomainError):
            estimate_stechkin_pinf(P(0.5, 3, p="inf"))

    def test_telyakovskii_log_vanishes(self):
        e = estimate_telyakovskii_pinf(P(9.0, 10, beta=0.0, p="inf"))
        assert e.principal == 0.0

    def test_telyakovskii_even_phase(self):
        e = estimate_telyakovskii_pinf(P(2.0, 100, beta=0.0, p="inf"))
        assert np.isclose(e.principal, 4 / math.pi**2 * math.log(100 / 3), rtol=1e-14)

    def test_telyakovskii_r2_n100_beta1(self):
        e = estimate_telyakovskii_pinf(P(2.0, 100, beta=1.0, p="inf"))
        assert np.isclose(e.principal, 4 / math.pi**2 * math.log(100 / 3) + 1 / math.pi, rtol=1e-14)
        assert e.delta == 1.0

    def test_kolmogorov(self):
        assert np.isclose(estimate_kolmogorov_pinf(P(3.0, 2, p="inf")).principal, 4 / math.pi**2 * math.log(2))
        assert np.isclose(estimate_kolmogorov_pinf(P(3.0, 7, p="inf")).principal, 4 / math.pi**2 * 1.9459, atol=1e-4)
        with pytest.raises(DomainError):
            estimate_kolmogorov_pinf(P(3.0, 1, p="inf"))


class TestScalarInequalities:
    @given(st.floats(1e-3, 700.0))
    def test_reciprocal_exp_gap(self, x):
        f = 1.0 / -math.expm1(-x) - 1.0 / x
        assert 0.0 < f < 1.0

    @given(st.floats(1e-3, 1e4), st.integers(1, 10**6))
    def test_power_between_exponentials(self, r, n):
        mid = -r * math.log1p(1.0 / n)
        slack = 1e-13 * max(1.0, abs(mid))
        assert -r / n - slack <= mid <= -r / (n + 1.0) + slack

    @given(st.integers(1, 3000), st.floats(0.0, 1e4))
    def test_large_r_constant(self, n, extra):
        r = float(n * n) + extra
        c = (1.0 / -math.expm1(-r / n) - 1.0) * math.exp(r / n) if r / n < 700 else 1.0
        assert c <= 2.0 + 1e-12

    @given(st.integers(2, 10**6), st.floats(1e-6, 1.0))
    def test_small_r_scale_exceeds_one(self, n, u):
        r = 2.0 + u * (math.sqrt(n) - 1.0)
        lhs = n / (r * (r - 2.0))
        mid = (r - 1.0) ** 2 / (r * (r - 2.0))
        assert lhs >= mid * (1 - 1e-13)
        assert mid > 1.0


class TestDispatch:
    def test_keys(self):
        assert estimate("3", P(3.0, 100)).theorem == "thm3"
        assert estimate("1sharp", P(3.0, 100)).theorem == "thm1_sharp"
        assert estimate("integral", P(4.0, 1)).theorem == "integral"

    def test_unknown(self):
        with pytest.raises(DomainError):
            estimate("7", P(3.0, 100))
