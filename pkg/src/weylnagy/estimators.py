"""Closed-form estimates of n^r E_n on W^r_{beta,1} and the classical p = inf formulas.

Every value is normalized by n^r, matching ``oracle.NormalizedDeviation``.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional

from ._numerics import BERNOULLI_EVEN
from .errors import ConsistencyError, DomainError
from .kernels import ClassParams, phase
from .special import elliptic_k, hurwitz_zeta_integral_scaled, hurwitz_zeta_scaled

# the two R representations must agree this well before we call it a bug
R_AGREE_HARD = 1e-9


class Regime(enum.Enum):
    N1 = "N1"
    SmallR = "SmallR"
    MidR = "MidR"
    LargeR = "LargeR"


@dataclass(frozen=True)
class EstimateBreakdown:
    """Principal term, remainder scale and optional bracket, all times n^r.

    ``regime`` is None for estimates defined outside r > 2.
    """

    principal: float
    delta: float
    regime: Optional[Regime]
    bracket_lo: Optional[float]
    bracket_hi: Optional[float]
    theorem: str


def _require_r_above_2(params):
    if not (params.r > 2.0):
        raise DomainError(f"this estimate needs r > 2, got r={params.r}")


def classify_regime(r, n):
    """Regime of (r, n); boundaries r = n+1 and r = n^2 go to the lower case."""
    if not (r > 2.0):
        raise DomainError(f"regimes are defined for r > 2, got r={r}")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    n = int(n)
    if n == 1:
        return Regime.N1
    if r <= n + 1:
        return Regime.SmallR
    if r <= n * n:
        return Regime.MidR
    return Regime.LargeR


def remainder_scale(r, n):
    """delta_{r,n} of the regime table (normalized by n^r)."""
    regime = classify_regime(r, n)
    if regime is Regime.N1:
        return math.exp(-r)
    if regime is Regime.SmallR:
        return n / (r * (r - 2.0))
    if regime is Regime.MidR:
        return r / (n * n) * math.exp(-r / n)
    return math.exp(-r * math.log1p(1.0 / n))


def thm3_principal(r, n):
    """1 / (pi (1 - e^{-r/n}))."""
    return 1.0 / (math.pi * -math.expm1(-r / n))


def estimate_thm1(params):
    """Coarse linear estimate: (n/r)(1/pi + theta (1/(r-2) + r/n)), |theta| < 2/pi."""
    _require_r_above_2(params)
    r, n = params.r, params.n
    principal = n / r / math.pi
    delta = n / r * (1.0 / (r - 2.0) + r / n)
    half = 2.0 / math.pi * delta
    return EstimateBreakdown(
        principal, delta, classify_regime(r, n), principal - half, principal + half, "thm1"
    )


def estimate_thm1_sharp(params):
    """(1/pi)((n/r)(1 + theta4/(r-2)) + theta3), theta3 in [-1, 2], theta4 in (-2, 1)."""
    _require_r_above_2(params)
    r, n = params.r, params.n
    nr = n / r
    principal = nr / math.pi
    lo = (nr * (1.0 - 2.0 / (r - 2.0)) - 1.0) / math.pi
    hi = (nr * (1.0 + 1.0 / (r - 2.0)) + 2.0) / math.pi
    delta = nr / (r - 2.0) + 1.0
    return EstimateBreakdown(principal, delta, classify_regime(r, n), lo, hi, "thm1_sharp")


def estimate_thm3(params):
    """Exponential principal term: 1/(pi(1 - e^{-r/n})) + O(1) delta_{r,n}."""
    _require_r_above_2(params)
    r, n = params.r, params.n
    return EstimateBreakdown(
        thm3_principal(r, n), remainder_scale(r, n), classify_regime(r, n), None, None, "thm3"
    )


def _r_scaled_shifted(r, n):
    """n^r [(1/n) zeta(r-1, n+1) - zeta(r, n+1)] from shifted Hurwitz sums."""
    ratio = n / (n + 1.0)
    pref = math.exp(r * math.log(ratio))
    bracket = hurwitz_zeta_scaled(r - 1.0, n + 1) / ratio - hurwitz_zeta_scaled(r, n + 1)
    return pref * bracket


def _r_scaled_unshifted(r, n):
    """n^r [(1/n) zeta(r-1, n) - zeta(r, n)] with the two sums merged termwise.

    The summand is (n/k)^(r-1) (1 - n/k), which vanishes at k = n; the tail
    from N >= 2n uses Euler-Maclaurin on the merged summand.
    """
    head_len = max(n, math.ceil(2.0 * r) + 15)
    N = n + head_len
    head = math.fsum(
        math.exp((r - 1.0) * math.log(n / k)) * (k - n) / k for k in range(n + 1, N)
    )
    x = n / N
    a1 = math.exp((r - 1.0) * math.log(x))  # (n/N)^(r-1)
    a0 = a1 * x  # (n/N)^r
    integral = N * (a1 / (r - 2.0) - a0 / (r - 1.0))
    half = 0.5 * (a1 - a0)
    corr = 0.0
    p1 = r - 1.0  # rising factorials (r-1)_m and (r)_m, m = 2j-1
    p0 = r
    npow = 1.0 / N
    for j in range(1, 9):
        m = 2 * j - 1
        if j > 1:
            p1 *= (r + m - 3.0) * (r + m - 2.0)
            p0 *= (r + m - 2.0) * (r + m - 1.0)
        deriv = -(p1 * a1 - p0 * a0) * npow  # (-1)^m with m odd
        corr += BERNOULLI_EVEN[j - 1] / math.factorial(2 * j) * deriv
        npow /= N * N
    return head + integral + half - corr


def zeta_form_bracket(params):
    """Bracket [(S - R)/pi, S/pi] with S = n^r zeta(r, n) and R = n^r R_{r,n}.

    R is computed from the shifted and the unshifted Hurwitz representations;
    a relative disagreement above 1e-9 raises ConsistencyError.
    Returns ``(lo, hi, R_scaled)``.
    """
    _require_r_above_2(params)
    r, n = params.r, params.n
    S = hurwitz_zeta_scaled(r, n)
    r1 = _r_scaled_shifted(r, n)
    r2 = _r_scaled_unshifted(r, n)
    if abs(r1 - r2) > R_AGREE_HARD * abs(r1):
        raise ConsistencyError(f"R representations disagree at r={r}, n={n}: {r1!r} vs {r2!r}")
    return (S - r1) / math.pi, S / math.pi, r1


def r_representations(r, n):
    """Both scaled R values (shifted, unshifted) for external checks."""
    if not (r > 2.0):
        raise DomainError(f"R_{{r,n}} needs r > 2, got r={r}")
    return _r_scaled_shifted(r, n), _r_scaled_unshifted(r, n)


def estimate_zeta(params):
    lo, hi, R = zeta_form_bracket(params)
    r, n = params.r, params.n
    return EstimateBreakdown(hi, R / math.pi, classify_regime(r, n), lo, hi, "zeta")


def integral_form_value(params, tol=1e-12):
    """(n^r/pi) (1/Gamma(r)) int_0^inf t^(r-1) e^{-nt} / (1 - e^{-t}) dt."""
    _require_r_above_2(params)
    return hurwitz_zeta_integral_scaled(params.r, params.n, tol) / math.pi


def estimate_integral(params, tol=1e-12):
    value = integral_form_value(params, tol)
    _, _, R = zeta_form_bracket(params)
    r, n = params.r, params.n
    return EstimateBreakdown(value, R / math.pi, classify_regime(r, n), value - R / math.pi, value, "integral")


def _regime_or_none(r, n):
    return classify_regime(r, n) if r > 2.0 else None


def estimate_stechkin_pinf(params):
    """p = inf: (8/pi^2) K(e^{-r/n}) + O(1)/r."""
    r, n = params.r, params.n
    if not (r >= 1.0):
        raise DomainError(f"Stechkin's estimate needs r >= 1, got r={r}")
    principal = 8.0 / math.pi**2 * elliptic_k(math.exp(-r / n))
    return EstimateBreakdown(principal, 1.0 / r, _regime_or_none(r, n), None, None, "stechkin")


def estimate_telyakovskii_pinf(params):
    """p = inf: (4/pi^2) ln(n / min(n, r+1)) + (2/(pi r)) |sin(beta pi/2)| + O(1)."""
    r, n = params.r, params.n
    if not (r > 0.0):
        raise DomainError(f"Telyakovskii's estimate needs r > 0, got r={r}")
    _, sn = phase(params.beta_mod4)
    principal = 4.0 / math.pi**2 * math.log(n / min(n, r + 1.0)) + 2.0 / (math.pi * r) * abs(sn)
    return EstimateBreakdown(principal, 1.0, _regime_or_none(r, n), None, None, "telyakovskii")


def estimate_kolmogorov_pinf(params):
    """p = inf: (4/pi^2) ln n + O(1), n >= 2."""
    r, n = params.r, params.n
    if not (r > 0.0):
        raise DomainError(f"Kolmogorov's estimate needs r > 0, got r={r}")
    if n < 2:
        raise DomainError("Kolmogorov's estimate needs n >= 2 (ln 1 = 0)")
    principal = 4.0 / math.pi**2 * math.log(n)
    return EstimateBreakdown(principal, 1.0, _regime_or_none(r, n), None, None, "kolmogorov")


ESTIMATORS = {
    "1": estimate_thm1,
    "1sharp": estimate_thm1_sharp,
    "3": estimate_thm3,
    "zeta": estimate_zeta,
    "integral": estimate_integral,
    "stechkin": estimate_stechkin_pinf,
    "telyakovskii": estimate_telyakovskii_pinf,
    "kolmogorov": estimate_kolmogorov_pinf,
}


def estimate(theorem, params):
    """Dispatch by CLI theorem key."""
    try:
        fn = ESTIMATORS[theorem]
    except KeyError:
        raise DomainError(f"unknown theorem {theorem!r}; choose from {sorted(ESTIMATORS)}") from None
    return fn(params)


__all__ = [
    "Regime",
    "EstimateBreakdown",
    "classify_regime",
    "remainder_scale",
    "thm3_principal",
    "estimate_thm1",
    "estimate_thm1_sharp",
    "estimate_thm3",
    "zeta_form_bracket",
    "r_representations",
    "estimate_zeta",
    "integral_form_value",
    "estimate_integral",
    "estimate_stechkin_pinf",
    "estimate_telyakovskii_pinf",
    "estimate_kolmogorov_pinf",
    "estimate",
    "ClassParams",
]
