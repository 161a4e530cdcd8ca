"""Weyl-Nagy kernels, their Fourier remainder tails, and the Poisson kernel.

Every tail is handled in scaled form

    g(t) = sum_{k>=n} (n/k)**r * cos(k t - beta pi/2),

which equals n**r times the remainder of the kernel after the partial sum of
order n-1. The scaling keeps large r from underflowing.

Two evaluation routes exist:

* ``eval_scaled_tail`` sums a truncated series up to a certified index M
  (``TailKernel``); this is the brute-force path.
* ``eval_series`` evaluates the untruncated series: a finite head plus an
  asymptotic (Euler-Boole) expansion of the tail that is accurate once
  K |1 - e^{it}| is large compared with the exponent. At t = 0 the value is a
  Hurwitz zeta sum. It returns a per-point error estimate.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import BERNOULLI_EVEN, CompensatedAccumulator
from .errors import DomainError, ResourceError
from .special import hurwitz_zeta_scaled

R_MIN_ORACLE = 1.05
M_CAP = 2**31

# Euler-Boole tail: K |1 - e^{it}| >= TAIL_RHO * (s + TAIL_ORDER).
TAIL_ORDER = 14
TAIL_RHO = 16.0
HEAD_CAP = 2**23

# Euler-Maclaurin route for small |t| (heads of the Euler-Boole route grow like 1/|t|).
EM_SMALL_T_MAX = 0.3
EM_SWITCH_K = 1 << 13
EM_TERMS = 10

_CHUNK_ELEMS = 1 << 21
_EPS = np.finfo(float).eps


class Metric(enum.Enum):
    """Metric selector of the class W^r_{beta,p}."""

    L1 = "1"
    LINF = "inf"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        if key in ("1", "l1"):
            return cls.L1
        if key in ("inf", "linf", "infinity", "oo"):
            return cls.LINF
        raise DomainError(f"metric must be 1 or inf, got {text!r}")


def _reduce_beta(beta):
    b = math.fmod(float(beta), 4.0)
    if b < 0.0:
        b += 4.0
    if b >= 4.0:  # fmod of tiny negatives can round up to 4.0
        b = 0.0
    return b


def phase(beta):
    """Return (cos(beta pi/2), sin(beta pi/2)), exact for integer beta."""
    b = _reduce_beta(beta)
    exact = {0.0: (1.0, 0.0), 1.0: (0.0, 1.0), 2.0: (-1.0, 0.0), 3.0: (0.0, -1.0)}
    if b in exact:
        return exact[b]
    ang = 0.5 * math.pi * b
    return math.cos(ang), math.sin(ang)


@dataclass(frozen=True)
class ClassParams:
    """Point (r, beta, n, p) of the class family.

    ``beta`` keeps the value given by the caller; ``beta_mod4`` is the
    canonical representative in [0, 4) that all computations use.
    """

    r: float
    beta: float
    n: int
    p: Metric = Metric.L1
    beta_mod4: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise DomainError(f"r must be positive and finite, got {self.r!r}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta!r}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "beta", float(self.beta))
        if not isinstance(self.p, Metric):
            object.__setattr__(self, "p", Metric.parse(self.p))
        object.__setattr__(self, "beta_mod4", _reduce_beta(self.beta))

    def with_n(self, n):
        return ClassParams(self.r, self.beta, n, self.p)


@dataclass(frozen=True)
class TailKernel:
    """Remainder kernel truncated at index M with uniform error bound eps_M."""

    params: ClassParams
    M: int
    eps_M: float

    def __post_init__(self):
        if self.M < self.params.n:
            raise DomainError(f"truncation index M={self.M} is below n={self.params.n}")


def tail_bound(r, n, M):
    """Integral-comparison bound on sum_{k>M} (n/k)**r, valid for r > 1."""
    return n / (r - 1.0) * math.exp((r - 1.0) * math.log(n / M))


def truncation_index(params, tol):
    """Smallest M = n 2^j whose certified tail bound is strictly below ``tol``."""
    r, n = params.r, params.n
    if not (tol > 0.0):
        raise DomainError(f"tol must be positive, got {tol}")
    if r < R_MIN_ORACLE:
        raise DomainError(f"truncation needs r >= {R_MIN_ORACLE}, got r={r}")
    M = n
    while True:
        eps = tail_bound(r, n, M)
        if eps < tol:
            return TailKernel(params, M, eps)
        if 2 * M > M_CAP:
            raise ResourceError(
                f"tail bound {tol:g} needs M > {M_CAP}; best achievable is {eps:.3g}",
                achievable=eps,
            )
        M *= 2


def _truncated_sum(exponent, beta, n, M, t):
    """sum_{k=n}^{M} (n/k)**exponent * cos(k t - beta pi/2), Neumaier across chunks."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c, s = phase(beta)
    tr = reduce_angle(t)
    acc = CompensatedAccumulator(tr.shape)
    chunk = max(1, _CHUNK_ELEMS // max(1, tr.size))
    for k0 in range(n, M + 1, chunk):
        k = np.arange(k0, min(k0 + chunk, M + 1), dtype=float)
        coef = np.exp(-exponent * np.log(k / n))
        ang = np.multiply.outer(tr, k)
        terms = coef * (c * np.cos(ang) + s * np.sin(ang))
        acc.add(terms.sum(axis=1))  # contiguous axis: numpy sums pairwise
    return acc.result()


def reduce_angle(t):
    """Map t to [-pi, pi] without disturbing arguments already in range."""
    t = np.asarray(t, dtype=float)
    return t - 2.0 * np.pi * np.round(t / (2.0 * np.pi))


def _maybe_scalar(arr, like):
    return float(arr[0]) if np.ndim(like) == 0 else arr


def eval_scaled_tail(kernel, t):
    """Truncated tail g_M(t) = sum_{k=n}^{M} (n/k)^r cos(kt - beta pi/2).

    |g_M(t) - g(t)| <= kernel.eps_M for every t.
    """
    p = kernel.params
    out = _truncated_sum(p.r, p.beta_mod4, p.n, kernel.M, t)
    return _maybe_scalar(out, t)


def deriv_truncation_bound(kernel, order):
    """Uniform bound on the discarded part of the order-th derivative series."""
    p = kernel.params
    s = p.r - order
    if s < R_MIN_ORACLE:
        raise DomainError(f"derivative of order {order} needs r - order >= {R_MIN_ORACLE}")
    return p.n**order * tail_bound(s, p.n, kernel.M)


def eval_scaled_tail_deriv(kernel, t, order):
    """Termwise derivative of g_M; the discarded part is bounded by
    ``deriv_truncation_bound(kernel, order)``."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    p = kernel.params
    deriv_truncation_bound(kernel, order)
    # d^m/dt^m of (n/k)^r cos(kt - phi) is n^m (n/k)^(r-m) cos(kt - (beta-m) pi/2)
    out = p.n**order * _truncated_sum(p.r - order, p.beta_mod4 - order, p.n, kernel.M, t)
    return _maybe_scalar(out, t)


def eval_poisson_kernel(q, beta, t):
    """Poisson kernel sum_{k>=1} q^k cos(kt - beta pi/2) in closed form."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"Poisson kernel needs 0 < q < 1, got q={q}")
    c, s = phase(beta)
    z = q * np.exp(1j * np.asarray(t, dtype=float))
    val = (c - 1j * s) * z / (1.0 - z)
    out = np.real(val)
    return float(out) if np.ndim(out) == 0 else out


# --- untruncated evaluation -------------------------------------------------

def _stirling_factorial_table(order):
    """tab[j][i] = i! * S2(j, i), so that sum_m m^j z^m = u sum_i tab[j][i] w^i."""
    s2 = [[0] * (order + 1) for _ in range(order + 1)]
    s2[0][0] = 1
    for j in range(1, order + 1):
        for i in range(1, j + 1):
            s2[j][i] = i * s2[j - 1][i] + s2[j - 1][i - 1]
    return np.array(
        [[math.factorial(i) * s2[j][i] for i in range(order + 1)] for j in range(order + 1)],
        dtype=float,
    )


_FUBINI = _stirling_factorial_table(TAIL_ORDER)


def _euler_boole_tail(s, n, K, tr):
    """sum_{k>=K} (n/k)^s e^{ikt} and an error estimate, elementwise.

    Expands (K+m)^-s in powers of m and sums m^j z^m in closed form.
    """
    z = np.exp(1j * tr)
    u = 1.0 / (1.0 - z)
    w = z * u
    wpow = np.ones((TAIL_ORDER + 1,) + tr.shape, dtype=complex)
    for i in range(1, TAIL_ORDER + 1):
        wpow[i] = wpow[i - 1] * w
    Kf = K.astype(float)
    total = np.zeros(tr.shape, dtype=complex)
    mag = np.zeros(tr.shape)
    binom = np.ones(tr.shape)  # C(-s, j) K^-j
    last = None
    for j in range(TAIL_ORDER + 1):
        if j:
            binom = binom * (-(s + j - 1.0) / j) / Kf
        aj = u * (_FUBINI[j, : j + 1] @ wpow[: j + 1].reshape(j + 1, -1)).reshape(tr.shape)
        term = binom * aj
        total += term
        mag += np.abs(term)
        last = np.abs(term)
    lead = np.exp(-s * np.log(Kf / n))
    zK = np.exp(1j * np.remainder(Kf * tr, 2.0 * np.pi))
    value = lead * zK * total
    err = lead * (2.0 * last + 8.0 * _EPS * mag)
    return value, err


def _head_sums(s, n, K, tr):
    """Complex sums sum_{k=n}^{K-1} (n/k)^s e^{ikt} and sum of |terms|."""
    re = CompensatedAccumulator(tr.shape)
    im = CompensatedAccumulator(tr.shape)
    absum = np.zeros(tr.shape)
    order = np.argsort(-K, kind="stable")
    Ks = K[order]
    kmax = int(Ks[0]) if Ks.size else n
    k0 = n
    while k0 < kmax:
        n_act = int(np.searchsorted(-Ks, -k0, side="left"))  # points with K > k0
        idx = order[:n_act]
        chunk = max(256, _CHUNK_ELEMS // max(1, n_act))
        k1 = min(k0 + chunk, int(Ks[0]))
        k = np.arange(k0, k1, dtype=float)
        coef = np.exp(-s * np.log(k / n))
        live = k[None, :] < K[idx][:, None]
        ang = np.multiply.outer(tr[idx], k)
        w = np.where(live, coef[None, :], 0.0)
        rsum = np.zeros(tr.shape)
        isum = np.zeros(tr.shape)
        rsum[idx] = (w * np.cos(ang)).sum(axis=1)
        isum[idx] = (w * np.sin(ang)).sum(axis=1)
        re.add(rsum)
        im.add(isum)
        absum[idx] += w.sum(axis=1)
        k0 = k1
    return re.result() + 1j * im.result(), absum


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
_GL_U = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS
_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _rotated_tail_integral(s, a):
    """J(s, a) = int_0^inf e^{-a v} (1 + i v)^{-s} dv for s > 1, a > 0.

    [0, 1] uses the map v = -ln(1 - u (1 - e^{-a})) / a, which turns e^{-a v} dv
    into a constant; [1, inf) uses v = e^y with panels of width 1/2 up to the
    point where both e^{-a v} and v^{1-s} are negligible.
    """
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape, dtype=complex)
    mass = -np.expm1(-a)
    v = -np.log1p(-np.multiply.outer(mass, _GL_U)) / a[:, None]
    out[:] = mass / a * (np.exp(-s * np.log1p(1j * v)) @ _GL_W)
    y_end = np.minimum(np.log(45.0 / a), 37.0 / (s - 1.0))
    for i in np.flatnonzero(y_end > 0.0):
        panels = max(1, int(math.ceil(2.0 * y_end[i])))
        edges = np.linspace(0.0, y_end[i], panels + 1)
        half = 0.5 * (edges[1] - edges[0])
        y = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half * _GL16_NODES[None, :]
        ev = np.exp(y)
        f = np.exp(y - a[i] * ev - s * np.log1p(1j * ev))
        out[i] += half * np.sum(f * _GL16_WEIGHTS[None, :])
    return out


def _em_small_t(s, n, tr):
    """sum_{k>=n} (n/k)^s e^{ikt} for small |t| by Euler-Maclaurin from K0.

    The integral of (n/x)^s e^{ixt} over [K0, inf) is rotated onto a decaying
    path; the remainder after EM_TERMS Bernoulli terms is below
    ((s + 2p)/K0 + |t|)^{2p} / (2 pi)^{2p} times the tail mass.
    """
    p = EM_TERMS
    K0 = max(n, int(math.ceil(1.5 * (s + 2 * p))))
    tabs = np.abs(tr)
    if K0 > n:
        k = np.arange(n, K0, dtype=float)
        coef = np.exp(-s * np.log(k / n))
        head = np.exp(1j * np.multiply.outer(tabs, k)) @ coef
        habs = float(coef.sum())
    else:
        head = np.zeros(tr.shape, dtype=complex)
        habs = 0.0
    lead = math.exp(-s * math.log(K0 / n))
    a = K0 * tabs
    integral = 1j * np.exp(1j * a) * lead * K0 * _rotated_tail_integral(s, a)
    # F^(m)(K0) = lead e^{i K0 t} sum_l C(m,l) (-1)^l (s)_l K0^-l (it)^(m-l)
    it = 1j * tabs
    base = lead * np.exp(1j * a)
    corr = np.zeros(tr.shape, dtype=complex)
    for j in range(1, p + 1):
        m = 2 * j - 1
        acc = np.zeros(tr.shape, dtype=complex)
        poch = 1.0
        for l in range(m + 1):
            acc += math.comb(m, l) * (-1.0) ** l * poch / K0**l * it ** (m - l)
            poch *= s + l
        corr += BERNOULLI_EVEN[j - 1] / math.factorial(2 * j) * acc
    total = head + integral + 0.5 * base - base * corr
    q = ((s + 2 * p) / K0 + tabs) / (2.0 * math.pi)
    mass = lead * K0 / (s - 1.0)
    err = 4.0 * mass * q ** (2 * p) + 16.0 * _EPS * (habs + mass + np.abs(integral))
    total = np.where(tr < 0.0, np.conj(total), total)
    return total, err


def eval_series(exponent, beta, n, t):
    """Untruncated sum_{k>=n} (n/k)^exponent cos(kt - beta pi/2).

    Returns ``(values, errors)`` arrays; ``errors`` estimates the absolute
    error of each value (tail expansion remainder plus rounding). Requires
    exponent > 1 wherever t is a multiple of 2 pi and cos(beta pi/2) != 0.
    """
    s = float(exponent)
    if not (s > 0.0):
        raise DomainError(f"series exponent must be positive, got {s}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tr = reduce_angle(t)
    c, sn = phase(beta)
    values = np.empty(tr.shape)
    errors = np.empty(tr.shape)

    at_zero = tr == 0.0
    if np.any(at_zero):
        if c == 0.0:
            values[at_zero] = 0.0
            errors[at_zero] = 0.0
        elif s > 1.0:
            S = hurwitz_zeta_scaled(s, n)
            values[at_zero] = c * S
            errors[at_zero] = 1e-14 * S
        else:
            raise DomainError(f"series with exponent {s} <= 1 diverges at t = 0")

    off = ~at_zero
    if s == 1.0 and np.any(off):
        # sum_{k>=1} z^k / k = -log(1 - z); subtract the first n-1 terms
        to = tr[off]
        z = np.exp(1j * to)
        k = np.arange(1, n, dtype=float)
        head = (np.exp(1j * np.multiply.outer(to, k)) / k).sum(axis=1) if n > 1 else 0.0
        total = n * (-np.log1p(-z) - head)
        values[off] = c * total.real + sn * total.imag
        hn = float(np.sum(1.0 / k)) if n > 1 else 0.0
        errors[off] = 8.0 * _EPS * n * (hn + np.abs(np.log(np.abs(1.0 - z))) + 2.0)
        return values, errors
    if np.any(off):
        to = tr[off]
        d = 2.0 * np.abs(np.sin(0.5 * to))
        want = np.ceil(TAIL_RHO * (s + TAIL_ORDER) / d)
        small = (want > EM_SWITCH_K) & (np.abs(to) <= EM_SMALL_T_MAX) & (s > 1.0)
        if np.any(small):
            idx = np.flatnonzero(off)[small]
            total, err = _em_small_t(s, n, to[small])
            values[idx] = c * total.real + sn * total.imag
            errors[idx] = err
            off = off.copy()
            off[idx] = False
            to, d, want = to[~small], d[~small], want[~small]
    if np.any(off) and to.size:
        K = np.maximum(n, np.minimum(want, HEAD_CAP)).astype(np.int64)
        head, absum = _head_sums(s, n, K, to)
        capped = want > HEAD_CAP
        tail = np.zeros(to.shape, dtype=complex)
        terr = np.zeros(to.shape)
        ok = ~capped
        if np.any(ok):
            tail[ok], terr[ok] = _euler_boole_tail(s, n, K[ok], to[ok])
        if np.any(capped):
            # Abel summation: |sum_{k>=K} f_k z^k| <= f_K / |sin(t/2)|
            Kc = K[capped].astype(float)
            fK = np.exp(-s * np.log(Kc / n))
            bound = 2.0 * fK / d[capped]
            if s > 1.0:
                bound = np.minimum(bound, fK + n / (s - 1.0) * np.exp(-(s - 1.0) * np.log(Kc / n)))
            terr[capped] = bound
        total = head + tail
        values[off] = c * total.real + sn * total.imag
        errors[off] = terr + 4.0 * _EPS * (absum + np.abs(tail))
    return values, errors


def eval_scaled_series(params, t, order=0):
    """Untruncated scaled tail of ``params`` (or its order-th derivative).

    Returns ``(values, errors)``.
    """
    n = params.n
    v, e = eval_series(params.r - order, params.beta_mod4 - order, n, t)
    scale = float(n) ** order
    return scale * v, scale * e


def weyl_nagy_kernel_value(params, t):
    """B_{r,beta}(t) = sum_{k>=1} k^-r cos(kt - beta pi/2).

    Evaluated through the untruncated route with n = 1; the result is
    accurate to a few units of rounding.
    """
    if params.r < R_MIN_ORACLE:
        raise DomainError(f"kernel evaluation needs r >= {R_MIN_ORACLE}, got r={params.r}")
    v, _ = eval_series(params.r, params.beta_mod4, 1, t)
    return _maybe_scalar(v, t)
