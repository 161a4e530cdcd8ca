"""Ground-truth deviation constants through the dual norms of the tail kernel.

For p = 1 the normalized constant n^r E_n is max|g| / pi, for p = inf it is
(1/pi) int_{-pi}^{pi} |g|, where g is the scaled remainder kernel
sum_{k>=n} (n/k)^r cos(k t - beta pi/2).

Both norms are computed on the untruncated kernel (``kernels.eval_series``)
so no truncation error enters. Certification relies on a priori bounds for g
on a cell [a, b]:

* the coefficient sum S(r, n) bounds |g| everywhere;
* Abel summation gives |g'| <= L1(s) and |g''| <= L2(s) with s the smallest
  value of sin(t/2) on the cell;
* a modulus of continuity omega(delta) covers cells touching t = 0 when r <= 2.

The maximum is found by branch and bound on a dyadic grid; the L1 norm by
certified sign-change detection, zero refinement and the exact antiderivative
(1/n) g_{r+1, beta+1}.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConsistencyError, DomainError
from .kernels import R_MIN_ORACLE, ClassParams, Metric, TailKernel, eval_series, phase
from .special import hurwitz_zeta_scaled

TWO_PI = 2.0 * math.pi
DEFAULT_REL_TOL = 1e-9
REL_TOL_RANGE = (1e-12, 1e-2)

# The L1 norm stays certifiable down to r = 1 (logarithmic singularity).
R_MIN_LINF = 1.0

_GRID_MIN = 256
_GRID_PER_N = 16
_MAX_LEVELS = 60
_MAX_CELLS = 400_000
_ZERO_WIDTH = 1e-13
_SHELLS = 44
_GRID_OFFSET = 0.3819660112501051
# share of rel_tol * value that uncertified cells may consume in total
_CHARGE_SHARE = 0.01


@dataclass(frozen=True)
class NormalizedDeviation:
    """n^r E_n with a certified enclosure half-width."""

    value: float
    half_width: float
    log_absolute: float
    method: str
    t_star: float = float("nan")

    @property
    def interval(self):
        return (self.value - self.half_width, self.value + self.half_width)


def _as_params(kernel):
    if isinstance(kernel, TailKernel):
        return kernel.params, kernel.eps_M
    if isinstance(kernel, ClassParams):
        return kernel, 0.0
    raise TypeError("expected a TailKernel or ClassParams")


def _pow_integral(x, e):
    """int_1^x u^(e-1) du for x >= 1."""
    if e == 0.0:
        return np.log(x)
    return np.expm1(e * np.log(x)) / e


class _Bounds:
    """A priori bounds on the scaled tail g_{r,beta,n} and its derivatives."""

    def __init__(self, r, n):
        self.r = float(r)
        self.n = n
        self.S = hurwitz_zeta_scaled(r, n) if r > 1.0 else math.inf

    def _abel(self, sm, m):
        # |sum_k k^m (n/k)^r e^{ikt}| <= head(K) + b_K / sin(t/2) with
        # b_k = n^m (n/k)^(r-m) nonincreasing (needs r >= m).
        r, n = self.r, self.n
        sm = np.asarray(sm, dtype=float)
        out = np.full(sm.shape, math.inf)
        if r > m + 1.0:
            out[:] = n**m * (1.0 + n / (r - m - 1.0))
        if r < m:
            return out
        pos = sm > 0.0
        if np.any(pos):
            s = sm[pos]
            K = np.maximum(float(n), np.ceil((r - m) / s))
            x = K / n
            head = n**m * (1.0 + n * _pow_integral(x, m + 1.0 - r))
            head = np.where(K > n, head, 0.0)
            tail = n**m * np.exp((m - r) * np.log(x)) / s
            out[pos] = np.minimum(out[pos], head + tail)
        return out

    def lip1(self, sm):
        return self._abel(sm, 1)

    def lip2(self, sm):
        if self.r <= 2.0:
            return np.full(np.shape(sm), math.inf)
        return self._abel(sm, 2)

    def omega(self, delta):
        """Modulus of continuity: sup_{|u-v|<=delta} |g(u) - g(v)|."""
        r, n = self.r, self.n
        delta = np.asarray(delta, dtype=float)
        if r <= 1.0:
            return np.full(delta.shape, math.inf)
        best = np.full(delta.shape, 2.0 * self.S)
        for c in (0.5, 1.0, 2.0, 4.0):
            K = np.maximum(float(n), np.ceil(c / delta))
            x = K / n
            p1 = np.where(K > n, n * (1.0 + n * _pow_integral(x, 2.0 - r)), 0.0)
            t0 = np.exp(-r * np.log(x)) + n / (r - 1.0) * np.exp((1.0 - r) * np.log(x))
            best = np.minimum(best, delta * p1 + 2.0 * t0)
        return best

    def cell_terms(self, a, b):
        h = b - a
        sm = np.minimum(np.abs(np.sin(0.5 * a)), np.abs(np.sin(0.5 * b)))
        sm = np.where(np.ceil(a / TWO_PI) * TWO_PI <= b, 0.0, sm)
        return h, self.lip1(sm), self.lip2(sm), self.omega(0.5 * h)

    def upper(self, ya, yb, err, a, b):
        """Upper bound of y on [a, b] where y = g, -g or |g| (all share bounds)."""
        h, l1, l2, om = self.cell_terms(a, b)
        base = np.maximum(ya, yb)
        u = np.minimum(base + om, 0.5 * (ya + yb) + 0.5 * l1 * h)
        with np.errstate(invalid="ignore"):
            u = np.minimum(u, np.where(np.isfinite(l2), base + 0.125 * l2 * h * h, math.inf))
        return np.minimum(u, self.S) + err

    def lower_abs(self, aa, ab, err, a, b):
        """Lower bound of |g| on [a, b] given g(a), g(b) of equal sign."""
        h, l1, l2, om = self.cell_terms(a, b)
        low = np.minimum(aa, ab)
        lo = np.maximum(low - om, 0.5 * (aa + ab) - 0.5 * l1 * h)
        with np.errstate(invalid="ignore"):
            lo = np.maximum(lo, np.where(np.isfinite(l2), low - 0.125 * l2 * h * h, -math.inf))
        return lo - err


def _grid_size(n):
    target = max(_GRID_MIN, _GRID_PER_N * n)
    return 1 << (target - 1).bit_length()


def _evaluator(params):
    r, beta, n = params.r, params.beta_mod4, params.n

    def ev(t):
        return eval_series(r, beta, n, t)

    return ev


def _pick_best(t, y, e, cur):
    """Update (y, t, e) with the total order (larger y, then smaller t)."""
    i = int(np.argmax(y))
    cand = y[i]
    ties = np.flatnonzero(y == cand)
    i = int(ties[np.argmin(t[ties])])
    by, bt, be = cur
    if cand > by or (cand == by and t[i] < bt):
        return float(y[i]), float(t[i]), float(e[i])
    return cur


def _maximize(params, mode, rel_tol):
    """Certified max of y(t) with y = |g| ('abs'), g ('max') or -g ('min')."""
    bounds = _Bounds(params.r, params.n)
    ev = _evaluator(params)

    def obj(g):
        if mode == "abs":
            return np.abs(g)
        return g if mode == "max" else -g

    N = _grid_size(params.n)
    t = np.arange(N + 1, dtype=float) * (TWO_PI / N)
    t[N] = TWO_PI
    g, e = ev(t[:N])
    g = np.append(g, g[0])
    e = np.append(e, e[0])
    y = obj(g)
    best = _pick_best(t[:N], y[:N], e[:N], (-math.inf, math.inf, 0.0))

    a, b = t[:-1], t[1:]
    ya, yb = y[:-1], y[1:]
    ea, eb = e[:-1], e[1:]
    pruned = -math.inf
    for _ in range(_MAX_LEVELS):
        U = bounds.upper(ya, yb, np.maximum(ea, eb), a, b)
        slack = 0.5 * rel_tol * abs(best[0])
        keep = U > best[0] + slack
        if np.any(~keep):
            pruned = max(pruned, float(U[~keep].max()))
        if not np.any(keep):
            break
        a, b, ya, yb, ea, eb = (v[keep] for v in (a, b, ya, yb, ea, eb))
        if a.size > _MAX_CELLS:
            raise AccuracyError(
                f"branch and bound exceeded {_MAX_CELLS} cells",
                estimate=best[0], bound=float(U[keep].max() - best[0]),
            )
        m = 0.5 * (a + b)
        gm, em = ev(m)
        ym = obj(gm)
        best = _pick_best(m, ym, em, best)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        ya, yb = np.concatenate([ya, ym]), np.concatenate([ym, yb])
        ea, eb = np.concatenate([ea, em]), np.concatenate([em, eb])
    else:
        U = bounds.upper(ya, yb, np.maximum(ea, eb), a, b)
        raise AccuracyError(
            "branch and bound did not converge",
            estimate=best[0], bound=float(U.max() - best[0]),
        )
    value, t_star, err = best
    cert = max(pruned - value, 0.0) + err
    return t_star % TWO_PI, value, cert


def global_max_abs(kernel, rel_tol=DEFAULT_REL_TOL):
    """Certified ``max_t |g(t)|`` for a TailKernel (or ClassParams).

    Returns ``(t_star, value, certificate)``; ties go to the smallest t in
    [0, 2 pi). The certificate bounds |value - max|g||; for a TailKernel it
    also absorbs the truncation error eps_M so it covers max|g_M| as well.
    """
    params, eps = _as_params(kernel)
    _check_rel_tol(rel_tol)
    if params.r < R_MIN_ORACLE:
        raise DomainError(f"sup-norm oracle needs r >= {R_MIN_ORACLE}, got r={params.r}")
    t_star, value, cert = _maximize(params, "abs", rel_tol)
    return t_star, value, cert + eps


def oscillation_half(kernel, rel_tol=DEFAULT_REL_TOL):
    """(max g - min g) / 2 with certificate.

    This is inf_lambda max|g - lambda|, the dual norm once the admissible
    functions are restricted to zero mean.
    """
    params, eps = _as_params(kernel)
    _check_rel_tol(rel_tol)
    if params.r < R_MIN_ORACLE:
        raise DomainError(f"sup-norm oracle needs r >= {R_MIN_ORACLE}, got r={params.r}")
    _, hi, c_hi = _maximize(params, "max", rel_tol)
    _, lo, c_lo = _maximize(params, "min", rel_tol)
    return 0.5 * (hi + lo), 0.5 * (c_hi + c_lo) + eps


def _refine_zeros(ev, a, b, ga, gb):
    """Vectorised Illinois / bisection on brackets with ga * gb < 0."""
    a, b, ga, gb = (np.array(v, dtype=float) for v in (a, b, ga, gb))
    fa, fb = ga.copy(), gb.copy()
    side = np.zeros(a.shape, dtype=int)
    for it in range(200):
        active = (b - a) > _ZERO_WIDTH
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        aa, bb, fA, fB = a[idx], b[idx], fa[idx], fb[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = bb - fB * (bb - aa) / (fB - fA)
        mid = 0.5 * (aa + bb)
        bad = ~np.isfinite(c) | (c <= aa) | (c >= bb) | (it % 3 == 2)
        c = np.where(bad, mid, c)
        gc, ec = ev(c)
        hit = np.abs(gc) <= ec
        left = (np.sign(gc) == np.sign(ga[idx])) & ~hit
        right = ~left & ~hit
        # zero in [c, b]
        ii = idx[left]
        a[ii], ga[ii], fa[ii] = c[left], gc[left], gc[left]
        fb[ii] = np.where(side[ii] == 1, 0.5 * fb[ii], fb[ii])
        side[ii] = 1
        # zero in [a, c]
        ii = idx[right]
        b[ii], gb[ii], fb[ii] = c[right], gc[right], gc[right]
        fa[ii] = np.where(side[ii] == -1, 0.5 * fa[ii], fa[ii])
        side[ii] = -1
        ii = idx[hit]
        a[ii] = b[ii] = c[hit]
        ga[ii] = gb[ii] = gc[hit]
    return a, b, ga, gb


def _log_abs_bound(n, delta):
    """int_0^delta |g| for r = 1 via |g| <= n (|ln(2 sin(t/2))| + pi/2 + H_{n-1})."""
    h = math.fsum(1.0 / k for k in range(1, n))
    # for t <= 1, |ln(2 sin(t/2))| <= ln(1/t) + 0.05
    return n * delta * (math.log(1.0 / delta) + 1.0 + 0.05 + 0.5 * math.pi + h)


def _l1_norm(params, rel_tol):
    r, n = params.r, params.n
    bounds = _Bounds(r, n)
    ev = _evaluator(params)
    c0, _ = phase(params.beta_mod4)
    N = _grid_size(n)
    h = TWO_PI / N
    # offset grid on [-pi, pi]: points avoid t = 0 and the symmetric zeros at pi
    inner = (np.arange(N, dtype=float) + _GRID_OFFSET) * h - math.pi
    j0 = int(np.searchsorted(inner, 0.0))
    neg, pos = inner[:j0], inner[j0:]
    wrap = [inner[0] + TWO_PI]
    breaks = [np.array([0.0])]
    extra = 0.0
    if r > 1.0:
        # the cell across t = 0 is certified by the modulus of continuity;
        # split it there when g(0) = 0 exactly
        mid = [0.0] if c0 == 0.0 else []
        pts = np.concatenate([neg, mid, pos, wrap])
    else:
        # r = 1: |g| grows logarithmically at 0; shells of cells towards it
        scale = np.exp2(-np.arange(1, _SHELLS + 1, dtype=float))
        pts = np.concatenate([neg, neg[-1] * scale, (pos[0] * scale)[::-1], pos, wrap])
        gap_l, gap_r = -neg[-1] * scale[-1], pos[0] * scale[-1]
        extra += 2.0 * (_log_abs_bound(n, gap_l) + _log_abs_bound(n, gap_r))
    g, e = ev(pts)
    exact_zero = pts == 0.0
    g[exact_zero] = 0.0
    e[exact_zero] = 0.0
    breaks.append(pts[np.abs(g) <= e])
    budget = _CHARGE_SHARE * rel_tol * h * float(np.sum(np.abs(g)))

    a, b = pts[:-1], pts[1:]
    ga, gb, ea, eb = g[:-1], g[1:], e[:-1], e[1:]
    if r <= 1.0:
        # the gap around t = 0 is already charged
        cells = ~((a < 0.0) & (b > 0.0))
        a, b, ga, gb, ea, eb = (v[cells] for v in (a, b, ga, gb, ea, eb))
    zero_a, zero_b, zero_ga, zero_gb = [], [], [], []
    for level in range(_MAX_LEVELS + 1):
        change = ga * gb < 0.0
        zero_a.append(a[change])
        zero_b.append(b[change])
        zero_ga.append(ga[change])
        zero_gb.append(gb[change])
        same = ~change
        a, b, ga, gb, ea, eb = (v[same] for v in (a, b, ga, gb, ea, eb))
        err = np.maximum(ea, eb)
        lo = bounds.lower_abs(np.abs(ga), np.abs(gb), err, a, b)
        open_ = ~(lo > 0.0)
        a, b, ga, gb, ea, eb, err = (v[open_] for v in (a, b, ga, gb, ea, eb, err))
        if a.size == 0:
            break
        # an undetected sign change costs at most twice the |g| mass of the cell
        charge = 2.0 * (b - a) * bounds.upper(np.abs(ga), np.abs(gb), err, a, b)
        cheap = charge <= budget
        if level == _MAX_LEVELS or a.size > _MAX_CELLS:
            cheap[:] = True
        if np.any(cheap):
            extra += float(np.sum(charge[cheap]))
            breaks.extend([a[cheap], b[cheap]])
            a, b, ga, gb, ea, eb = (v[~cheap] for v in (a, b, ga, gb, ea, eb))
            if a.size == 0:
                break
        m = 0.5 * (a + b)
        gm, em = ev(m)
        breaks.append(m[np.abs(gm) <= em])
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        ga, gb = np.concatenate([ga, gm]), np.concatenate([gm, gb])
        ea, eb = np.concatenate([ea, em]), np.concatenate([em, eb])

    za, zb = np.concatenate(zero_a), np.concatenate(zero_b)
    zga, zgb = np.concatenate(zero_ga), np.concatenate(zero_gb)
    if za.size > 64 * N:
        raise ConsistencyError(f"{za.size} sign changes detected; grid aliasing suspected")
    za, zb, zga, zgb = _refine_zeros(ev, za, zb, zga, zgb)
    extra += float(np.sum(2.0 * (zb - za) * (np.abs(zga) + np.abs(zgb))))
    breaks.append(0.5 * (za + zb))

    bp = np.unique(np.mod(np.concatenate(breaks) + math.pi, TWO_PI) - math.pi)
    G, eG = eval_series(r + 1.0, params.beta_mod4 + 1.0, n, bp)
    G = np.append(G, G[0]) / n
    eG = np.append(eG, eG[0]) / n
    pieces = np.abs(np.diff(G))
    value = math.fsum(pieces)
    cert = float(np.sum(eG[:-1] + eG[1:])) + extra + 4.0 * np.finfo(float).eps * value * len(pieces)
    return value, cert


def l1_norm(kernel, rel_tol=DEFAULT_REL_TOL):
    """Certified ``int_{-pi}^{pi} |g(t)| dt`` for a TailKernel (or ClassParams).

    Returns ``(value, certificate)``. Sign changes are located on a dyadic
    grid with shells refined towards t = 0; cells without a sign change are
    certified zero-free by the a priori bounds or bisected. On each signed
    piece the integral is the exact increment of the antiderivative.
    """
    params, eps = _as_params(kernel)
    _check_rel_tol(rel_tol)
    if params.r < R_MIN_LINF:
        raise DomainError(f"L1-norm oracle needs r >= {R_MIN_LINF}, got r={params.r}")
    value, cert = _l1_norm(params, rel_tol)
    return value, cert + TWO_PI * eps


def _check_rel_tol(rel_tol):
    lo, hi = REL_TOL_RANGE
    if not (lo <= rel_tol <= hi):
        raise DomainError(f"rel_tol must lie in [{lo:g}, {hi:g}], got {rel_tol!r}")


def exact_deviation(params, rel_tol=DEFAULT_REL_TOL, centered=False):
    """Exact normalized deviation n^r E_n(W^r_{beta,p}) with enclosure.

    p = 1 uses max|g| / pi; p = inf uses (1/pi) int |g|. With
    ``centered=True`` the p = 1 value is (max g - min g) / (2 pi) instead.
    Raises AccuracyError when the certificate exceeds ``rel_tol * value``.
    """
    if not isinstance(params, ClassParams):
        raise TypeError("params must be a ClassParams")
    _check_rel_tol(rel_tol)
    t_star = float("nan")
    if params.p is Metric.L1:
        if centered:
            raw, cert = oscillation_half(params, rel_tol)
        else:
            t_star, raw, cert = global_max_abs(params, rel_tol)
        method = "supnorm_oracle"
    else:
        raw, cert = l1_norm(params, rel_tol)
        method = "l1_oracle"
    value = raw / math.pi
    half = cert / math.pi
    if not (value > 0.0) or half > rel_tol * value:
        raise AccuracyError(
            f"certificate {half:.3g} exceeds rel_tol * value for {params}",
            estimate=value, bound=half,
        )
    log_abs = math.log(value) - params.r * math.log(params.n)
    return NormalizedDeviation(value, half, log_abs, method, t_star)
