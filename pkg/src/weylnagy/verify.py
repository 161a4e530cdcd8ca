"""Inequality suites, bracket conformance and measured O(1) constants.

Reports are plain dicts that serialize to deterministic JSON.
"""

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .errors import DomainError, WeylNagyError
from .estimators import (
    estimate_stechkin_pinf,
    estimate_thm1,
    estimate_thm1_sharp,
    remainder_scale,
    thm3_principal,
    zeta_form_bracket,
)
from .kernels import ClassParams, Metric
from .oracle import DEFAULT_REL_TOL, exact_deviation
from .special import hurwitz_zeta_scaled

INEQ_SLACK = 1e-13
HEADROOM = 0.10
# rounding allowance on closed-form bracket endpoints, relative
BRACKET_ROUNDING = 1e-12

R_DRAW = (2.05, 60.0)
N_DRAW = (1, 10**4)
X_DRAW = (1e-3, 700.0)

CONSTANT_TAGS = ("thm3_p1", "stechkin_pinf")


@dataclass(frozen=True)
class SweepGrid:
    r_values: tuple
    n_values: tuple
    beta_values: tuple
    p: Metric = Metric.L1

    def __post_init__(self):
        for name in ("r_values", "n_values", "beta_values"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise DomainError(f"{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if not isinstance(self.p, Metric):
            object.__setattr__(self, "p", Metric.parse(self.p))

    def points(self):
        for r in sorted(self.r_values):
            for n in sorted(self.n_values):
                for beta in sorted(self.beta_values):
                    yield ClassParams(r, beta, n, self.p)

    def as_dict(self):
        return {
            "r_values": list(self.r_values),
            "n_values": list(self.n_values),
            "beta_values": list(self.beta_values),
            "p": self.p.value,
        }


_SMOKE_BETA = (0.0, 0.5, 1.0, 1.5, 2.0, 3.3)

PRESETS = {
    "smoke": {
        "p1": SweepGrid((2.5, 3.0, 5.0, 10.0, 30.0), (1, 2, 5, 10, 50, 200), _SMOKE_BETA),
        "pinf": SweepGrid((1.0, 2.0, 5.0, 10.0, 30.0), (1, 2, 5, 20), _SMOKE_BETA, Metric.LINF),
    },
    "full": {
        "p1": SweepGrid(
            (2.2, 2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0),
            (1, 2, 3, 5, 10, 20, 50, 100, 200, 500),
            (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.3),
        ),
        "pinf": SweepGrid(
            (1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0),
            (1, 2, 5, 10, 20, 50),
            _SMOKE_BETA,
            Metric.LINF,
        ),
    },
}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def finalize(self, constants=None):
        self.checks.sort(key=_check_key)
        total = len(self.checks)
        passed = sum(1 for c in self.checks if c["pass"])
        vacuous = sum(1 for c in self.checks if c.get("flag") == "vacuous")
        errored = sum(1 for c in self.checks if str(c.get("flag", "")).startswith("errored"))
        blocking = sum(1 for c in self.checks if not c["pass"] and c.get("flag") != "vacuous")
        self.summary = {
            "total": total,
            "passed": passed,
            "failed": total - passed,
            "blocking_failures": blocking,
            "vacuous": vacuous,
            "errored": errored,
            "max_empirical_constant": dict(sorted((constants or {}).items())),
        }
        return self

    @property
    def ok(self):
        return self.summary.get("blocking_failures", 0) == 0

    def to_json(self):
        doc = {"meta": self.meta, "checks": self.checks, "summary": self.summary}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _params_dict(params):
    return {"r": params.r, "beta": params.beta, "n": params.n, "p": params.p.value}


def _check_key(c):
    p = c["params"]
    return (p.get("r", -1.0), p.get("n", -1), p.get("beta", -1.0), p.get("x", -1.0), c["name"])


def _check(name, params, observed, lo, hi, slack, flag=None):
    ok = bool(
        observed is not None
        and math.isfinite(observed)
        and lo - slack <= observed <= hi + slack
    )
    out = {"name": name, "params": params, "observed": observed,
           "bound_lo": lo, "bound_hi": hi, "pass": ok}
    if flag:
        out["flag"] = flag
    return out


def _strict(name, params, observed, lo, hi, slack):
    """Check lo < observed < hi with slack scaled by the operand size."""
    finite = [abs(v) for v in (lo, hi, observed) if math.isfinite(v)]
    tol = slack * max([1.0] + finite)
    ok = bool(lo - tol < observed < hi + tol)
    return {"name": name, "params": params, "observed": observed,
            "bound_lo": lo, "bound_hi": hi, "pass": ok}


# --- inequality suite -------------------------------------------------------

def draw_inequality_samples(seed, count):
    """(r, n, x) arrays from PCG64: r uniform, n and x log-uniform."""
    rng = np.random.Generator(np.random.PCG64(seed))
    r = rng.uniform(R_DRAW[0], R_DRAW[1], count)
    ln_n = rng.uniform(0.0, math.log(N_DRAW[1] + 1), count)
    n = np.clip(np.floor(np.exp(ln_n)).astype(np.int64), N_DRAW[0], N_DRAW[1])
    x = np.exp(rng.uniform(math.log(X_DRAW[0]), math.log(X_DRAW[1]), count))
    return r, n, x


def run_inequality_suite(seed, count):
    """Evaluate the scalar inequalities on ``count`` seeded draws."""
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise DomainError(f"count must be an integer >= 1, got {count!r}")
    rs, ns, xs = draw_inequality_samples(seed, int(count))
    report = VerificationReport()
    add = report.checks.append
    for i in range(int(count)):
        r, n, x = float(rs[i]), int(ns[i]), float(xs[i])
        pr = {"r": r, "n": n, "draw": i}

        # n/(r-1) < n^r sum_{k>=n} k^-r < 1 + n/(r-1)
        S = hurwitz_zeta_scaled(r, n)
        base = n / (r - 1.0)
        add(_strict("ineq_tail_sum", pr, S, base, 1.0 + base, INEQ_SLACK))

        # e^{-r/n} <= (1+1/n)^{-r} <= e^{-r/(n+1)}, compared in log space
        mid = -r * math.log1p(1.0 / n)
        add(_check("ineq_power_vs_exp", pr, mid, -r / n, -r / (n + 1.0),
                   INEQ_SLACK * max(1.0, abs(mid))))

        # r >= n^2: C = (1/(1-e^{-r/n}) - 1) e^{r/n} = 1/(1-e^{-r/n}) <= 2
        rl = r if r >= n * n else float(n * n) + r
        c_obs = 1.0 / -math.expm1(-rl / n)
        add(_check("ineq_largeR_constant", {"r": rl, "n": n, "draw": i}, c_obs, 0.0, 2.0,
                   INEQ_SLACK))

        # 2 < r <= sqrt(n)+1: n/(r(r-2)) >= (r-1)^2/(r(r-2)) > 1
        if n > 1:
            u = (r - R_DRAW[0]) / (R_DRAW[1] - R_DRAW[0])
            rs_ = 2.0 + (0.02 + 0.98 * u) * (math.sqrt(n) - 1.0)
            den = rs_ * (rs_ - 2.0)
            lhs = n / den
            mid2 = (rs_ - 1.0) ** 2 / den
            pq = {"r": rs_, "n": n, "draw": i}
            add(_check("ineq_smallR_scale", pq, lhs, mid2, math.inf,
                       INEQ_SLACK * max(1.0, mid2)))
            add(_strict("ineq_smallR_unit", pq, mid2, 1.0, math.inf, INEQ_SLACK))

        # 0 < 1/(1-e^{-x}) - 1/x < 1
        f = 1.0 / -math.expm1(-x) - 1.0 / x
        add(_strict("ineq_exp_reciprocal", {"x": x, "draw": i}, f, 0.0, 1.0, INEQ_SLACK))
    report.meta = {"suite": "inequalities", "seed": int(seed), "count": int(count),
                   "tolerances": {"slack": INEQ_SLACK}, "version": __version__}
    return report.finalize()


# --- oracle-backed suites ---------------------------------------------------

class OracleCache:
    """Memoizes oracle results per (params, rel_tol) within one run."""

    def __init__(self):
        self._store = {}

    def get(self, params, rel_tol):
        key = (params.r, params.beta, params.n, params.p, rel_tol)
        if key not in self._store:
            try:
                self._store[key] = exact_deviation(params, rel_tol)
            except WeylNagyError as exc:
                self._store[key] = exc
        return self._store[key]


def _errored(name, params, exc):
    return {"name": name, "params": _params_dict(params), "observed": None,
            "bound_lo": None, "bound_hi": None, "pass": False,
            "flag": f"errored: {type(exc).__name__}: {exc}"}


def bracket_checks(params, dev):
    """Zeta-form, coarse linear and sharp linear brackets for one oracle result."""
    pd = _params_dict(params)
    v, cert = dev.value, dev.half_width
    out = []
    lo, hi, _ = zeta_form_bracket(params)
    out.append(_check("bracket_zeta", pd, v, lo, hi, cert + BRACKET_ROUNDING * hi))
    for name, est in (("bracket_thm1", estimate_thm1(params)),
                      ("bracket_thm1_sharp", estimate_thm1_sharp(params))):
        half = 0.5 * (est.bracket_hi - est.bracket_lo)
        flag = "vacuous" if half >= est.principal else None
        slack = cert + BRACKET_ROUNDING * max(abs(est.bracket_lo), abs(est.bracket_hi))
        out.append(_check(name, pd, v, est.bracket_lo, est.bracket_hi, slack, flag))
    return out


def _require_p(grid, metric):
    if grid.p is not metric:
        raise DomainError(f"grid must use p={metric.value}, got p={grid.p.value}")


def bracket_conformance(grid, rel_tol=DEFAULT_REL_TOL, cache=None):
    """Test every p = 1 oracle value against the three brackets."""
    _require_p(grid, Metric.L1)
    cache = cache or OracleCache()
    report = VerificationReport()
    for params in grid.points():
        if not (params.r > 2.0):
            raise DomainError(f"bracket suites need r > 2, got r={params.r}")
        dev = cache.get(params, rel_tol)
        if isinstance(dev, Exception):
            report.checks.extend(
                _errored(nm, params, dev)
                for nm in ("bracket_zeta", "bracket_thm1", "bracket_thm1_sharp")
            )
            continue
        report.checks.extend(bracket_checks(params, dev))
    report.meta = {"suite": "brackets", "grid": grid.as_dict(),
                   "tolerances": {"rel_tol": rel_tol}, "version": __version__}
    return report.finalize()


def constant_ratio(theorem, params, dev):
    """|oracle - principal| / delta for one grid point (the O(1) stand-in)."""
    if theorem == "thm3_p1":
        principal = thm3_principal(params.r, params.n)
        delta = remainder_scale(params.r, params.n)
    elif theorem == "stechkin_pinf":
        est = estimate_stechkin_pinf(params)
        principal, delta = est.principal, est.delta
    else:
        raise DomainError(f"theorem must be one of {CONSTANT_TAGS}, got {theorem!r}")
    return abs(dev.value - principal) / delta


def _constant_points(grid, theorem, rel_tol, cache):
    _require_p(grid, Metric.L1 if theorem == "thm3_p1" else Metric.LINF)
    cache = cache or OracleCache()
    rows = []
    for params in grid.points():
        dev = cache.get(params, rel_tol)
        rows.append((params, dev))
    return rows


def empirical_uniform_constant(grid, theorem, rel_tol=DEFAULT_REL_TOL, cache=None):
    """max over the grid of |oracle - principal| / delta.

    An oracle failure at any grid point is re-raised.
    """
    if theorem not in CONSTANT_TAGS:
        raise DomainError(f"theorem must be one of {CONSTANT_TAGS}, got {theorem!r}")
    best = 0.0
    for params, dev in _constant_points(grid, theorem, rel_tol, cache):
        if isinstance(dev, Exception):
            raise dev
        best = max(best, constant_ratio(theorem, params, dev))
    return best


def load_baselines(path=None):
    """Baseline constants keyed by preset then theorem tag."""
    if path is None:
        text = resources.files("weylnagy").joinpath("data/baselines.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def constants_suite(preset_grids, baselines, rel_tol=DEFAULT_REL_TOL, cache=None):
    """Measure both constants and compare each with its baseline +-10%.

    Returns ``(report, constants)``.
    """
    cache = cache or OracleCache()
    report = VerificationReport()
    constants = {}
    for theorem, key in (("thm3_p1", "p1"), ("stechkin_pinf", "pinf")):
        grid = preset_grids[key]
        base = baselines.get(theorem)
        try:
            value = empirical_uniform_constant(grid, theorem, rel_tol, cache)
        except WeylNagyError as exc:
            report.checks.append({
                "name": f"constant_{theorem}", "params": {}, "observed": None,
                "bound_lo": None, "bound_hi": None, "pass": False,
                "flag": f"errored: {type(exc).__name__}: {exc}",
            })
            continue
        constants[theorem] = value
        if base is None:
            raise DomainError(f"baseline file has no entry for {theorem}")
        report.checks.append(_check(
            f"constant_{theorem}", {}, value,
            (1.0 - HEADROOM) * base, (1.0 + HEADROOM) * base, 0.0,
        ))
    report.meta = {"suite": "constants", "version": __version__,
                   "tolerances": {"rel_tol": rel_tol, "headroom": HEADROOM}}
    return report.finalize(constants), constants


def measure_baselines(preset, rel_tol=DEFAULT_REL_TOL):
    """Fresh constants for a preset, in the baseline file layout."""
    grids = PRESETS[preset]
    cache = OracleCache()
    return {
        "thm3_p1": empirical_uniform_constant(grids["p1"], "thm3_p1", rel_tol, cache),
        "stechkin_pinf": empirical_uniform_constant(grids["pinf"], "stechkin_pinf", rel_tol, cache),
    }


def run_suite(suite, seed=42, count=1000, preset="smoke", baselines=None,
              rel_tol=DEFAULT_REL_TOL):
    """Run one suite or all of them and merge into a single report."""
    if suite not in ("inequalities", "brackets", "constants", "all"):
        raise DomainError(f"unknown suite {suite!r}")
    if preset not in PRESETS:
        raise DomainError(f"unknown grid preset {preset!r}")
    grids = PRESETS[preset]
    cache = OracleCache()
    merged = VerificationReport()
    constants = {}
    if suite in ("inequalities", "all"):
        merged.checks.extend(run_inequality_suite(seed, count).checks)
    if suite in ("brackets", "all"):
        merged.checks.extend(bracket_conformance(grids["p1"], rel_tol, cache).checks)
    if suite in ("constants", "all"):
        if baselines is None:
            baselines = load_baselines()
        if preset not in baselines:
            raise DomainError(f"baseline file has no entry for preset {preset!r}")
        rep, constants = constants_suite(grids, baselines[preset], rel_tol, cache)
        merged.checks.extend(rep.checks)
    merged.meta = {
        "suite": suite,
        "grid": {"preset": preset, "p1": grids["p1"].as_dict(), "pinf": grids["pinf"].as_dict()},
        "seed": int(seed),
        "count": int(count),
        "tolerances": {"rel_tol": rel_tol, "inequality_slack": INEQ_SLACK, "headroom": HEADROOM},
        "version": __version__,
    }
    return merged.finalize(constants)
