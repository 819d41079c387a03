"""Verification suites shared by the ``verify`` command and the acceptance tests.

Every suite returns a :class:`SuiteResult` holding one :class:`Check` per
comparison, so callers can print tables, emit CSV or assert.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .hcore import HParams, derived_params
from .heval import (
    EvalDomainError,
    NonConvergenceError,
    eval_contour,
    eval_series_left,
    eval_series_right,
)
from .hrewrite import (
    HExpr,
    cancel_first_lower_last_upper,
    cancel_first_upper_last_lower,
    evaluate,
    hankel_map,
    laplace_map,
    power_shift,
    reflect,
    rescale,
    times,
)
from .kernel import (
    KernelPoint,
    asymptotic_regime,
    Regime,
    fourier_check,
    fundamental_instance,
    g_elementary,
    g_eval,
    g_heat,
    radial_mass,
    subordination_eval,
)
from .mittag import ml_instance, ml_neg
from .positivity import full_report, psi_tilde, _psi_tilde_params

__all__ = ["Check", "SuiteResult", "SUITES", "run_suite", "GRID", "FOURIER_PAIRS"]

GRID = list(itertools.product((0.5, 1.0, 1.3, 1.7), (0.6, 1.0, 1.5, 2.0), (1, 2, 3)))
FOURIER_PAIRS = [(0.5, 1.0), (0.8, 2.0), (1.5, 1.8), (1.5, 1.2), (1.7, 0.6), (1.3, 2.0)]


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    def add(self, name: str, measured: float, threshold: float, detail: str = "",
            passed: bool | None = None) -> None:
        ok = measured <= threshold if passed is None else passed
        self.checks.append(Check(name, bool(ok), float(measured), float(threshold), detail))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------


def closed_forms() -> SuiteResult:
    """H-function route against the heat kernel and the elementary d = 1 kernel."""
    out = SuiteResult("closed-forms")
    radii = np.geomspace(1e-3, 1e3, 12)
    for d in (1, 2, 3):
        worst = 0.0
        for r in radii:
            h = g_eval(KernelPoint(1.0, 2.0, d, 1.0, float(r)), route="h").value
            worst = max(worst, _rel(h, g_heat(d, 1.0, float(r))))
        out.add(f"heat d={d}", worst, 1e-8)
    for b in (0.5, 1.0, 1.5):
        worst = 0.0
        for r in radii:
            h = g_eval(KernelPoint(b, b, 1, 1.0, float(r)), route="h").value
            worst = max(worst, _rel(h, g_elementary(b, 1.0, float(r))))
        out.add(f"elementary beta={b:g}", worst, 1e-8)
    return out


def cross_method(n: int = 100, seed: int = 20240611) -> SuiteResult:
    """Convergent residue series against contour quadrature on random kernel instances."""
    out = SuiteResult("cross-method")
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    done = 0
    while done < n:
        alpha = float(np.round(rng.uniform(0.2, 1.9), 3))
        beta = float(np.round(rng.uniform(0.3, 2.0), 3))
        d = int(rng.integers(1, 4))
        z = float(10 ** rng.uniform(-3, 1))
        h = fundamental_instance(alpha, beta, d)
        der = derived_params(h)
        if abs(der.big_d) < 1e-12 and abs(z / der.delta - 1) < 0.2:
            continue
        fn = eval_series_left if der.big_d > 0 or (der.big_d == 0 and z < der.delta) else eval_series_right
        try:
            s = fn(h, z, 1e-12, 2000)
        except (NonConvergenceError, EvalDomainError):
            # only convergent series take part in the comparison
            continue
        if s.asymptotic:
            continue
        c = eval_contour(h, z, 1e-12)
        diff = abs(s.value - c.value)
        bound = max(1e-8, 10 * (s.abs_err_est + c.abs_err_est))
        worst_ratio = max(worst_ratio, diff / bound)
        out.add(f"alpha={alpha:g} beta={beta:g} d={d} z={z:.4g}", diff, bound,
                f"series={s.value:.17g} contour={c.value:.17g}")
        done += 1
    return out


def rewrite_chains() -> SuiteResult:
    out = SuiteResult("rewrite")
    # beta = 2: Gamma(-s) cancels, leaving H^{20}_{12}
    for alpha, d in ((1.0, 1), (0.5, 3), (1.5, 2)):
        e = HExpr(1, 0, fundamental_instance(alpha, 2.0, d), Fraction(1, 4), 2)
        red = cancel_first_upper_last_lower(e)
        shape_ok = (red.h.m, red.h.n, red.h.p, red.h.q) == (2, 0, 1, 2)
        worst = 0.0
        for r in (0.2, 0.7, 1.0, 2.0, 4.0):
            ref = g_heat(d, 1.0, r) * math.pi ** (d / 2) * r**d if alpha == 1 else evaluate(e, r)[0]
            worst = max(worst, _rel(evaluate(red, r)[0], ref))
        out.add(f"beta=2 reduction alpha={alpha:g} d={d}", worst, 1e-8, passed=shape_ok and worst <= 1e-8)

    # radial Fourier transform ends at the Mittag-Leffler instance with t^{+alpha}
    for alpha, beta, d, t in ((0.7, 1.3, 3, 1.0), (1.5, 1.2, 1, 2.0)):
        e0 = HExpr(math.pi ** (-d / 2), 0, fundamental_instance(alpha, beta, d),
                   2 ** (-beta) * t ** (-alpha), beta)
        f = hankel_map(e0, Fraction(-d, 2), Fraction(d, 2) - 1, beta)
        f = times(f, 1, 1)
        f = reflect(cancel_first_upper_last_lower(cancel_first_lower_last_upper(f)))
        shape_ok = f.h == ml_instance(alpha) and abs(float(f.arg_coeff) - t**alpha) < 1e-12 * t**alpha \
            and f.arg_power == Fraction(beta) and f.power == 0 \
            and abs(float(f.const) * (2 * math.pi) ** (d / 2) - 1) < 1e-12
        worst = 0.0
        for xi in (0.3, 0.7, 1.0, 2.0, 5.0):
            val = evaluate(f, xi)[0] * (2 * math.pi) ** (d / 2)
            worst = max(worst, abs(val - ml_neg(alpha, xi**beta * t**alpha)))
        out.add(f"Fourier chain alpha={alpha:g} beta={beta:g} d={d} t={t:g}", worst, 1e-8,
                passed=shape_ok and worst <= 1e-8)

    # Laplace transform of psi ends at the H^{31}_{24} form in p^{2 alpha/beta} / 4
    for alpha, beta, d in ((1.5, 1.2, 2), (0.7, 2.0, 1)):
        a, b = Fraction(alpha), Fraction(beta)
        psi_h = HParams(1, 2,
                        [(1 - Fraction(d, 2) - b / (2 * a), b / (2 * a)), (-1 / a, 1 / a), (-b / (2 * a), b / (2 * a))],
                        [(-1 / a, 1 / a), (-1, 1)])
        psi = HExpr(2 ** (beta / alpha + 1) / (beta * math.gamma(d / 2)), 0, psi_h, 2 ** (beta / alpha), 1)
        lap = rescale(power_shift(reflect(laplace_map(psi)), -1), 2 * a / b)
        target = _psi_tilde_params(alpha, beta, d, False)
        const = 4 * alpha / (beta**2 * math.gamma(d / 2))
        shape_ok = lap.h == target and abs(float(lap.const) / const - 1) < 1e-12 \
            and abs(float(lap.arg_coeff) - 0.25) < 1e-12 and lap.arg_power == 2 * a / b and lap.power == 0
        worst = 0.0
        for p in (0.2, 0.5, 1.0, 2.0, 5.0):
            worst = max(worst, _rel(evaluate(lap, p)[0], psi_tilde(alpha, beta, d, p)))
        out.add(f"Laplace chain alpha={alpha:g} beta={beta:g} d={d}", worst, 1e-8,
                passed=shape_ok and worst <= 1e-8)
    return out


def positivity_grid(grid=None) -> SuiteResult:
    out = SuiteResult("positivity-grid")
    for alpha, beta, d in grid or GRID:
        rep = full_report(alpha, beta, d)
        detail = (f"{rep.classification} residue={rep.residue_sign} cm={rep.cm_first_violation_order} "
                  f"scan_min={rep.scan_min_value:.3g}@{rep.scan_min_location:.3g}")
        if rep.problems:
            detail += " INCONSISTENT: " + "; ".join(rep.problems)
        out.add(f"alpha={alpha:g} beta={beta:g} d={d}", 0.0 if rep.consistent else 1.0, 0.0,
                detail, passed=rep.consistent)
    return out


def mass(grid=None) -> SuiteResult:
    out = SuiteResult("mass")
    for alpha, beta, d in grid or GRID:
        m = radial_mass(alpha, beta, d, 1.0)
        out.add(f"alpha={alpha:g} beta={beta:g} d={d}", abs(m - 1), 1e-5, f"mass={m:.17g}")
    return out


def fourier(pairs=None) -> SuiteResult:
    out = SuiteResult("fourier")
    for alpha, beta in pairs or FOURIER_PAIRS:
        for d in (1, 3):
            worst = 0.0
            for xi in (0.5, 1.0, 2.0, 5.0):
                lhs, rhs = fourier_check(alpha, beta, d, 1.0, xi)
                worst = max(worst, abs(lhs - rhs))
            out.add(f"alpha={alpha:g} beta={beta:g} d={d}", worst, 1e-4)
    return out


def _residue_small_r(alpha, beta, d) -> float:
    """Leading G(t=1, r -> 0) from the residue at s = -d/beta (valid for alpha = 1 or beta > d)."""
    if alpha == 1:
        ratio = 1.0  # Gamma(1 - d/beta) / Gamma(1 - alpha d/beta)
    else:
        ratio = math.gamma(1 - d / beta) / math.gamma(1 - alpha * d / beta)
    return math.pi ** (-d / 2) * 2 ** (1 - d) * ratio * math.gamma(d / beta) / (beta * math.gamma(d / 2))


def asymptotics() -> SuiteResult:
    out = SuiteResult("asymptotics")
    radii = np.geomspace(1e2, 1e4, 15)
    for alpha, beta, d in ((0.5, 0.6, 1), (1.5, 1.2, 1), (1.7, 1.5, 3), (1.3, 1.0, 2), (0.8, 1.8, 2)):
        g = [abs(g_eval(KernelPoint(alpha, beta, d, 1.0, float(r))).value) for r in radii]
        slope = float(np.polyfit(np.log(radii), np.log(g), 1)[0])
        out.add(f"tail slope alpha={alpha:g} beta={beta:g} d={d}", abs(slope + d + beta), 0.05,
                f"slope={slope:.6g} expected={-(d + beta):g}")
    for alpha, beta, d in ((0.5, 1.5, 1), (1.5, 1.8, 1), (1.0, 0.6, 1), (1.0, 1.0, 3), (1.3, 2.0, 1)):
        p = KernelPoint(alpha, beta, d, 1.0, 1e-4)
        if asymptotic_regime(p).regime is not Regime.SmallR_Power:
            out.add(f"small-R alpha={alpha:g} beta={beta:g} d={d}", 1.0, 0.0, "not SmallR_Power", passed=False)
            continue
        ratio = g_eval(p).value / _residue_small_r(alpha, beta, d)
        out.add(f"small-R ratio alpha={alpha:g} beta={beta:g} d={d}", abs(ratio - 1), 0.02, f"ratio={ratio:.8g}")
    for alpha in (0.3, 0.6, 0.9, 1.5, 1.8):
        x = 1e4
        v = x * math.gamma(1 - alpha) * ml_neg(alpha, x)
        out.add(f"Mittag-Leffler tail alpha={alpha:g}", abs(v - 1), 0.01, f"x Gamma(1-a) E={v:.8g}")
    return out


def subordination() -> SuiteResult:
    out = SuiteResult("subordination")
    for alpha, beta in ((1.2, 1.6), (1.5, 2.0)):
        for x in (0.3, 1.0, 3.0):
            s = subordination_eval(alpha, beta, x)
            g = g_eval(KernelPoint(alpha, beta, 1, 1.0, x)).value
            out.add(f"alpha={alpha:g} beta={beta:g} x={x:g}", abs(s - g), 1e-5, f"conv={s:.17g} G={g:.17g}")
    return out


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "closed-forms": closed_forms,
    "cross-method": cross_method,
    "rewrite": rewrite_chains,
    "fourier": fourier,
    "mass": mass,
    "asymptotics": asymptotics,
    "subordination": subordination,
    "positivity-grid": positivity_grid,
}


def run_suite(name: str) -> list[SuiteResult]:
    names = list(SUITES) if name == "all" else [name]
    results = []
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
        t0 = time.perf_counter()
        res = SUITES[n]()
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
