"""Numeric evaluation of H-functions on the positive real axis.

Three routes are provided: residue sums over the left poles, residue sums
over the right poles (convergent or, when ``D > 0``, optimally truncated
asymptotic), and trapezoid quadrature of the Mellin-Barnes integral along a
vertical line.  :func:`eval_auto` picks a route from the derived parameters.

Quadrature data that do not depend on ``z`` (the kernel profile along
candidate lines and the kernel values at the trapezoid nodes) are cached per
parameter tuple, so sweeping many arguments of one instance is cheap.
"""
from __future__ import annotations

import enum
import math
import os
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .hcore import (
    EffectivePole,
    HParams,
    PoleMergeError,
    Side,
    _stream,
    derived_params,
    pole_gap,
    validate,
)
from .specfun import log_gamma

__all__ = [
    "Method",
    "EvalResult",
    "EvalDomainError",
    "NonConvergenceError",
    "ContourError",
    "eval_series_left",
    "eval_series_right",
    "eval_contour",
    "eval_auto",
    "eval_many",
    "leading_term",
    "DEFAULT_TOL",
    "DEFAULT_MAX_TERMS",
    "MAX_NODES",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_TERMS = 1000
MAX_NODES = 20000
_EPS = np.finfo(float).eps
_D_ZERO = 1e-12
_OFFSET = (3.0 - math.sqrt(5.0)) / 2.0


class Method(enum.Enum):
    SeriesLeft = "SeriesLeft"
    SeriesRight = "SeriesRight"
    Contour = "Contour"
    ClosedForm = "ClosedForm"


@dataclass(frozen=True)
class EvalResult:
    value: float
    abs_err_est: float
    method: Method
    terms_or_nodes: int
    asymptotic: bool = False
    imag: float = 0.0
    note: str = ""


class EvalDomainError(ValueError):
    """The requested route is not valid for this instance and argument."""


class NonConvergenceError(ArithmeticError):
    pass


class ContourError(ValueError):
    """No admissible vertical contour (a* <= 0 or unseparated poles)."""


def _check_z(z: float) -> float:
    z = float(z)
    if not (z > 0 and math.isfinite(z)):
        raise EvalDomainError(f"argument must be positive and finite, got {z}")
    return z


# ---------------------------------------------------------------------------
# residue series


def _log_term(pole: EffectivePole, logz: float):
    """(sign, log|term|, relative rounding error) of Res_{s0} kernel(s) z^{-s}."""
    lau = pole.laurent
    shift = pole.location * logz
    base = lau.logabs - shift
    # exp() turns absolute error in the log into relative error in the term
    cond = 16.0 + 2.0 * (lau.scale + abs(shift))
    if pole.order == 1:
        return lau.sign, base, cond * _EPS
    factor = lau.r1 - logz
    if factor == 0.0:
        return 0, -math.inf, 0.0
    cond += (abs(lau.r1) + abs(logz)) / abs(factor)
    return lau.sign * (1 if factor > 0 else -1), base + math.log(abs(factor)), cond * _EPS


def _residue_sum(h: HParams, z: float, side: Side, tol: float, max_terms: int,
                 asymptotic: bool) -> EvalResult:
    stream = _stream(h, side)
    logz = math.log(z)
    outer = 1.0 if side is Side.Left else -1.0
    method = Method.SeriesLeft if side is Side.Left else Method.SeriesRight
    total = 0.0
    abs_total = 0.0
    rounding = 0.0
    small_run = 0
    tail = 0.0
    terms: list[float] = []
    for k in range(max_terms):
        pole = stream.get(k)
        if pole is None:
            # finitely many poles: the sum is exact up to rounding
            err = rounding + 4 * _EPS * abs_total
            return EvalResult(outer * total, err, method, k)
        sign, lmag, rel = _log_term(pole, logz)
        if lmag > 709.0:
            raise NonConvergenceError(f"residue term {k} overflows (log size {lmag:.1f})")
        t = sign * math.exp(lmag)
        if asymptotic:
            terms.append(t)
            mags = np.abs(terms)
            kmin = int(np.argmin(mags))
            if k - kmin >= 6 and np.all(mags[kmin + 1 :] > mags[kmin]):
                s = math.fsum(terms[:kmin])
                err = mags[kmin] + rounding + 4 * _EPS * float(np.sum(mags[:kmin]))
                return EvalResult(outer * s, err, method, kmin, asymptotic=True)
        total += t
        abs_total += abs(t)
        rounding += abs(t) * rel
        if t == 0.0:
            continue
        if abs(t) < tol * abs(total):
            small_run += 1
            tail += abs(t)
            if small_run >= 3:
                err = tail + rounding + 4 * _EPS * abs_total
                return EvalResult(outer * total, err, method, k + 1, asymptotic=asymptotic)
        else:
            small_run = 0
            tail = 0.0
    if asymptotic and terms:
        mags = np.abs(terms)
        kmin = int(np.argmin(mags))
        s = math.fsum(terms[:kmin])
        return EvalResult(outer * s, float(mags[kmin]) + rounding, method, kmin, asymptotic=True)
    raise NonConvergenceError(f"{method.value} did not converge in {max_terms} terms")


def eval_series_left(h: HParams, z: float, tol: float = DEFAULT_TOL,
                     max_terms: int = DEFAULT_MAX_TERMS) -> EvalResult:
    """Sum of residues at the left poles; needs D > 0, or D = 0 and z < delta."""
    z = _check_z(z)
    der = derived_params(h)
    if der.big_d < -_D_ZERO or (abs(der.big_d) <= _D_ZERO and z >= der.delta):
        raise EvalDomainError(f"left series diverges (D={der.big_d:g}, z={z:g}, delta={der.delta:g})")
    return _residue_sum(h, z, Side.Left, tol, max_terms, asymptotic=False)


def eval_series_right(h: HParams, z: float, tol: float = DEFAULT_TOL,
                      max_terms: int = DEFAULT_MAX_TERMS) -> EvalResult:
    """Minus the sum of residues at the right poles.

    For D > 0 the series diverges and is used as an asymptotic expansion
    truncated at its smallest term (``asymptotic`` flag set).  With no right
    poles at all the function is beyond all algebraic orders at infinity; the
    result is then zero with an unknown (infinite) error estimate.
    """
    z = _check_z(z)
    der = derived_params(h)
    if abs(der.big_d) <= _D_ZERO and z <= der.delta:
        raise EvalDomainError(f"right series diverges for z <= delta={der.delta:g}")
    asym = der.big_d > _D_ZERO
    if _stream(h, Side.Right).get(0) is None:
        return EvalResult(0.0, math.inf, Method.SeriesRight, 0, asymptotic=True,
                          note="no right poles: exponential decay regime")
    return _residue_sum(h, z, Side.Right, tol, max_terms, asymptotic=asym)


def leading_term(h: HParams, side: Side = Side.Left):
    """Dominant residue contribution ``coeff * z**exponent`` (times log z if ``has_log``).

    On the left this describes z -> 0+, on the right z -> infinity.  For a
    double pole ``coeff`` is the coefficient of the ``z**exponent * log z`` term.
    """
    pole = _stream(h, side).get(0)
    if pole is None:
        raise EvalDomainError(f"no {side.value} poles")
    lau = pole.laurent
    c0 = lau.sign * math.exp(lau.logabs)
    outer = 1.0 if side is Side.Left else -1.0
    if pole.order == 1:
        return outer * c0, -pole.location, False
    return -outer * c0, -pole.location, True


# ---------------------------------------------------------------------------
# contour quadrature


class _Line:
    """log-kernel profile along Re s = gamma on a sinh-spaced grid in rho."""

    __slots__ = ("gamma", "rho", "logabs", "log_j")

    def __init__(self, h: HParams, gamma: float, a_star: float, width: float):
        self.gamma = gamma
        w = max(min(width, 1.0), 1e-3) * 0.5
        rho_max = 20.0 + 100.0 / (math.pi * a_star / 2.0)
        while True:
            u = np.linspace(0.0, math.asinh(rho_max / w), 240)
            rho = w * np.sinh(u)
            la = _log_abs_line(h, gamma, rho)
            peak = np.max(la)
            if la[-1] < peak - 80.0 and la[-1] < la[-2] or rho_max > 1e7:
                break
            rho_max *= 4.0
        self.rho = rho
        self.logabs = la
        jac = np.log(w * np.cosh(u))
        du = u[1] - u[0]
        # both half lines; |K(conj s)| = |K(s)|
        self.log_j = float(logsumexp(la + jac)) + math.log(2.0 * du)


def _log_abs_line(h: HParams, gamma: float, rho: np.ndarray) -> np.ndarray:
    return _log_kernel(h, gamma + 1j * rho).real


class _ContourPlan:
    """Per-instance quadrature state, independent of the argument z."""

    def __init__(self, h: HParams):
        der = derived_params(h)
        if der.a_star <= 0:
            raise ContourError(f"contour integral diverges: a*={der.a_star:g} <= 0")
        try:
            lo, hi = pole_gap(h)
        except PoleMergeError as exc:
            raise ContourError(str(exc)) from exc
        if not lo < hi:
            raise ContourError("; ".join(validate(h)) or "poles are not separated")
        self.h = h
        self.a_star = der.a_star
        self.lo, self.hi = lo, hi
        self.lock = threading.Lock()
        self.lines: dict[int, _Line] = {}
        self.nodes: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        if math.isfinite(lo) and math.isfinite(hi):
            self.kind = "finite"
            self.n_grid = 256
        else:
            self.kind = "half" if (math.isfinite(lo) or math.isfinite(hi)) else "free"
            self.n_grid = 512

    # gamma grid: index -> abscissa.  The irrational offset keeps grid lines
    # off removable singularities, which sit at rational points.
    def gamma_of(self, i: int) -> float:
        x = i + _OFFSET
        if self.kind == "finite":
            return self.lo + (self.hi - self.lo) * x / self.n_grid
        # geometric spacing away from the finite pole, out to ~ e^8
        v = -6.0 + 14.0 * x / self.n_grid
        if self.kind == "half":
            if math.isfinite(self.lo):
                return self.lo + math.exp(v)
            return self.hi - math.exp(v)
        return math.sinh((x - self.n_grid / 2) / 16.0)

    def index_range(self):
        return 0, self.n_grid - 1

    def dist_to_poles(self, g: float) -> float:
        return min(g - self.lo, self.hi - g)

    def line(self, i: int) -> _Line:
        ln = self.lines.get(i)
        if ln is None:
            g = self.gamma_of(i)
            ln = _Line(self.h, g, self.a_star, self.dist_to_poles(g))
            with self.lock:
                self.lines[i] = ln
        return ln

    def log_m(self, i: int, logz: float) -> float:
        """log of the L1 norm of the integrand on line i (without 1/2pi)."""
        ln = self.line(i)
        return ln.log_j - ln.gamma * logz

    def search_range(self):
        """Indices whose line keeps a safe distance from the poles.

        Without the margin, a pole with a tiny residue lets the L1 norm
        pull the line right next to it, where the step must become tiny.
        """
        if self.kind == "finite":
            cut = self.n_grid // 10
            return cut, self.n_grid - 1 - cut
        if self.kind == "half":
            # exp(v) >= 0.1
            first = int(math.ceil((math.log(0.1) + 6.0) / 14.0 * self.n_grid - _OFFSET))
            return first, self.n_grid - 1
        return 0, self.n_grid - 1

    def best_index(self, logz: float) -> int:
        a, b = self.search_range()
        # ternary search on the (near-convex) function, then local polish
        lo, hi = a, b
        while hi - lo > 6:
            m1 = lo + (hi - lo) // 3
            m2 = hi - (hi - lo) // 3
            if self.log_m(m1, logz) <= self.log_m(m2, logz):
                hi = m2
            else:
                lo = m1
        cand = range(max(a, lo - 2), min(b, hi + 2) + 1)
        return min(cand, key=lambda j: self.log_m(j, logz))

    def node_values(self, i: int, level: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        """log K at gamma_i + i k h_level for k = 0..count-1 and k = 0..-(count-1)."""
        key = (i, level)
        have = self.nodes.get(key)
        if have is not None and have[0].size >= count:
            return have[0][:count], have[1][:count]
        hstep = _step(level)
        g = self.gamma_of(i)
        rho = hstep * np.arange(count)
        up = _log_kernel(self.h, g + 1j * rho)
        down = _log_kernel(self.h, g - 1j * rho)
        with self.lock:
            self.nodes[key] = (up, down)
        return up, down


def _step(level: int) -> float:
    return 2.0 ** (-level / 2.0)


def _log_kernel(h: HParams, s: np.ndarray) -> np.ndarray:
    """Complex log of the kernel; -inf where a denominator gamma has a pole."""
    f = h.factors
    total = np.zeros(s.shape, dtype=complex)
    for c, k in f.numerators:
        total += log_gamma(c + k * s)
    zero = np.zeros(s.shape, dtype=bool)
    for c, k in f.denominators:
        w = c + k * s
        n = np.round(w.real)
        hit = (n <= 0) & (np.abs(w - n) < 1e-13)
        zero |= hit
        total -= log_gamma(np.where(hit, 0.5, w))
    return np.where(zero, -np.inf + 0j, total)


_PLANS: "OrderedDict[HParams, _ContourPlan]" = OrderedDict()
_PLANS_LOCK = threading.Lock()


def _plan(h: HParams) -> _ContourPlan:
    with _PLANS_LOCK:
        p = _PLANS.get(h)
        if p is not None:
            _PLANS.move_to_end(h)
            return p
    p = _ContourPlan(h)
    with _PLANS_LOCK:
        _PLANS[h] = p
        while len(_PLANS) > 48:
            _PLANS.popitem(last=False)
    return p


def _aliasing(plan: _ContourPlan, i: int, logz: float, hstep: float) -> float:
    """Trapezoid aliasing bound from shifted lines on both sides (log scale, absolute)."""
    g = plan.gamma_of(i)
    a, b = plan.index_range()
    worst = -math.inf
    for direction in (-1, 1):
        best = math.inf
        j = i
        stride = 1
        while True:
            j = j + direction * stride
            if j < a or j > b:
                break
            eta = abs(plan.gamma_of(j) - g)
            ratio = 2.0 * math.pi * eta / hstep
            lm = plan.log_m(j, logz)
            # 2 M / (e^{2 pi eta / h} - 1) / (2 pi)
            val = math.log(2.0) + lm - math.log(2 * math.pi) - (ratio + math.log1p(-math.exp(-ratio)))
            best = min(best, val)
            stride += max(1, stride // 2)
        bounded = math.isfinite(plan.lo if direction < 0 else plan.hi)
        if best < math.inf or bounded:
            worst = max(worst, best)
    return worst


def eval_contour(h: HParams, z: float, tol: float = DEFAULT_TOL) -> EvalResult:
    """Trapezoid quadrature of (1/2pi) int K(gamma + i rho) z^{-gamma - i rho} d rho."""
    z = _check_z(z)
    plan = _plan(h)
    logz = math.log(z)
    i = plan.best_index(logz)
    g = plan.gamma_of(i)
    ln = plan.line(i)
    log_i0 = plan.log_m(i, logz) - math.log(2 * math.pi)
    log_eps = math.log(tol) + log_i0

    # truncation height: tail integral of e^{-pi a* rho / 2} decay below eps/4
    lf = ln.logabs - g * logz
    decay = math.pi * plan.a_star / 2.0
    tail_log = lf - math.log(decay) - math.log(2 * math.pi) + math.log(2.0)
    over = np.nonzero(tail_log > log_eps - math.log(4.0))[0]
    height = float(ln.rho[over[-1] + 1]) if over.size and over[-1] + 1 < ln.rho.size else float(ln.rho[-1])
    height = max(height, 1.0)

    # step: halve until the aliasing bound drops below eps/4
    level = 0
    while _aliasing(plan, i, logz, _step(level)) > log_eps - math.log(4.0) and level < 60:
        level += 1
    count = int(math.ceil(height / _step(level))) + 1
    capped = False
    while 2 * count - 1 > MAX_NODES:
        level -= 1
        count = int(math.ceil(height / _step(level))) + 1
        capped = True
    hstep = _step(level)
    up, down = plan.node_values(i, level, count)
    rho = hstep * np.arange(count)
    f_up = np.exp(up - (g + 1j * rho) * logz)
    f_down = np.exp(down - (g - 1j * rho) * logz)
    total = (np.sum(f_up) + np.sum(f_down[1:])) * hstep / (2 * math.pi)

    alias = math.exp(_aliasing(plan, i, logz, hstep))
    trunc = math.exp(min(700.0, float(np.interp(height, ln.rho, tail_log))))
    rounding = 16 * _EPS * (np.sum(np.abs(f_up)) + np.sum(np.abs(f_down))) * hstep / (2 * math.pi)
    err = alias + trunc + float(rounding)
    note = "node cap reached; error estimate exceeds tolerance" if capped else ""
    return EvalResult(float(total.real), err, Method.Contour, 2 * count - 1,
                      imag=float(total.imag), note=note)


# ---------------------------------------------------------------------------
# strategy


def _acceptable(res: EvalResult, tol: float) -> bool:
    return res.abs_err_est <= 1e3 * tol * max(abs(res.value), 1e-300)


def eval_auto(h: HParams, z: float, tol: float = DEFAULT_TOL,
              max_terms: int = DEFAULT_MAX_TERMS) -> EvalResult:
    """Evaluate by the route suited to (D, z); fall back to the contour when a series struggles."""
    z = _check_z(z)
    der = derived_params(h)
    big_d = 0.0 if abs(der.big_d) <= _D_ZERO else der.big_d
    if big_d > 0 and z <= 1:
        route = Method.SeriesLeft
    elif big_d < 0 and z >= 1:
        route = Method.SeriesRight
    elif big_d == 0 and z < 0.9 * der.delta:
        route = Method.SeriesLeft
    elif big_d == 0 and z > 1.1 * der.delta:
        route = Method.SeriesRight
    else:
        route = Method.Contour

    series_res = None
    if route is not Method.Contour:
        fn = eval_series_left if route is Method.SeriesLeft else eval_series_right
        try:
            series_res = fn(h, z, tol, max_terms)
        except (NonConvergenceError, FloatingPointError):
            series_res = None
        if series_res is not None and _acceptable(series_res, tol):
            return series_res

    try:
        cont = eval_contour(h, z, tol)
    except ContourError:
        if series_res is not None:
            return series_res
        # a* <= 0: only a convergent series can help
        if big_d > 0:
            return eval_series_left(h, z, tol, max_terms)
        if big_d < 0:
            return eval_series_right(h, z, tol, max_terms)
        raise
    if series_res is not None and series_res.abs_err_est < cont.abs_err_est:
        return series_res
    if route is Method.Contour and not _acceptable(cont, tol) and big_d != 0:
        # the convergent series may still do better (e.g. huge z with D > 0)
        fn = eval_series_left if big_d > 0 else eval_series_right
        try:
            alt = fn(h, z, tol, max_terms)
            if alt.abs_err_est < cont.abs_err_est:
                return alt
        except (NonConvergenceError, EvalDomainError):
            pass
    return cont


def default_threads() -> int:
    env = os.environ.get("FOXH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def eval_many(h: HParams, zs: Sequence[float], tol: float = DEFAULT_TOL,
              threads: int | None = None) -> list[EvalResult]:
    """eval_auto over many arguments; output order follows input order."""
    threads = threads or default_threads()
    if threads <= 1 or len(zs) < 2:
        return [eval_auto(h, z, tol) for z in zs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda z: eval_auto(h, z, tol), zs))
