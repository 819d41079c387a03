"""Mittag-Leffler E_alpha(-x) and the Mainardi function M_nu, computed directly.

These evaluators do not depend on the H-function residue machinery except as
a last-resort route, so they serve as independent oracles for it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .hcore import HParams
from .specfun import rgamma

__all__ = ["MLQuery", "ml_neg", "mainardi", "ml_instance", "mainardi_instance", "ml_route"]

_TAYLOR_MAX_TERM = 1e3
_ASYM_SMALLEST = 1e-12


@dataclass(frozen=True)
class MLQuery:
    alpha: float
    x: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.x >= 0:
            raise ValueError(f"x must be >= 0, got {self.x}")


@lru_cache(maxsize=64)
def ml_instance(alpha: float) -> HParams:
    """E_alpha(-z) = H^{1,1}_{1,2}(z | (0,1) ; (0,1), (0,alpha))."""
    return HParams(1, 1, [(0, 1)], [(0, 1), (0, alpha)])


@lru_cache(maxsize=64)
def mainardi_instance(nu: float) -> HParams:
    """M_nu(x) = H^{1,0}_{1,1}(x | (1-nu, nu) ; (0,1))."""
    return HParams(1, 0, [(1 - nu, nu)], [(0, 1)])


def _taylor(alpha: float, x: float):
    """Power series, or None when its largest term makes cancellation too costly."""
    logx = math.log(x)
    terms = []
    k = 0
    peak = -math.inf
    while True:
        lmag = k * logx - math.lgamma(alpha * k + 1)
        peak = max(peak, lmag)
        if peak > math.log(_TAYLOR_MAX_TERM):
            return None
        terms.append((-1) ** k * math.exp(lmag))
        # past the peak and negligible relative to anything that survives
        if k > 2 and lmag < peak - 40.0 and lmag < math.log(1e-17):
            break
        k += 1
        if k > 5000:
            return None
    return math.fsum(terms)


def _asymptotic(alpha: float, x: float):
    """Algebraic expansion at infinity, optimally truncated; None if not accurate enough."""
    logx = math.log(x)
    total = []
    best = math.inf
    for k in range(1, 400):
        r = rgamma(1 - alpha * k)
        if r == 0.0:
            continue
        lmag = -k * logx + math.log(abs(r))
        mag = math.exp(lmag) if lmag > -745 else 0.0
        if mag > best:
            break
        best = mag
        # -sum (-x)^{-k} / Gamma(1 - alpha k)
        total.append(-((-1) ** k) * math.copysign(mag, r))
        if mag < 1e-18:
            break
    if best > _ASYM_SMALLEST:
        return None
    value = math.fsum(total)
    if alpha > 1:
        # damped oscillation from the two exponentially small saddle contributions
        w = x ** (1.0 / alpha)
        ang = math.pi / alpha
        value += (2.0 / alpha) * math.exp(w * math.cos(ang)) * math.cos(w * math.sin(ang))
    return value


def ml_route(alpha: float, x: float) -> str:
    """Name of the route :func:`ml_neg` takes: exact, taylor, asymptotic or contour."""
    MLQuery(alpha, x)
    if alpha == 1 or x == 0:
        return "exact"
    if _taylor(alpha, x) is not None:
        return "taylor"
    if _asymptotic(alpha, x) is not None:
        return "asymptotic"
    return "contour"


def ml_neg(alpha: float, x: float) -> float:
    """E_alpha(-x) for alpha in (0, 2) and x >= 0.

    Taylor series while its terms stay below 1e3 in size, the optimally
    truncated asymptotic expansion once its smallest term is below 1e-12,
    and quadrature of the Mellin-Barnes integral in between.
    """
    MLQuery(alpha, x)
    if x == 0:
        return 1.0
    if alpha == 1:
        return math.exp(-x)
    val = _taylor(alpha, x)
    if val is not None:
        return val
    val = _asymptotic(alpha, x)
    if val is not None:
        return val
    from .heval import eval_contour

    return eval_contour(ml_instance(alpha), x, 1e-13).value


def mainardi(nu: float, x: float) -> float:
    """Mainardi function M_nu(x) = sum_k (-x)^k / (k! Gamma(1 - nu - nu k))."""
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if not x >= 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0:
        return rgamma(1 - nu)
    logx = math.log(x)
    terms = []
    biggest = 0.0
    quiet = 0
    converged = False
    for k in range(0, 4000):
        g = 1 - nu * (k + 1)
        n = round(g)
        if n <= 0 and abs(g - n) < 1e-12:
            continue  # 1/Gamma vanishes exactly here
        lmag = k * logx - math.lgamma(k + 1) + math.log(abs(rgamma(g)))
        if lmag > 700:
            break
        t = (-1) ** k * math.copysign(math.exp(lmag), rgamma(g))
        terms.append(t)
        biggest = max(biggest, abs(t))
        quiet = quiet + 1 if abs(t) < 1e-18 * biggest else 0
        if quiet >= 5:
            converged = True
            break
    # rounding in the largest terms bounds the attainable absolute accuracy
    if converged and biggest * 1e-15 <= 1e-11:
        return math.fsum(terms)
    from .heval import eval_contour

    return eval_contour(mainardi_instance(nu), x, 1e-13).value
