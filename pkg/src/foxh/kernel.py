"""Fundamental solution G_{alpha,beta,d}(t, r) of the space-time fractional diffusion equation.

G(t, r) = pi^{-d/2} r^{-d} H^{21}_{23}(2^{-beta} t^{-alpha} r^beta) with the
parameter tuple built by :func:`fundamental_instance`.  Besides the general
evaluator this module carries the closed forms it reduces to, the scaling
identity, radial normalization, the radial Fourier identity, the small/large R
regime split and the subordination representation for d = 1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from .heval import DEFAULT_TOL, EvalResult, Method, eval_auto, leading_term
from .hcore import GammaPair, HParams, Side, as_fraction
from .hrewrite import cancel_first_upper_last_lower
from .mittag import mainardi, ml_neg
from .specfun import bessel_j

__all__ = [
    "KernelPoint",
    "KernelRangeError",
    "QuadratureError",
    "Regime",
    "AsymptoticRegime",
    "fundamental_instance",
    "beta2_instance",
    "g_eval",
    "g_heat",
    "g_elementary",
    "scaling_check",
    "radial_mass",
    "fourier_check",
    "asymptotic_regime",
    "small_r_coefficient",
    "subordination_eval",
]

_LOG_PI = math.log(math.pi)
_LOG2 = math.log(2.0)


class KernelRangeError(ValueError):
    """Parameters outside the admissible ranges."""


class QuadratureError(ArithmeticError):
    """A quadrature missed its error target."""


@dataclass(frozen=True)
class KernelPoint:
    alpha: float
    beta: float
    d: int
    t: float
    r: float

    def __post_init__(self):
        _check_params(self.alpha, self.beta, self.d)
        if not (self.t > 0 and math.isfinite(self.t)):
            raise KernelRangeError(f"t must be positive, got {self.t}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise KernelRangeError(f"r must be positive, got {self.r}")

    @property
    def big_r(self) -> float:
        """Self-similar variable R = r^beta t^-alpha."""
        return math.exp(self.beta * math.log(self.r) - self.alpha * math.log(self.t))

    @property
    def z(self) -> float:
        """H-function argument 2^-beta R."""
        return math.exp(self.beta * (math.log(self.r) - _LOG2) - self.alpha * math.log(self.t))


def _check_params(alpha, beta, d) -> None:
    if not 0 < alpha < 2:
        raise KernelRangeError(f"alpha must lie in (0, 2), got {alpha}")
    if not 0 < beta <= 2:
        raise KernelRangeError(f"beta must lie in (0, 2], got {beta}")
    if int(d) != d or d < 1:
        raise KernelRangeError(f"d must be a positive integer, got {d}")


@lru_cache(maxsize=128)
def fundamental_instance(alpha: float, beta: float, d: int) -> HParams:
    a, b = as_fraction(alpha), as_fraction(beta)
    return HParams(
        2, 1,
        [GammaPair(1, 1), GammaPair(1, a)],
        [GammaPair(Fraction(d, 2), b / 2), GammaPair(1, 1), GammaPair(1, b / 2)],
    )


@lru_cache(maxsize=64)
def beta2_instance(alpha: float, d: int) -> HParams:
    """H^{20}_{12} left after cancelling Gamma(-s) against Gamma(-s) when beta = 2."""
    return cancel_first_upper_last_lower(fundamental_instance(alpha, 2.0, d))


def g_heat(d: int, t: float, r: float) -> float:
    """Gaussian heat kernel (4 pi t)^{-d/2} exp(-r^2 / 4t)."""
    if not t > 0:
        raise KernelRangeError(f"t must be positive, got {t}")
    return math.exp(-0.5 * d * math.log(4 * math.pi * t) - r * r / (4 * t))


def g_elementary(beta: float, t: float, r: float) -> float:
    """d = 1 kernel with alpha = beta, a rational function of r^beta and t^beta."""
    if not 0 < beta < 2:
        raise KernelRangeError(f"beta must lie in (0, 2), got {beta}")
    if not (t > 0 and r > 0):
        raise KernelRangeError("t and r must be positive")
    # divide through by max(r, t)^{2 beta} to stay finite at extreme ratios
    lr, lt = math.log(r), math.log(t)
    top = max(lr, lt)
    u = math.exp(beta * (lr - top))
    v = math.exp(beta * (lt - top))
    c = math.cos(math.pi * beta / 2)
    den = v * v + 2 * u * v * c + u * u
    return math.sin(math.pi * beta / 2) * v * u / (math.pi * r * den)


def _prefactor_log(d: int, r: float) -> float:
    return -0.5 * d * _LOG_PI - d * math.log(r)


def g_eval(p: KernelPoint, tol: float = 1e-12, route: str = "auto") -> EvalResult:
    """G(t, r) with an error estimate.

    ``route="auto"`` uses the closed forms where they apply; ``route="h"``
    always goes through the H-function (with the beta = 2 reduction), which
    is what the closed-form checks compare against.
    """
    if route not in ("auto", "h"):
        raise ValueError(f"unknown route {route!r}")
    if route == "auto":
        if p.alpha == 1 and p.beta == 2:
            return EvalResult(g_heat(p.d, p.t, p.r), 0.0, Method.ClosedForm, 0)
        if p.alpha == p.beta and p.d == 1:
            return EvalResult(g_elementary(p.beta, p.t, p.r), 0.0, Method.ClosedForm, 0)
    h = beta2_instance(p.alpha, p.d) if p.beta == 2 else fundamental_instance(p.alpha, p.beta, p.d)
    res = eval_auto(h, p.z, tol)
    scale = math.exp(_prefactor_log(p.d, p.r))
    return EvalResult(res.value * scale, res.abs_err_est * scale, res.method,
                      res.terms_or_nodes, res.asymptotic, res.imag * scale, res.note)


def _g(alpha, beta, d, t, r) -> float:
    return g_eval(KernelPoint(alpha, beta, d, t, r)).value


def scaling_check(p: KernelPoint, lam: float) -> float:
    """Residual of G(lam t, r) = (lam t)^{-alpha d / beta} G(1, (lam t)^{-alpha/beta} r)."""
    if not lam > 0:
        raise KernelRangeError(f"lambda must be positive, got {lam}")
    tl = lam * p.t
    lhs = _g(p.alpha, p.beta, p.d, tl, p.r)
    rhs = tl ** (-p.alpha * p.d / p.beta) * _g(p.alpha, p.beta, p.d, 1.0, tl ** (-p.alpha / p.beta) * p.r)
    diff = abs(lhs - rhs)
    return diff / abs(lhs) if abs(lhs) > 1e-300 else diff


# ---------------------------------------------------------------------------
# normalization


def radial_mass(alpha: float, beta: float, d: int, t: float = 1.0, tol: float = 1e-8) -> float:
    """Signed mass int_0^inf |S^{d-1}| r^{d-1} G(t, r) dr.

    The integral is split at r0 = t^{alpha/beta}.  On (0, r0] the substitution
    r = r0 u^{1/gamma} and on [r0, inf) the substitution r = r0 v^{-1/beta}
    turn the power-law behaviour at both ends into bounded integrands.
    """
    _check_params(alpha, beta, d)
    r0 = t ** (alpha / beta)
    surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    # integrand near 0 behaves like r^{min(beta, d) - 1} (up to logs)
    g0 = float(min(beta, d))

    def inner(u):
        if u <= 0:
            return 0.0
        r = r0 * u ** (1 / g0)
        jac = r0 / g0 * u ** (1 / g0 - 1)
        return surface * r ** (d - 1) * _g(alpha, beta, d, t, r) * jac

    def outer(v):
        if v <= 0:
            return 0.0
        r = r0 * v ** (-1 / beta)
        jac = r0 / beta * v ** (-1 / beta - 1)
        return surface * r ** (d - 1) * _g(alpha, beta, d, t, r) * jac

    total = 0.0
    err = 0.0
    for fn in (inner, outer):
        val, e = integrate.quad(fn, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
        total += val
        err += e
    if err > 1e-6:
        raise QuadratureError(f"radial mass quadrature error {err:.3g} exceeds 1e-6")
    return total


# ---------------------------------------------------------------------------
# radial Fourier transform


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _gauss(fn, a: float, b: float) -> float:
    x = 0.5 * (b - a) * _GL_X + 0.5 * (b + a)
    return 0.5 * (b - a) * float(np.dot(_GL_W, fn(x)))


def _wynn(partials: list[float]) -> float:
    """Wynn epsilon extrapolation of a sequence of partial sums."""
    n = len(partials)
    e = [[0.0] * (n + 1) for _ in range(n + 1)]
    for i, s in enumerate(partials):
        e[i][1] = s
    for k in range(2, n + 1):
        for i in range(n - k + 1):
            diff = e[i + 1][k - 1] - e[i][k - 1]
            e[i][k] = e[i + 1][k - 2] + (1.0 / diff if diff != 0 else math.inf)
    # the odd columns (index 1, 3, ...) hold the estimates
    best = e[0][1 + 2 * ((n - 1) // 2)]
    return best if math.isfinite(best) else partials[-1]


def _bessel_zero(order: float, k: int) -> float:
    """k-th positive zero of J_order (McMahon approximation; exact for +-1/2)."""
    if order == 0.5:
        return k * math.pi
    if order == -0.5:
        return (k - 0.5) * math.pi
    b = (k - 0.25) * math.pi
    return b + 1 / (8 * b) - 31 / (384 * b**3)


def fourier_check(alpha: float, beta: float, d: int, t: float, xi: float,
                  panels: int = 20) -> tuple[float, float]:
    """(lhs, rhs) of the radial Fourier identity for G.

    lhs is the Hankel-type integral xi^{1-d/2} int r^{d/2} J_{d/2-1}(r xi) G dr
    multiplied by (2 pi)^{d/2}, so that it should equal rhs = E_alpha(-xi^beta t^alpha).
    The integral is split at the zeros of the Bessel factor; the alternating
    panel sums are extrapolated with Wynn's epsilon algorithm.  A short table
    works best: past roughly 20 panels rounding in the high epsilon columns
    costs more than the extra terms gain.
    """
    _check_params(alpha, beta, d)
    if d > 3:
        raise KernelRangeError("fourier_check supports d <= 3")
    if not xi > 0:
        raise KernelRangeError("xi must be positive")
    order = d / 2 - 1

    def integrand(r: np.ndarray) -> np.ndarray:
        g = np.array([_g(alpha, beta, d, t, float(x)) for x in r])
        return r ** (d / 2) * bessel_j(order, r * xi) * g

    # first panel up to the first zero; the substitution r = a u^{1/gamma}
    # absorbs the integrable power at the origin
    a = _bessel_zero(order, 1) / xi
    g0 = float(min(beta, d))

    def first(u: np.ndarray) -> np.ndarray:
        r = a * u ** (1 / g0)
        return integrand(r) * a / g0 * u ** (1 / g0 - 1)

    head, _ = integrate.quad(lambda u: float(first(np.array([u]))[0]) if u > 0 else 0.0,
                             0.0, 1.0, epsabs=1e-12, epsrel=1e-10, limit=200)
    partials = []
    total = head
    lo = a
    for k in range(2, panels + 2):
        hi = _bessel_zero(order, k) / xi
        total += _gauss(integrand, lo, hi)
        partials.append(total)
        lo = hi
    est = _wynn(partials)
    coarse = _wynn(partials[: max(4, panels - 4)])
    if abs(est - coarse) > 1e-6 * max(1.0, abs(est)):
        raise QuadratureError(f"Fourier tail extrapolation unstable: {est!r} vs {coarse!r}")
    lhs = xi ** (1 - d / 2) * est * (2 * math.pi) ** (d / 2)
    rhs = ml_neg(alpha, xi**beta * t**alpha)
    return lhs, rhs


# ---------------------------------------------------------------------------
# asymptotics


class Regime(enum.Enum):
    SmallR_Power = "SmallR_Power"
    SmallR_Log = "SmallR_Log"
    SmallR_SingularPower = "SmallR_SingularPower"
    LargeR_Algebraic = "LargeR_Algebraic"
    LargeR_Exponential = "LargeR_Exponential"


@dataclass(frozen=True)
class AsymptoticRegime:
    """Which growth/decay law bounds |G| at this point.

    ``bound_coeff`` is the t-dependent factor and ``bound_exponent`` the power
    of r in the bound (for the exponential regime, the power of R inside the
    exponential).
    """

    regime: Regime
    bound_coeff: float
    bound_exponent: float


def asymptotic_regime(p: KernelPoint) -> AsymptoticRegime:
    a, b, d, t = p.alpha, p.beta, p.d, p.t
    if p.big_r <= 1:
        if a == 1 or b > d:
            return AsymptoticRegime(Regime.SmallR_Power, t ** (-a * d / b), 0.0)
        if b == d:
            return AsymptoticRegime(Regime.SmallR_Log, t ** (-a), 0.0)
        return AsymptoticRegime(Regime.SmallR_SingularPower, t ** (-a), b - d)
    if b == 2:
        return AsymptoticRegime(Regime.LargeR_Exponential, t ** (-a * d / 2), 1 / (2 - a))
    return AsymptoticRegime(Regime.LargeR_Algebraic, t**a, -d - b)


def small_r_coefficient(alpha: float, beta: float, d: int) -> tuple[float, float]:
    """Leading behaviour of G(1, r) r^d pi^{d/2} = c z^e (+ ...) as r -> 0, from the residue sum."""
    c, e, has_log = leading_term(fundamental_instance(alpha, beta, d), Side.Left)
    if has_log:
        raise ValueError("leading term carries a logarithm")
    return c, e


# ---------------------------------------------------------------------------
# subordination


def subordination_eval(alpha: float, beta: float, x: float, tol: float = 1e-9) -> float:
    """G_{alpha,beta,1}(1, x) as a Mellin convolution against the Mainardi density M_{alpha/beta}.

    The base kernel is the alpha = beta kernel at the *same* beta, since
    M[K_{alpha,beta}] / M[K_{beta,beta}] = Gamma(s) / Gamma(1 - nu + nu s) with
    nu = alpha / beta.  At beta = 2 the base kernel is the wave kernel
    (point masses at |x| = 1) and the convolution collapses to M_{alpha/2}(x) / 2.
    """
    if not (1 < alpha <= beta <= 2):
        raise KernelRangeError(f"need 1 < alpha <= beta <= 2, got alpha={alpha}, beta={beta}")
    if not x > 0:
        raise KernelRangeError("x must be positive")
    if alpha == beta:
        if beta == 2:
            raise KernelRangeError("alpha = beta = 2 is the wave equation; no density exists")
        return g_elementary(alpha, 1.0, x)
    nu = alpha / beta
    if beta == 2:
        return 0.5 * mainardi(nu, x)

    def f(y):
        if y <= 0:
            return 0.0
        return g_elementary(beta, 1.0, x / y) * mainardi(nu, y) / y

    # cut where the Mainardi density is negligible next to its peak
    peak = max(mainardi(nu, y) for y in np.linspace(0.0, 2.0, 41))
    y_max = 1.0
    while mainardi(nu, y_max) > 1e-17 * peak:
        y_max *= 1.25
    # the base kernel peaks near y = x; give quad that breakpoint
    pts = [v for v in (0.5 * x, x, 2 * x) if v < y_max]
    val, err = integrate.quad(f, 0.0, y_max, points=pts or None, epsabs=tol, epsrel=tol, limit=400)
    if err > 1e-6:
        raise QuadratureError(f"subordination quadrature error {err:.3g} exceeds 1e-6")
    return val
