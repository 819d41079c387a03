"""Value-preserving rewrites of H-function expressions.

An :class:`HExpr` stands for ``x -> const * x**power * H[h](arg_coeff * x**arg_power)``.
Every rule returns a new expression representing the same function of ``x``
(or, for the integral transforms, the transformed function of the new
variable).  Scalars are kept as exact fractions so chains are reproducible
and ``reflect`` is an exact involution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .hcore import (
    GammaPair,
    HParams,
    PoleMergeError,
    Side,
    as_fraction,
    derived_params,
    effective_poles,
    format_hparams,
    format_number,
)

__all__ = [
    "HExpr",
    "RewriteError",
    "DivergentTransformError",
    "cancel_first_lower_last_upper",
    "cancel_first_upper_last_lower",
    "reflect",
    "power_shift",
    "rescale",
    "derivative_lift",
    "laplace_map",
    "hankel_map",
    "hankel_exponents",
    "times",
    "evaluate",
]

_PAIR_TOL = 1e-12


class RewriteError(ValueError):
    """A rule was applied outside its preconditions."""


class DivergentTransformError(RewriteError):
    """The integral transform does not converge for this expression."""


@dataclass(frozen=True)
class HExpr:
    const: Fraction
    power: Fraction
    h: HParams
    arg_coeff: Fraction = Fraction(1)
    arg_power: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("const", "power", "arg_coeff", "arg_power"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.arg_coeff <= 0:
            raise RewriteError("arg_coeff must be positive")
        if self.arg_power == 0:
            raise RewriteError("arg_power must be nonzero")

    def __str__(self) -> str:
        return (f"{float(self.const):.17g} * x^{format_number(self.power)} * "
                f"H[{format_hparams(self.h)}]({float(self.arg_coeff):.17g} * x^{format_number(self.arg_power)})")

    def argument(self, x: float) -> float:
        return float(self.arg_coeff) * float(x) ** float(self.arg_power)


def _pair_eq(u: GammaPair, v: GammaPair) -> bool:
    if u == v:
        return True
    return all(abs(float(a) - float(b)) <= _PAIR_TOL * max(1.0, abs(float(a)))
               for a, b in ((u.coeff, v.coeff), (u.scale, v.scale)))


def _on_params(fn):
    """Lift an HParams -> HParams rule so it also accepts an HExpr."""
    def wrapper(obj, *args, **kwargs):
        if isinstance(obj, HExpr):
            return replace(obj, h=fn(obj.h, *args, **kwargs))
        return fn(obj, *args, **kwargs)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_on_params
def cancel_first_lower_last_upper(h: HParams) -> HParams:
    """Drop a last upper pair that equals the first lower pair: H^{m-1,n}_{p-1,q-1}."""
    if h.m < 1 or h.p <= h.n:
        raise RewriteError("need m >= 1 and p > n")
    if not _pair_eq(h.upper[-1], h.lower[0]):
        raise RewriteError(f"last upper {h.upper[-1]} differs from first lower {h.lower[0]}")
    return HParams(h.m - 1, h.n, h.upper[:-1], h.lower[1:])


@_on_params
def cancel_first_upper_last_lower(h: HParams) -> HParams:
    """Drop a first upper pair that equals the last lower pair: H^{m,n-1}_{p-1,q-1}."""
    if h.n < 1 or h.q <= h.m:
        raise RewriteError("need n >= 1 and q > m")
    if not _pair_eq(h.upper[0], h.lower[-1]):
        raise RewriteError(f"first upper {h.upper[0]} differs from last lower {h.lower[-1]}")
    return HParams(h.m, h.n - 1, h.upper[1:], h.lower[:-1])


def _reflect_params(h: HParams) -> HParams:
    return HParams(
        h.n,
        h.m,
        [GammaPair(1 - b, s) for b, s in h.lower],
        [GammaPair(1 - a, s) for a, s in h.upper],
    )


def reflect(e):
    """H(1/z) as an H-function of z; on an HExpr the argument is inverted."""
    if isinstance(e, HParams):
        return _reflect_params(e)
    return HExpr(e.const, e.power, _reflect_params(e.h), 1 / e.arg_coeff, -e.arg_power)


def power_shift(e: HExpr, sigma) -> HExpr:
    """Absorb the argument power ``y**sigma`` into the parameters.

    Uses ``H(y) = y**-sigma * H_sigma(y)`` where H_sigma has every coefficient
    moved by ``sigma * scale``; the prefactor compensates.
    """
    sigma = as_fraction(sigma)
    if sigma == 0:
        return e
    h = e.h
    shifted = HParams(
        h.m,
        h.n,
        [GammaPair(a + sigma * s, s) for a, s in h.upper],
        [GammaPair(b + sigma * s, s) for b, s in h.lower],
    )
    const = e.const * as_fraction(float(e.arg_coeff) ** float(-sigma))
    return HExpr(const, e.power - sigma * e.arg_power, shifted, e.arg_coeff, e.arg_power)


def rescale(e: HExpr, k) -> HExpr:
    """``H(y) = k * H_k(y**k)`` with every scale multiplied by ``k``."""
    k = as_fraction(k)
    if k <= 0:
        raise RewriteError(f"rescale factor must be positive, got {k}")
    if k == 1:
        return e
    h = e.h
    scaled = HParams(
        h.m,
        h.n,
        [GammaPair(a, k * s) for a, s in h.upper],
        [GammaPair(b, k * s) for b, s in h.lower],
    )
    coeff = as_fraction(float(e.arg_coeff) ** float(k))
    return HExpr(e.const * k, e.power, scaled, coeff, e.arg_power * k)


def derivative_lift(e: HExpr, k: int) -> HExpr:
    """k-th derivative in x of ``x**omega * H(c x**sigma)`` (constant carried along)."""
    if int(k) != k or k < 1:
        raise RewriteError("derivative order must be a positive integer")
    sigma = e.arg_power
    if sigma <= 0:
        raise RewriteError("derivative_lift needs a positive argument power")
    omega = e.power
    h = e.h
    lifted = HParams(
        h.m,
        h.n + 1,
        [GammaPair(-omega, sigma), *h.upper],
        [*h.lower, GammaPair(k - omega, sigma)],
    )
    return HExpr(e.const, omega - k, lifted, e.arg_coeff, e.arg_power)


def _leading_left(h: HParams):
    try:
        poles = effective_poles(h, Side.Left, 1)
    except PoleMergeError as exc:
        raise RewriteError(str(exc)) from exc
    return poles[0] if poles else None


def laplace_map(e: HExpr) -> HExpr:
    """Laplace transform in x; the result is an HExpr in the transform variable p.

    Integrability at the origin is judged from the leading genuine left pole
    of the kernel (removable singularities skipped), not from the raw
    parameter bound min b_j / beta_j > -1.
    """
    if e.arg_power != 1:
        raise RewriteError("laplace_map needs arg_power = 1; rescale first")
    der = derived_params(e.h)
    if der.a_star <= 0:
        raise DivergentTransformError(f"Laplace transform needs a* > 0, got {der.a_star:g}")
    base = power_shift(e, e.power) if e.power != 0 else e
    lead = _leading_left(base.h)
    if lead is not None and lead.location >= 1 - 1e-12:
        raise DivergentTransformError(
            f"integrand behaves like x^{-lead.location:g} at 0; not integrable")
    h = base.h
    image = HParams(h.m, h.n + 1, [GammaPair(0, 1), *h.upper], h.lower)
    return HExpr(base.const, -1, image, base.arg_coeff, -1)


def hankel_exponents(e: HExpr, omega, eta, tau):
    """Power-law exponents of the Hankel integrand at r -> 0 and r -> infinity.

    Absolute convergence needs the first > -1 and the second < -1.  The
    exponent at infinity is -inf when the H-function has no right poles
    (decay beyond all powers).
    """
    omega, eta, tau = float(omega), float(eta), float(tau)
    h = e.h
    w = float(e.power)
    lead = _leading_left(h)
    at_zero = omega + eta + w - (tau * lead.location if lead is not None else -math.inf)
    try:
        right = effective_poles(h, Side.Right, 1)
    except PoleMergeError as exc:
        raise RewriteError(str(exc)) from exc
    at_inf = omega - 0.5 + w - tau * right[0].location if right else -math.inf
    return at_zero, at_inf


def hankel_map(e: HExpr, omega, eta, tau) -> HExpr:
    """``x -> int_0^inf (x r)^omega J_eta(x r) e(r) dr`` as an HExpr in x."""
    omega, eta, tau = as_fraction(omega), as_fraction(eta), as_fraction(tau)
    if tau <= 0:
        raise RewriteError("tau must be positive")
    if e.arg_power != tau:
        raise RewriteError(f"tau={format_number(tau)} must equal the argument power {format_number(e.arg_power)}")
    base = power_shift(e, e.power / tau) if e.power != 0 else e
    at_zero, at_inf = hankel_exponents(base, omega, eta, tau)
    if not (at_zero > -1 and at_inf < -1):
        raise DivergentTransformError(
            f"Hankel integral not absolutely convergent: exponents {at_zero:g} at 0, {at_inf:g} at infinity")
    h = base.h
    half = 1 - (omega + 1) / 2
    image = HParams(
        h.m,
        h.n + 1,
        [GammaPair(half - eta / 2, tau / 2), *h.upper, GammaPair(half + eta / 2, tau / 2)],
        h.lower,
    )
    const = base.const * as_fraction(2.0 ** float(omega))
    coeff = base.arg_coeff * as_fraction(2.0 ** float(tau))
    return HExpr(const, -1, image, coeff, -tau)


def times(e: HExpr, c=1, w=0) -> HExpr:
    """Multiply the represented function by ``c * x**w``."""
    return replace(e, const=e.const * as_fraction(c), power=e.power + as_fraction(w))


def evaluate(e: HExpr, x: float, tol: float = 1e-12):
    """Numeric value of the expression at ``x > 0`` via :func:`heval.eval_auto`."""
    from .heval import eval_auto

    res = eval_auto(e.h, e.argument(x), tol)
    scale = float(e.const) * float(x) ** float(e.power)
    return scale * res.value, abs(scale) * res.abs_err_est
