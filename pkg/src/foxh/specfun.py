"""Scalar special functions used throughout the package.

Complex log-gamma and digamma are computed from the Stirling series after an
upward recurrence shift; the left half-plane is handled by reflection.  All
routines accept numpy arrays as well as scalars.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "GammaPoleError",
    "UnsupportedOrderError",
    "log_gamma",
    "digamma",
    "rgamma",
    "gamma_sign",
    "bessel_j",
    "POLE_TOL",
]

#: Distance to a nonpositive integer below which a gamma pole is signalled.
POLE_TOL = 1e-14

_LOG_PI = math.log(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT_TO = 10.0

# B_{2k} / (2k (2k-1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_{2k} / (2k), k = 1..7
_DIGAMMA_ASYM = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


class GammaPoleError(ValueError):
    """Raised when a gamma function is evaluated at (or next to) one of its poles."""


class UnsupportedOrderError(ValueError):
    pass


def _check_poles(z: np.ndarray) -> None:
    re = z.real
    k = np.round(re)
    hit = (k <= 0) & (np.abs(z - k) < POLE_TOL)
    if np.any(hit):
        bad = z[hit].ravel()[0]
        raise GammaPoleError(f"gamma pole at z={bad}")


def _stirling(z: np.ndarray) -> np.ndarray:
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in reversed(_STIRLING):
        series = series * inv2 + c
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series * inv


def _shifted(z: np.ndarray, fill: float):
    """Upward shift counts and the matrix of z + k, set to ``fill`` beyond each shift."""
    shift = np.where(z.real < _SHIFT_TO, np.ceil(_SHIFT_TO - z.real), 0.0)
    nmax = int(shift.max()) if shift.size else 0
    k = np.arange(nmax, dtype=float)
    active = k[None, :] < shift[:, None]
    return shift, np.where(active, z[:, None] + k[None, :], fill)


def _log_gamma_right(z: np.ndarray) -> np.ndarray:
    """Principal log-gamma for Re z >= 0 via recurrence shift and Stirling."""
    shift, zk = _shifted(z, 1.0)
    # principal logs: every z + k has Re > 0 here, so the sum stays on-branch
    return _stirling(z + shift) - np.log(zk).sum(axis=1)


def _log_sin_pi_upper(z: np.ndarray) -> np.ndarray:
    """A branch of log(sin(pi z)) continuous on Im z >= 0, equal to 0 at z = 1/2."""
    x = z.real
    n = np.round(x)
    frac = x - n
    # exp(2 pi i z) with the integer part of Re z removed exactly
    e = np.exp(2j * np.pi * frac) * np.exp(-2.0 * np.pi * z.imag)
    return np.log(0.5j) - 1j * np.pi * z + np.log1p(-e)


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z``.

    Raises :class:`GammaPoleError` within ``POLE_TOL`` of a nonpositive integer.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    _check_poles(arr)
    out = np.empty_like(arr)

    right = arr.real >= 0
    if np.any(right):
        out[right] = _log_gamma_right(arr[right])
    left = ~right
    if np.any(left):
        zl = arr[left]
        upper = zl.imag >= 0
        w = np.where(upper, zl, np.conj(zl))
        val = _LOG_PI - _log_sin_pi_upper(w) - _log_gamma_right(1.0 - w)
        out[left] = np.where(upper, val, np.conj(val))
    return out[0] if scalar else out


def digamma(z):
    """The digamma function psi(z) = d/dz log Gamma(z)."""
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    _check_poles(arr)
    out = np.empty_like(arr)

    right = arr.real >= 0
    if np.any(right):
        out[right] = _digamma_right(arr[right])
    left = ~right
    if np.any(left):
        zl = arr[left]
        frac = zl - np.round(zl.real)
        out[left] = _digamma_right(1.0 - zl) - np.pi / np.tan(np.pi * frac)
    if not np.iscomplexobj(z):
        out = out.real
    return out[0] if scalar else out


def _digamma_right(z: np.ndarray) -> np.ndarray:
    shift, zk = _shifted(z, np.inf)
    acc = (1.0 / zk).sum(axis=1)
    w = z + shift
    inv2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    for c in reversed(_DIGAMMA_ASYM):
        series = series * inv2 + c
    return np.log(w) - 0.5 / w - series * inv2 - acc


def rgamma(x: float) -> float:
    """1/Gamma(x) on the real line; exactly zero at the nonpositive integers."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        return 0.0
    if 0 < x < 171.0:
        return 1.0 / math.gamma(x)
    if x >= 171.0:
        return math.exp(-math.lgamma(x))
    # reflection keeps large negative arguments finite
    lg = math.lgamma(1.0 - x)
    s = math.sin(math.pi * (x - math.floor(x)))
    if math.floor(x) % 2:
        s = -s
    # 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    log_mag = lg + math.log(abs(s)) - _LOG_PI
    if log_mag > 709.7:
        return math.copysign(math.inf, s)
    return math.copysign(math.exp(log_mag), s)


def gamma_sign(x: float) -> int:
    """Sign of Gamma(x) for real non-pole ``x``."""
    if x > 0:
        return 1
    if x == math.floor(x):
        raise GammaPoleError(f"gamma pole at x={x}")
    return -1 if math.ceil(-x) % 2 else 1


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 60):
        term = term * q / (k * k)
        total = total + term
    return total


def _j0_hankel(x: np.ndarray) -> np.ndarray:
    # a_k(0) = prod_{j=1..k} (-(2j-1)^2) / (k! 8^k); stop at the smallest term
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    a = 1.0
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k in range(0, 60):
        if k > 0:
            a = a * (-(2 * k - 1) ** 2) / (k * 8.0)
        term = a / x**k
        mag = np.abs(term)
        done = done | (mag > prev)
        use = ~done
        if k % 2 == 0:
            p = p + np.where(use, term * (-1) ** (k // 2), 0.0)
        else:
            q = q + np.where(use, term * (-1) ** (k // 2), 0.0)
        prev = np.where(use, mag, prev)
        if np.all(done):
            break
    chi = x - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(order: float, x):
    """Bessel J of order -1/2, 0 or 1/2 for x >= 0."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise ValueError("bessel_j requires x >= 0")
    if order == 0.5 or order == -0.5:
        with np.errstate(divide="ignore", invalid="ignore"):
            amp = np.sqrt(2.0 / (np.pi * arr))
            trig = np.sin(arr) if order > 0 else np.cos(arr)
            out = amp * trig
        if order > 0:
            out = np.where(arr == 0, 0.0, out)
        else:
            out = np.where(arr == 0, np.inf, out)
    elif order == 0:
        small = arr <= 12.0
        out = np.empty_like(arr)
        if np.any(small):
            out[small] = _j0_series(arr[small])
        if np.any(~small):
            out[~small] = _j0_hankel(arr[~small])
    else:
        raise UnsupportedOrderError(f"bessel_j supports orders -1/2, 0, 1/2; got {order}")
    return float(out[0]) if scalar else out
