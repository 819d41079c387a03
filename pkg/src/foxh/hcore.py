"""Parameter algebra of Fox H-functions.

An H-function ``H^{m,n}_{p,q}`` is described by :class:`HParams`: the upper
pairs ``(a_i, alpha_i)`` and lower pairs ``(b_j, beta_j)``.  Its Mellin kernel is

    A(s) B(s) / (C(s) D(s)),
    A = prod_{j<=m} Gamma(b_j + beta_j s),    B = prod_{i<=n} Gamma(1 - a_i - alpha_i s),
    C = prod_{i>n}  Gamma(a_i + alpha_i s),   D = prod_{j>m} Gamma(1 - b_j - beta_j s).

Parameters are stored as exact :class:`fractions.Fraction` values so that
rewrite rules compose without rounding; numeric work uses the float images.
"""
from __future__ import annotations

import enum
import math
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .specfun import GammaPoleError, digamma, gamma_sign, log_gamma

__all__ = [
    "GammaPair",
    "HParams",
    "HDerived",
    "Side",
    "Pole",
    "PoleMergeError",
    "Laurent",
    "EffectivePole",
    "as_fraction",
    "derived_params",
    "mellin_kernel",
    "log_abs_kernel",
    "enumerate_poles",
    "effective_poles",
    "laurent_at",
    "pole_gap",
    "validate",
    "parse_hparams",
    "parse_number",
    "format_hparams",
    "format_number",
]

KERNEL_POLE_TOL = 1e-13
_REL_TOL = 1e-12
_MAX_DEN = 64


def as_fraction(x) -> Fraction:
    """Exact rational image of an int, float, Fraction or numeric string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite parameter {x}")
    return Fraction(x)


def format_number(x: Fraction) -> str:
    """Shortest faithful text for a parameter: ``p/q`` for small rationals."""
    x = as_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    if x.denominator <= 10**6:
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


@dataclass(frozen=True)
class GammaPair:
    coeff: Fraction
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_fraction(self.coeff))
        object.__setattr__(self, "scale", as_fraction(self.scale))

    def __iter__(self):
        yield self.coeff
        yield self.scale

    def __repr__(self) -> str:
        return f"({format_number(self.coeff)}, {format_number(self.scale)})"


def _pairs(items) -> tuple[GammaPair, ...]:
    return tuple(p if isinstance(p, GammaPair) else GammaPair(*p) for p in items)


@dataclass(frozen=True)
class HParams:
    """The tuple ``(m, n, upper, lower)`` of an H-function ``H^{m,n}_{p,q}``."""

    m: int
    n: int
    upper: tuple[GammaPair, ...] = ()
    lower: tuple[GammaPair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", _pairs(self.upper))
        object.__setattr__(self, "lower", _pairs(self.lower))
        if not 0 <= self.m <= len(self.lower):
            raise ValueError(f"need 0 <= m <= q, got m={self.m}, q={len(self.lower)}")
        if not 0 <= self.n <= len(self.upper):
            raise ValueError(f"need 0 <= n <= p, got n={self.n}, p={len(self.upper)}")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @cached_property
    def factors(self) -> "_Factors":
        a = [(float(c), float(s)) for c, s in self.upper]
        b = [(float(c), float(s)) for c, s in self.lower]
        return _Factors(
            num_left=tuple(b[: self.m]),
            num_right=tuple((1.0 - c, -s) for c, s in a[: self.n]),
            den_left=tuple(a[self.n :]),
            den_right=tuple((1.0 - c, -s) for c, s in b[self.m :]),
        )

    def __str__(self) -> str:
        return format_hparams(self)


class _Factors(NamedTuple):
    """Gamma factors as (offset, slope) meaning Gamma(offset + slope * s)."""

    num_left: tuple  # A
    num_right: tuple  # B
    den_left: tuple  # C
    den_right: tuple  # D

    @property
    def numerators(self):
        return self.num_left + self.num_right

    @property
    def denominators(self):
        return self.den_left + self.den_right


@dataclass(frozen=True)
class HDerived:
    a_star: float
    big_d: float
    delta: float
    mu: float


def derived_params(h: HParams) -> HDerived:
    """The parameters a*, D, delta and mu governing convergence and asymptotics."""
    al = [float(s) for _, s in h.upper]
    be = [float(s) for _, s in h.lower]
    a = [float(c) for c, _ in h.upper]
    b = [float(c) for c, _ in h.lower]
    a_star = sum(al[: h.n]) - sum(al[h.n :]) + sum(be[: h.m]) - sum(be[h.m :])
    big_d = sum(be) - sum(al)
    log_delta = -sum(x * math.log(x) for x in al) + sum(x * math.log(x) for x in be)
    mu = sum(b[: h.m]) - sum(a) + (h.p - h.q) / 2.0
    return HDerived(a_star=a_star, big_d=big_d, delta=math.exp(log_delta), mu=mu)


# ---------------------------------------------------------------------------
# kernel


def _near_nonpos_int(w: np.ndarray, tol: float) -> np.ndarray:
    k = np.round(w.real)
    return (k <= 0) & (np.abs(w - k) < tol)


def mellin_kernel(h: HParams, s):
    """The Mellin kernel of ``h`` at complex ``s`` (scalar or array).

    Computed as exp of a sum of log-gammas.  Raises :class:`GammaPoleError`
    at a numerator pole; returns exactly zero at a denominator pole.
    """
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    f = h.factors
    total = np.zeros_like(arr)
    for c, k in f.numerators:
        w = c + k * arr
        if np.any(_near_nonpos_int(w, KERNEL_POLE_TOL)):
            raise GammaPoleError(f"numerator pole of the kernel at s={arr[_near_nonpos_int(w, KERNEL_POLE_TOL)][0]}")
        total = total + log_gamma(w)
    zero = np.zeros(arr.shape, dtype=bool)
    for c, k in f.denominators:
        w = c + k * arr
        hit = _near_nonpos_int(w, KERNEL_POLE_TOL)
        zero |= hit
        total = total - log_gamma(np.where(hit, 0.5, w))
    out = np.where(zero, 0.0, np.exp(np.where(zero, 0.0, total)))
    return out[0] if scalar else out


def log_abs_kernel(h: HParams, s: float) -> float:
    """log |kernel| at real ``s``; -inf at denominator poles, +inf at numerator poles."""
    f = h.factors
    out = 0.0
    for c, k in f.numerators:
        w = c + k * s
        if w <= 0 and w == math.floor(w):
            return math.inf
        out += math.lgamma(w)
    for c, k in f.denominators:
        w = c + k * s
        if w <= 0 and w == math.floor(w):
            return -math.inf
        out -= math.lgamma(w)
    return out


# ---------------------------------------------------------------------------
# poles


class Side(enum.Enum):
    Left = "left"
    Right = "right"


class PoleMergeError(ValueError):
    """More than two gamma families coincide at one pole."""


@dataclass(frozen=True)
class Pole:
    location: float
    order: int
    side: Side
    sources: tuple[tuple[int, int], ...] = field(default=())


def _rational(x: float):
    f = Fraction(x).limit_denominator(_MAX_DEN)
    if abs(float(f) - x) <= 1e-13 * max(1.0, abs(x)):
        return f
    return None


def _same(x: float, y: float) -> bool:
    scale = max(1.0, abs(x), abs(y))
    if abs(x - y) > 1e-9 * scale:
        return False
    fx, fy = _rational(x), _rational(y)
    if fx is not None and fy is not None:
        return fx == fy
    return abs(x - y) <= _REL_TOL * scale


def _pole_index(c: float, k: float, s0: float):
    """Index n >= 0 if Gamma(c + k s0) sits on the pole at -n, else None."""
    w = c + k * s0
    n = round(w)
    # judge coincidence relative to the size of the pieces that produced w
    if n > 0 or abs(w - n) > _REL_TOL * max(1.0, abs(c), abs(k * s0)):
        return None
    return -n


def _hits(c: float, k: float, s: np.ndarray) -> np.ndarray:
    """Vectorized _pole_index(...) is not None."""
    w = c + k * s
    n = np.round(w)
    return (n <= 0) & (np.abs(w - n) <= _REL_TOL * np.maximum(1.0, np.maximum(abs(c), np.abs(k * s))))


def _raw_candidates(h: HParams, side: Side, count: int):
    f = h.factors
    out = []
    if side is Side.Left:
        for j, (c, k) in enumerate(f.num_left):
            out.extend(((-c - l) / k, (j, l)) for l in range(count))
    else:
        for i, (c, k) in enumerate(f.num_right):
            # Gamma(c + k s), k = -alpha: poles at s = (c + l) / alpha
            out.extend(((c + l) / -k, (i, l)) for l in range(count))
    out.sort(key=lambda t: t[0] if side is Side.Right else -t[0])
    merged: list[list] = []
    for loc, src in out:
        if merged and _same(merged[-1][0], loc):
            merged[-1][1].append(src)
        else:
            merged.append([loc, [src]])
    return merged


def enumerate_poles(h: HParams, side: Side, count: int) -> list[Pole]:
    """The ``count`` poles of one side nearest the contour, merging coincidences.

    Left poles are listed with descending location, right poles ascending.
    Only the numerator family of the requested side is considered; denominator
    cancellations are accounted for in :func:`effective_poles`.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    poles = []
    for loc, srcs in _raw_candidates(h, side, count)[:count]:
        if len(srcs) > 2:
            raise PoleMergeError(f"{len(srcs)} gamma families coincide at s={loc}")
        poles.append(Pole(location=loc, order=len(srcs), side=side, sources=tuple(srcs)))
    return poles


class Laurent(NamedTuple):
    """Leading Laurent data of the kernel at a real point.

    The kernel behaves like ``sign * exp(logabs) * eps**(-order) * (1 + r1 * eps)``
    at ``s = s0 + eps``; ``order <= 0`` means no pole.  ``scale`` bounds the
    absolute rounding error of ``logabs`` in units of machine epsilon.
    """

    order: int
    sign: int
    logabs: float
    r1: float
    scale: float = 0.0


def _psi_int(n: int) -> float:
    # digamma(n + 1) = -gamma + H_n
    return float(digamma(float(n + 1)))


def laurent_at(h: HParams, s0: float) -> Laurent:
    """Laurent data of the kernel at real ``s0``, with exact sign bookkeeping."""
    f = h.factors
    power = 0
    sign = 1
    logabs = 0.0
    r1 = 0.0
    scale = 0.0
    for group, sgn in ((f.numerators, 1), (f.denominators, -1)):
        for c, k in group:
            n = _pole_index(c, k, s0)
            if n is None:
                w = c + k * s0
                lg = math.lgamma(w)
                dg = float(digamma(w))
                sign *= gamma_sign(w)
                logabs += sgn * lg
                r1 += sgn * k * dg
                # w itself carries an error of order |w| eps
                scale += abs(lg) + abs(w * dg)
            else:
                power -= sgn
                sign *= (-1) ** n * (1 if k > 0 else -1)
                lf = math.lgamma(n + 1) + math.log(abs(k))
                logabs -= sgn * lf
                r1 += sgn * k * _psi_int(n)
                scale += abs(lf)
    return Laurent(order=-power, sign=sign, logabs=logabs, r1=r1, scale=scale)


@dataclass(frozen=True)
class EffectivePole:
    """A genuine pole of the kernel after denominator cancellations."""

    location: float
    order: int
    side: Side
    laurent: Laurent


def _classify_location(h: HParams, s0: float):
    f = h.factors
    cnt = [sum(_pole_index(c, k, s0) is not None for c, k in grp)
           for grp in (f.num_left, f.num_right, f.den_left, f.den_right)]
    left_net = cnt[0] - cnt[2]
    right_net = cnt[1] - cnt[3]
    net = left_net + right_net
    if net <= 0:
        return None
    if right_net <= 0:
        return Side.Left
    if left_net <= 0:
        return Side.Right
    return "both"


class _PoleStream:
    """Lazily extended list of effective poles on one side."""

    _RAW_LIMIT = 20_000

    def __init__(self, h: HParams, side: Side):
        self.h = h
        self.side = side
        self.poles: list[EffectivePole] = []
        self._raw = 0
        self._lock = threading.Lock()
        fam = h.factors.num_left if side is Side.Left else h.factors.num_right
        self.exhausted = len(fam) == 0

    def _locations(self, count: int) -> np.ndarray:
        f = self.h.factors
        l = np.arange(count, dtype=float)
        if self.side is Side.Left:
            locs = np.concatenate([(-c - l) / k for c, k in f.num_left])
            locs = -np.sort(-locs)
        else:
            locs = np.concatenate([(c + l) / -k for c, k in f.num_right])
            locs = np.sort(locs)
        keep = np.ones(locs.size, dtype=bool)
        gap = np.abs(np.diff(locs)) > _REL_TOL * np.maximum(1.0, np.abs(locs[1:]))
        keep[1:] = gap
        return locs[keep][:count]

    def _extend(self, want: int) -> None:
        f = self.h.factors
        while len(self.poles) < want and not self.exhausted:
            fetch = max(64, 2 * self._raw)
            locs = self._locations(fetch)[self._raw :]
            cnt = [sum((_hits(c, k, locs) for c, k in grp), np.zeros(locs.size, dtype=int))
                   for grp in (f.num_left, f.num_right, f.den_left, f.den_right)]
            left_net = cnt[0] - cnt[2]
            right_net = cnt[1] - cnt[3]
            live = left_net + right_net > 0
            both = live & (left_net > 0) & (right_net > 0)
            if np.any(both):
                raise PoleMergeError(f"left and right poles coincide at s={locs[both][0]}")
            mine = live & ((right_net <= 0) if self.side is Side.Left else (left_net <= 0))
            for loc in locs[mine]:
                lau = laurent_at(self.h, float(loc))
                if lau.order > 2:
                    raise PoleMergeError(f"pole of order {lau.order} at s={loc}")
                self.poles.append(EffectivePole(float(loc), lau.order, self.side, lau))
            self._raw += locs.size
            if self._raw >= self._RAW_LIMIT:
                self.exhausted = True

    def get(self, k: int):
        if k >= len(self.poles):
            with self._lock:
                self._extend(k + 1)
        return self.poles[k] if k < len(self.poles) else None

    def first(self, count: int) -> list[EffectivePole]:
        with self._lock:
            self._extend(count)
        return self.poles[:count]


@lru_cache(maxsize=512)
def _stream(h: HParams, side: Side) -> _PoleStream:
    return _PoleStream(h, side)


def effective_poles(h: HParams, side: Side, count: int) -> list[EffectivePole]:
    """The first ``count`` genuine (non-removable) poles on ``side``."""
    return _stream(h, side).first(count)


def pole_gap(h: HParams) -> tuple[float, float]:
    """(largest effective left pole, smallest effective right pole); +-inf if none."""
    left = _stream(h, Side.Left).get(0)
    right = _stream(h, Side.Right).get(0)
    return (left.location if left else -math.inf, right.location if right else math.inf)


def validate(h: HParams) -> list[str]:
    """Diagnostics: nonpositive scales and left/right pole collisions."""
    diags = []
    for name, pairs in (("upper", h.upper), ("lower", h.lower)):
        for i, (c, s) in enumerate(pairs):
            if s <= 0:
                diags.append(f"{name} pair {i + 1} has nonpositive scale {format_number(s)}")
    if diags:
        return diags
    lefts = _raw_candidates(h, Side.Left, 40)
    rights = _raw_candidates(h, Side.Right, 40)
    for ll, _ in lefts:
        for rr, _ in rights:
            if _same(ll, rr) and _classify_location(h, ll) == "both":
                diags.append(f"left pole {ll + 0.0:g} coincides with right pole {rr + 0.0:g}; "
                             "no contour separates them")
    if diags:
        return diags
    try:
        lo, hi = pole_gap(h)
    except PoleMergeError as exc:
        return [str(exc)]
    if lo >= hi:
        diags.append(f"largest left pole {lo:g} is not left of smallest right pole {hi:g}")
    return diags


# ---------------------------------------------------------------------------
# text form:  "m n | a1:alpha1, a2:alpha2 | b1:beta1, ..."

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"


def parse_number(tok: str) -> Fraction:
    """A decimal or p/q rational as an exact fraction."""
    tok = tok.strip()
    if not re.fullmatch(_NUM, tok):
        raise ValueError(f"bad number {tok!r}")
    if "/" in tok:
        num, den = tok.split("/")
        if int(den) == 0:
            raise ValueError("zero denominator")
        return Fraction(num) / Fraction(den)
    return Fraction(tok)


def _parse_pairs(text: str) -> list[GammaPair]:
    text = text.strip()
    if not text or text == "-":
        return []
    out = []
    for item in text.split(","):
        if item.count(":") != 1:
            raise ValueError(f"pair {item.strip()!r} must look like coeff:scale")
        c, s = item.split(":")
        out.append(GammaPair(parse_number(c), parse_number(s)))
    return out


def parse_hparams(text: str) -> HParams:
    """Parse the plain-text form ``m n | a:alpha, ... | b:beta, ...``."""
    parts = text.split("|")
    if len(parts) != 3:
        raise ValueError("expected 'm n | upper pairs | lower pairs'")
    head = parts[0].split()
    if len(head) != 2:
        raise ValueError("expected two integers m n before the first '|'")
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ValueError(f"bad m n: {parts[0]!r}") from exc
    return HParams(m, n, _parse_pairs(parts[1]), _parse_pairs(parts[2]))


def format_hparams(h: HParams) -> str:
    up = ", ".join(f"{format_number(c)}:{format_number(s)}" for c, s in h.upper)
    lo = ", ".join(f"{format_number(c)}:{format_number(s)}" for c, s in h.lower)
    return f"{h.m} {h.n} | {up} | {lo}"
