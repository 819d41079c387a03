"""Sign structure of the fundamental solution.

:func:`classify` is the closed-form decision table.  Three independent checks
back it up: the sign of the leading small-p term of the second derivative of
the Laplace-transformed radial profile (pure sign arithmetic), a
complete-monotonicity probe by divided differences, and a direct scan of
G(1, r) over a log grid.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .hcore import GammaPair, HParams, as_fraction, derived_params
from .heval import eval_auto
from .kernel import KernelPoint, KernelRangeError, beta2_instance, g_eval
from .mittag import ml_neg
from .specfun import gamma_sign

__all__ = [
    "Verdict",
    "CaseCode",
    "SignClass",
    "SignReport",
    "classify",
    "psi_tilde",
    "psi_tilde_second",
    "psi_tilde_macdonald",
    "residue_sign_analysis",
    "cm_probe",
    "sign_scan",
    "full_report",
    "TOL_CM",
]

#: Relative threshold for the divided-difference sign tests.
TOL_CM = 1e-9


class Verdict(enum.Enum):
    Positive = "POSITIVE"
    ChangesSign = "CHANGES_SIGN"


class CaseCode(enum.Enum):
    A_Subdiffusive = "A_Subdiffusive"
    A_OneD_BetaGeqAlpha = "A_OneD_BetaGeqAlpha"
    B_i_MultiD = "B_i_MultiD"
    B_ii_OneD_BetaLtAlpha = "B_ii_OneD_BetaLtAlpha"


@dataclass(frozen=True)
class SignClass:
    verdict: Verdict
    case_code: CaseCode

    def __post_init__(self):
        positive = self.case_code.name.startswith("A_")
        if positive != (self.verdict is Verdict.Positive):
            raise ValueError(f"{self.case_code.value} is inconsistent with {self.verdict.value}")

    def __str__(self) -> str:
        return f"{self.verdict.value} {self.case_code.value}"


@dataclass(frozen=True)
class SignReport:
    classification: SignClass
    residue_sign: Optional[int]
    residue_has_log: bool
    cm_first_violation_order: Optional[int]
    scan_min_value: float
    scan_min_location: float
    consistent: bool
    problems: tuple[str, ...] = ()


def _check(alpha, beta, d) -> None:
    if not 0 < alpha < 2:
        raise KernelRangeError(f"alpha must lie in (0, 2), got {alpha}")
    if not 0 < beta <= 2:
        raise KernelRangeError(f"beta must lie in (0, 2], got {beta}")
    if int(d) != d or d < 1:
        raise KernelRangeError(f"d must be a positive integer, got {d}")


def classify(alpha: float, beta: float, d: int) -> SignClass:
    """Positive iff alpha <= 1, or d = 1 and beta >= alpha."""
    _check(alpha, beta, d)
    if alpha <= 1:
        return SignClass(Verdict.Positive, CaseCode.A_Subdiffusive)
    if d == 1 and beta >= alpha:
        return SignClass(Verdict.Positive, CaseCode.A_OneD_BetaGeqAlpha)
    if d >= 2:
        return SignClass(Verdict.ChangesSign, CaseCode.B_i_MultiD)
    return SignClass(Verdict.ChangesSign, CaseCode.B_ii_OneD_BetaLtAlpha)


# ---------------------------------------------------------------------------
# Laplace transform of the radial profile


@lru_cache(maxsize=128)
def _psi_tilde_params(alpha: float, beta: float, d: int, second: bool) -> HParams:
    a, b = as_fraction(alpha), as_fraction(beta)
    first_lower = GammaPair(2 if second else 0, 2 * a / b)
    return HParams(
        3, 1,
        [GammaPair(1, 2 / b), GammaPair(1, 2 * a / b)],
        [first_lower, GammaPair(Fraction(d, 2), 1), GammaPair(1, 2 / b), GammaPair(1, 1)],
    )


def _psi_const(alpha, beta, d) -> float:
    return 4 * alpha / (beta * beta * math.gamma(d / 2))


def _psi_arg(alpha, beta, p) -> float:
    return math.exp(2 * alpha / beta * math.log(p)) / 4


def psi_tilde(alpha: float, beta: float, d: int, p: float, tol: float = 1e-13) -> float:
    """Laplace transform of the radial profile psi at p > 0 (an H^{31}_{24} function of p^{2 alpha/beta} / 4)."""
    _check(alpha, beta, d)
    if not p > 0:
        raise KernelRangeError("p must be positive")
    res = eval_auto(_psi_tilde_params(alpha, beta, d, False), _psi_arg(alpha, beta, p), tol)
    return _psi_const(alpha, beta, d) * res.value


def psi_tilde_second(alpha: float, beta: float, d: int, p: float, tol: float = 1e-13) -> float:
    """Second derivative of :func:`psi_tilde` in p, itself an H^{31}_{24} function times p^{-2}."""
    _check(alpha, beta, d)
    if not p > 0:
        raise KernelRangeError("p must be positive")
    res = eval_auto(_psi_tilde_params(alpha, beta, d, True), _psi_arg(alpha, beta, p), tol)
    return _psi_const(alpha, beta, d) * res.value / (p * p)


def psi_tilde_macdonald(alpha: float, d: int, p: float) -> float:
    """beta = 2 reduction: 2^{1-d/2} / Gamma(d/2) * p^{alpha d/4} K_{d/2}(p^{alpha/2})."""
    from scipy.special import kv

    x = p ** (alpha / 2)
    return 2 ** (1 - d / 2) / math.gamma(d / 2) * p ** (alpha * d / 4) * float(kv(d / 2, x))


# ---------------------------------------------------------------------------
# leading term of the second derivative


def _sign_of_gamma(x: Fraction) -> int:
    return gamma_sign(float(x))


def _leading_second_derivative(alpha, beta, d):
    """Sign, log flag and label of the dominant small-p term of psi_tilde''.

    After cancelling Gamma(2+x)/Gamma(1+x) = 1+x the Mellin kernel is
    (1 + 2 alpha s/beta) Gamma(d/2+s) Gamma(1+2s/beta) Gamma(-2s/beta) / Gamma(-s);
    its left poles are s = -d/2 - l and s = -beta/2 (1 + l).  Everything here
    is exact rational arithmetic plus sign counting, no gamma values.
    """
    a, b = as_fraction(alpha), as_fraction(beta)
    dd = Fraction(d)
    if dd == b:
        # double pole at -d/2; the z^{d/2} log z term has coefficient
        # -(beta/2)(1 - alpha)/Gamma(beta/2), and log z < 0 as p -> 0
        coeff_sign = -(1 if a < 1 else -1 if a > 1 else 0) * _sign_of_gamma(b / 2)
        return -coeff_sign, True, f"d=beta={format(float(b), 'g')} double pole"
    if dd < b and a * dd != b:
        # simple pole at -d/2: (1 - alpha d/beta) Gamma(1 - d/beta) Gamma(d/beta) / Gamma(d/2)
        sign = (1 if a * dd < b else -1) * _sign_of_gamma(1 - dd / b) \
            * _sign_of_gamma(dd / b) * _sign_of_gamma(dd / 2)
        label = "1-d 1<beta<alpha simple pole" if d == 1 and a > b else "simple pole at -d/2"
        return sign, False, label
    # simple pole at -beta/2 (beta < d, or the -d/2 residue vanishes because beta = alpha d):
    # (beta/2)(1 - alpha) Gamma((d - beta)/2) / Gamma(beta/2)
    sign = (1 if a < 1 else -1) * _sign_of_gamma((dd - b) / 2) * _sign_of_gamma(b / 2)
    if dd > b:
        label = "multi-d simple pole" if d >= 2 else "1-d beta<1 simple pole"
    else:
        label = "simple pole at -beta/2 (-d/2 residue vanishes)"
    return sign, False, label


def residue_sign_analysis(alpha: float, beta: float, d: int) -> tuple[int, bool, str]:
    """(sign, has_log, case_label) of the term of psi_tilde'' that dominates as p -> 0+.

    ``sign`` is the sign of that term itself (for a log term this includes the
    negative sign of log z).
    """
    _check(alpha, beta, d)
    if not 1 < alpha < 2:
        raise KernelRangeError(f"residue analysis needs alpha in (1, 2), got {alpha}")
    return _leading_second_derivative(alpha, beta, d)


# ---------------------------------------------------------------------------
# complete monotonicity probe


def _divided_differences(x: np.ndarray, y: np.ndarray, k: int):
    """k-th divided differences on consecutive stencils, and their rounding scale."""
    n = len(x)
    vals = np.empty(n - k)
    scale = np.empty(n - k)
    for i in range(n - k):
        xs = x[i : i + k + 1]
        # Lagrange form: f[x_0..x_k] = sum_j f_j / prod_{m != j} (x_j - x_m)
        w = np.array([1.0 / np.prod([xs[j] - xs[m] for m in range(k + 1) if m != j])
                      for j in range(k + 1)])
        terms = w * y[i : i + k + 1]
        vals[i] = terms.sum()
        scale[i] = np.abs(terms).sum()
    return vals, scale


def default_p_grid() -> np.ndarray:
    return np.geomspace(1e-4, 1e2, 64)


def cm_probe(alpha: float, beta: float, d: int, p_grid: Sequence[float] | None = None,
             max_order: int = 4) -> Optional[int]:
    """First order k at which (-1)^k times a k-th divided difference goes negative.

    For alpha > 1 the probed function is psi_tilde; for alpha <= 1 it is
    R -> E_alpha(-R^{beta/2}) (t = 1), whose complete monotonicity is the
    positivity certificate in that range.  Returns None if every order up to
    ``max_order`` passes.
    """
    _check(alpha, beta, d)
    grid = default_p_grid() if p_grid is None else np.asarray(p_grid, dtype=float)
    if len(grid) < 64 or grid[-1] / grid[0] < 1e6 - 1e-6:
        raise ValueError("p_grid needs at least 64 points spanning at least 6 decades")
    if not 0 <= max_order <= 8:
        raise ValueError("max_order must lie in [0, 8]")
    grid = np.sort(grid)
    if alpha > 1:
        values = np.array([psi_tilde(alpha, beta, d, float(p)) for p in grid])
    else:
        values = np.array([ml_neg(alpha, float(p) ** (beta / 2)) for p in grid])
    for k in range(max_order + 1):
        if k == 0:
            signed, scale = values, np.abs(values)
        else:
            dv, scale = _divided_differences(grid, values, k)
            signed = (-1) ** k * dv
        if np.any(signed < -TOL_CM * scale):
            return k
    return None


# ---------------------------------------------------------------------------
# direct sign scan


def _scan_r_max(alpha: float, beta: float, d: int, r_hi: float) -> float:
    """Cap the scan where G underflows (beta = 2 decays like exp(-D (z/delta)^{1/D}))."""
    if beta != 2:
        return r_hi
    der = derived_params(beta2_instance(alpha, d))
    # D (z/delta)^{1/D} <= 600  with  z = r^2 / 4
    z_max = der.delta * (600.0 / der.big_d) ** der.big_d
    return min(r_hi, 2.0 * math.sqrt(z_max))


def _g1(alpha, beta, d, r) -> float:
    return g_eval(KernelPoint(alpha, beta, d, 1.0, r)).value


def sign_scan(alpha: float, beta: float, d: int, r_range=(1e-4, 1e4), n: int = 400) -> tuple[float, float]:
    """(min G(1, r), argmin r) over a log grid, refined by three bisection passes."""
    _check(alpha, beta, d)
    if n < 100:
        raise ValueError("sign_scan needs at least 100 radii")
    lo, hi = r_range
    hi = _scan_r_max(alpha, beta, d, hi)
    rs = np.geomspace(lo, hi, n)
    gs = np.array([_g1(alpha, beta, d, float(r)) for r in rs])
    i = int(np.argmin(gs))
    best_r, best_g = float(rs[i]), float(gs[i])
    left = float(rs[max(i - 1, 0)])
    right = float(rs[min(i + 1, n - 1)])
    for _ in range(3):
        # bisect both half-brackets (in log r) and keep the lowest of the three points
        cands = [math.sqrt(left * best_r), math.sqrt(best_r * right)]
        vals = [_g1(alpha, beta, d, c) for c in cands]
        j = int(np.argmin(vals))
        if vals[j] < best_g:
            if j == 0:
                right = best_r
            else:
                left = best_r
            best_r, best_g = cands[j], vals[j]
        else:
            left, right = cands[0], cands[1]
    return best_g, best_r


# ---------------------------------------------------------------------------


def full_report(alpha: float, beta: float, d: int, p_grid=None, scan_n: int = 400) -> SignReport:
    """Classification plus the three numeric checks; disagreements are recorded, never hidden."""
    cls = classify(alpha, beta, d)
    problems = []
    res_sign, has_log = None, False
    if alpha > 1:
        res_sign, has_log, _ = residue_sign_analysis(alpha, beta, d)
    cm = cm_probe(alpha, beta, d, p_grid, max_order=4)
    smin, sloc = sign_scan(alpha, beta, d, n=scan_n)
    if cls.verdict is Verdict.ChangesSign:
        if res_sign != -1:
            problems.append(f"residue sign {res_sign} but verdict CHANGES_SIGN")
        if cm is None or cm > 2:
            problems.append(f"cm probe violation order {cm} but verdict CHANGES_SIGN")
        if not smin < -1e-12:
            problems.append(f"scan minimum {smin:.3g} but verdict CHANGES_SIGN")
    else:
        if res_sign is not None and res_sign != 1:
            problems.append(f"residue sign {res_sign} but verdict POSITIVE")
        if cm is not None:
            problems.append(f"cm probe violation at order {cm} but verdict POSITIVE")
        if not smin > 0:
            problems.append(f"scan minimum {smin:.3g} but verdict POSITIVE")
    return SignReport(cls, res_sign, has_log, cm, smin, sloc, not problems, tuple(problems))
