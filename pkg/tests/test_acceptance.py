"""Acceptance criteria, one test each; every test also prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from foxh import verify
from foxh.kernel import KernelPoint, g_eval
from foxh.positivity import Verdict, classify


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def worst_failures(res, k=3) -> str:
    bad = [c for c in res.checks if not c.passed][:k]
    return "; ".join(f"{c.name}: {c.measured:.3g} > {c.threshold:.3g}" for c in bad)


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_criterion_1_closed_forms():
    radii = np.geomspace(1e-3, 1e3, 12)
    t0 = time.perf_counter()
    worst = 0.0
    for d in (1, 2, 3):
        for r in radii:
            ref = (4 * math.pi) ** (-d / 2) * math.exp(-r * r / 4)
            got = g_eval(KernelPoint(1.0, 2.0, d, 1.0, float(r)), route="h").value
            worst = max(worst, abs(got - ref) / max(ref, 1e-300))
    for b in (0.5, 1.0, 1.5):
        s, c = math.sin(math.pi * b / 2), math.cos(math.pi * b / 2)
        for r in radii:
            ref = r ** (b - 1) * s / (1 + 2 * r**b * c + r ** (2 * b)) / math.pi
            got = g_eval(KernelPoint(b, b, 1, 1.0, float(r)), route="h").value
            worst = max(worst, abs(got - ref) / ref)
    secs = time.perf_counter() - t0
    ok = worst <= 1e-8 and secs < 10
    report(1, "closed-form oracles", ok, f"worst rel err {worst:.2e}, {secs:.1f} s")
    assert ok


def test_criterion_2_cross_method():
    res, secs = timed(verify.cross_method)
    ok = res.passed and len(res.checks) == 100 and secs < 60
    worst = max(c.measured / c.threshold for c in res.checks)
    report(2, "series vs contour agreement", ok,
           f"{res.n_passed}/{len(res.checks)} pairs, worst diff/bound {worst:.3f}, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_3_rewrite_chains():
    res, secs = timed(verify.rewrite_chains)
    kinds = {c.name.split(" alpha")[0] for c in res.checks}
    ok = res.passed and kinds == {"beta=2 reduction", "Fourier chain", "Laplace chain"} and secs < 10
    worst = max(c.measured for c in res.checks)
    report(3, "rewrite chain soundness", ok, f"{res.n_passed}/{len(res.checks)} chains, worst {worst:.2e}, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_4_sign_grid():
    res, secs = timed(verify.positivity_grid)
    ok = res.passed and len(res.checks) == len(verify.GRID) and secs < 180
    report(4, "sign classification grid consistency", ok,
           f"{res.n_passed}/{len(res.checks)} points consistent, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_5_mass():
    res, secs = timed(verify.mass)
    worst = max(c.measured for c in res.checks)
    ok = res.passed and len(res.checks) == len(verify.GRID)
    report(5, "signed mass equals one", ok, f"{res.n_passed}/{len(res.checks)} points, worst |m-1| {worst:.2e}, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_6_fourier():
    verdicts = {classify(a, b, d).verdict for a, b in verify.FOURIER_PAIRS for d in (1, 3)}
    res, secs = timed(verify.fourier)
    worst = max(c.measured for c in res.checks)
    ok = res.passed and len(res.checks) == 12 and verdicts == set(Verdict)
    report(6, "Fourier transform is E_alpha(-xi^beta t^alpha)", ok,
           f"{res.n_passed}/{len(res.checks)} cases, worst abs err {worst:.2e}, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_7_asymptotics():
    res, secs = timed(verify.asymptotics)
    kinds = {c.name.split(" alpha")[0] for c in res.checks}
    ok = res.passed and kinds == {"tail slope", "small-R ratio", "Mittag-Leffler tail"}
    report(7, "asymptotic laws", ok, f"{res.n_passed}/{len(res.checks)} checks, {secs:.1f} s")
    assert ok, worst_failures(res)


def test_criterion_8_subordination():
    res, secs = timed(verify.subordination)
    worst = max(c.measured for c in res.checks)
    ok = res.passed and len(res.checks) == 6
    report(8, "subordination integral", ok, f"{res.n_passed}/{len(res.checks)} points, worst {worst:.2e}, {secs:.1f} s")
    assert ok, worst_failures(res)


if __name__ == "__main__":
    pytest.main([__file__, "-q"])
