"""Acceptance suite: the eight release criteria at their stated tolerances.

Each criterion is a plain function returning ``(passed, detail)`` so the suite
also runs without pytest (``python3 tests/test_acceptance.py``).  Under pytest
the outcome of every criterion is collected in ``RESULTS`` and printed as one
line per criterion by the terminal-summary hook in ``conftest.py``.
"""

from __future__ import annotations

import io
import sys
import time
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from cohjump.cli import main  # noqa: E402
from cohjump.dgla import fixed_point_residual, kuranishi_solve, mc_residual  # noqa: E402
from cohjump.hodge import betti, hodge_data, hodge_residuals  # noqa: E402
from cohjump.jump import (  # noqa: E402
    closedness_residuals,
    extend_class,
    extension_fixed_point_residual,
    extension_side,
    jump_verdict,
    obstruction_of,
    truncated_differential,
    truncated_side,
)
from cohjump.models.fixtures import DGLA_FIXTURES, JUMP_FIXTURES  # noqa: E402
from cohjump.oracle import SampleSpec, jump_oracle  # noqa: E402
from support import GOLDEN_DIR, fixture_path, load_fixture, random_complex, rank  # noqa: E402

N = 6
TITLES = {
    1: "Hodge identity suite",
    2: "Kuranishi fixed-point suite",
    3: "Extension recursion suite",
    4: "Obstruction consistency",
    5: "Jump verdict vs oracle cross-validation",
    6: "Semicontinuity guard",
    7: "Well-definedness on exact cochains",
    8: "CLI golden reports",
}
RESULTS: dict[int, tuple[bool, str]] = {}


def _series(name):
    P = load_fixture(name).series(N)
    return P, hodge_data(P.complex)


# -- criteria ----------------------------------------------------------------------

def criterion_1():
    """200 random complexes, every Hodge identity within 1e-9, in at most 10 s."""
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst, betti_ok = 0.0, True
    for _ in range(200):
        cx, expected = random_complex(rng, max_degrees=5, max_dim=6)
        hd = hodge_data(cx)
        worst = max(worst, max(hodge_residuals(cx, hd).values()))
        b = betti(cx, hd)
        brute = {q: cx.dim(q) - rank(cx.d(q)) - rank(cx.d(q - 1)) for q in cx.degrees}
        betti_ok &= b == expected == brute
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and betti_ok and dt <= 10.0
    return ok, f"worst residual {worst:.1e} (<= 1e-9), betti match {betti_ok}, {dt:.2f}s (<= 10s)"


def criterion_2():
    """Kuranishi output solves the fixed-point equation; MC holds when unobstructed."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_fp, worst_mc, abelian_exact, solves = 0.0, 0.0, True, 0
    for name in sorted(set(DGLA_FIXTURES) | {"dgla-adjoint"}):
        L = load_fixture(name).dgla
        basis = L.hodge.harmonic_basis[1]
        directions = [basis[:, i] for i in range(basis.shape[1])]
        for _ in range(3):
            if basis.shape[1]:
                c = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
                directions.append(basis @ c)
        for xi in directions:
            sol = kuranishi_solve(L, xi, N)
            solves += 1
            worst_fp = max(worst_fp, fixed_point_residual(L, xi, sol.series))
            if sol.first_obstruction() is None:
                worst_mc = max(worst_mc, max(float(np.linalg.norm(r)) for r in mc_residual(L, sol.series)))
            if name == "dgla-abelian":
                x = sol.series
                abelian_exact &= np.array_equal(x.coeff(1), xi) and all(
                    not np.any(x.coeff(n)) for n in range(2, N + 1)
                )
    dt = time.perf_counter() - t0
    ok = worst_fp <= 1e-9 and worst_mc <= 1e-9 and abelian_exact and dt <= 5.0
    return ok, (f"{solves} solves: fixed-point {worst_fp:.1e}, MC {worst_mc:.1e} (<= 1e-9), "
                f"abelian x = t xi exactly {abelian_exact}, {dt:.2f}s (<= 5s)")


def criterion_3():
    """Extensions satisfy the fixed-point equation and stay closed below the obstruction."""
    t0 = time.perf_counter()
    worst_fp, worst_closed, count = 0.0, 0.0, 0
    for name in sorted(JUMP_FIXTURES):
        P, hd = _series(name)
        ref = P.scale()
        for q in P.complex.degrees:
            basis = hd.harmonic_basis[q]
            for i in range(basis.shape[1]):
                ext = extend_class(P, hd, basis[:, i], q, N)
                count += 1
                worst_fp = max(worst_fp, extension_fixed_point_residual(P, hd, ext))
                res = closedness_residuals(P, ext)
                worst_closed = max([worst_closed] + [r / ref for r in res[: ext.certified_order + 1]])
    dt = time.perf_counter() - t0
    ok = worst_fp <= 1e-9 and worst_closed <= 1e-9 and dt <= 5.0
    return ok, (f"{count} extensions: fixed-point {worst_fp:.1e}, closedness {worst_closed:.1e} (<= 1e-9), "
                f"{dt:.2f}s (<= 5s)")


def criterion_4():
    """Harmonic criterion and truncated-complex obstruction agree through order 6."""
    bad = []
    checks = 0
    for name in sorted(JUMP_FIXTURES):
        P, hd = _series(name)
        for q in P.complex.degrees:
            checks += 1
            a, _ = extension_side(P, hd, q, N)
            b, _ = truncated_side(P, hd, q, N)
            if a != b:
                bad.append(f"{name} q={q}: {a} vs {b}")
    return not bad, f"{checks} (fixture, degree) pairs, disagreements: {bad or 'none'}"


def criterion_5():
    """``jump_verdict`` at order 6 agrees with the oracle in every degree."""
    t0 = time.perf_counter()
    spec = SampleSpec(count=8, seed=0)
    bad, checks = [], 0
    for name in sorted(JUMP_FIXTURES):
        P, hd = _series(name)
        for q in P.complex.degrees:
            checks += 1
            v = jump_verdict(P, hd, q, N)
            o = jump_oracle(P, q, spec)
            if v.jump != o.jumps:
                bad.append(f"{name} q={q}")
    # the two-term toy model jumps in both degrees at order 1, once on each side
    P, hd = _series("toy")
    v0, v1 = jump_verdict(P, hd, 0, N), jump_verdict(P, hd, 1, N)
    toy_ok = (v0.describe() == "Jump{ExtensionObstruction(0), order 1}"
              and v1.describe() == "Jump{ExactnessObstruction(0), order 1}")
    P, hd = _series("trivial")
    trivial_ok = not any(jump_verdict(P, hd, q, N).jump for q in P.complex.degrees)
    P, hd = _series("order-two")
    order_two = jump_verdict(P, hd, 0, N).order
    required = {"trivial", "toy", "order-two"} <= set(JUMP_FIXTURES) and any(
        n.startswith("iwasawa") for n in JUMP_FIXTURES
    )
    dt = time.perf_counter() - t0
    ok = not bad and toy_ok and trivial_ok and order_two == 2 and required and dt <= 60.0
    return ok, (f"{len(JUMP_FIXTURES)} fixtures, {checks} degrees, mismatches: {bad or 'none'}; "
                f"toy sides ok {toy_ok}, trivial no jump {trivial_ok}, order-two first order {order_two}, "
                f"{dt:.2f}s (<= 60s)")


def criterion_6():
    """dim at t = 0 bounds every sampled dimension."""
    bad, samples = [], 0
    for name in sorted(JUMP_FIXTURES):
        P, _ = _series(name)
        for q in P.complex.degrees:
            o = jump_oracle(P, q)
            samples += len(o.samples)
            if not o.semicontinuous or any(d > o.dim_at_zero for _, d in o.samples):
                bad.append(f"{name} q={q}")
    return not bad, f"{samples} samples, violations: {bad or 'none'}"


def criterion_7():
    """100 random exact truncated cochains per fixture map to (near) zero."""
    rng = np.random.default_rng(11)
    worst, total = 0.0, 0
    for name in sorted(JUMP_FIXTURES):
        P, hd = _series(name)
        cx = P.complex
        slots = [(q, n) for q in range(cx.q_min + 1, cx.q_max) for n in range(1, N + 1)
                 if cx.dim(q - 1) and cx.dim(q)]
        if not slots:
            continue
        for _ in range(100):
            q, n = slots[rng.integers(len(slots))]
            dm = truncated_differential(P, q - 1, n)
            beta = rng.standard_normal(dm.shape[1]) + 1j * rng.standard_normal(dm.shape[1])
            exact = dm @ beta
            scale = float(np.linalg.norm(exact))
            if scale == 0.0:
                continue
            total += 1
            worst = max(worst, float(np.linalg.norm(obstruction_of(P, hd, q, exact, n))) / scale)
    return worst <= 1e-8, f"{total} exact cochains, worst |O(exact)| / |exact| = {worst:.1e} (<= 1e-8)"


GOLDEN = {
    "toy-jump-verdict-q0.json": (["jump-verdict", "toy", "--degree", "0", "--order", "3"], 2),
    "trivial-jump-verdict-q1.json": (["jump-verdict", "trivial", "--degree", "1", "--order", "3"], 0),
    "toy-oracle-compare-q0.json": (["oracle-compare", "toy", "--degree", "0"], 0),
}


def criterion_8():
    """The three CLI examples reproduce their golden structured reports byte for byte."""
    import os

    saved = {k: os.environ.pop(k) for k in list(os.environ) if k.startswith("COHJUMP_")}
    bad = []
    try:
        for golden, (argv, code) in GOLDEN.items():
            argv = [argv[0], str(fixture_path(argv[1])), *argv[2:], "--format", "structured"]
            buf = io.StringIO()
            with redirect_stdout(buf):
                got = main(argv)
            if got != code or buf.getvalue() != (GOLDEN_DIR / golden).read_text(encoding="utf-8"):
                bad.append(golden)
    finally:
        os.environ.update(saved)
    return not bad, f"{len(GOLDEN)} reports, mismatches: {bad or 'none'}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in TITLES}


def line(i: int) -> str:
    ok, detail = RESULTS[i]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {i}: {TITLES[i]}: {detail}"


def _check(i: int):
    try:
        RESULTS[i] = CRITERIA[i]()
    except Exception as exc:  # recorded, then re-raised for pytest
        RESULTS[i] = (False, f"raised {type(exc).__name__}: {exc}")
        raise
    print(line(i))
    assert RESULTS[i][0], line(i)


@pytest.mark.parametrize("i", sorted(TITLES))
def test_acceptance(i):
    _check(i)


if __name__ == "__main__":
    failed = 0
    for i in sorted(TITLES):
        try:
            RESULTS[i] = CRITERIA[i]()
        except Exception as exc:
            RESULTS[i] = (False, f"raised {type(exc).__name__}: {exc}")
        print(line(i))
        failed += not RESULTS[i][0]
    sys.exit(1 if failed else 0)
