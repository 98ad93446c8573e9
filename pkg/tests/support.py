"""Shared helpers for the test suite: random complexes and fixture access."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from cohjump.hodge import validate_complex
from cohjump.modelfile import load

ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = ROOT / "fixtures"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.json"


def load_fixture(name: str):
    return load(fixture_path(name))


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_metric(rng, n, cond=1e3):
    """Hermitian positive-definite with condition number at most ``cond``."""
    if n == 0:
        return np.zeros((0, 0))
    u = random_unitary(rng, n)
    s = np.exp(rng.uniform(0.0, np.log(cond), n))
    return (u * s) @ u.conj().T


def random_invertible(rng, n):
    if n == 0:
        return np.zeros((0, 0))
    return random_unitary(rng, n) @ np.diag(np.exp(rng.uniform(-0.7, 0.7, n))) @ random_unitary(rng, n)


def random_complex(rng, max_degrees=5, max_dim=6, metrics=True, q_min=None):
    """Random complex obtained by conjugating a canonical one.

    Returns ``(cx, betti)`` where ``betti`` is known by construction.
    """
    k = int(rng.integers(1, max_degrees + 1))
    dims = [int(rng.integers(0, max_dim + 1)) for _ in range(k)]
    ranks = []
    prev = 0
    for q in range(k - 1):
        room = min(dims[q] - prev, dims[q + 1])
        r = int(rng.integers(0, max(room, 0) + 1))
        ranks.append(r)
        prev = r
    ranks.append(0)
    diff = {}
    incoming = [0] + ranks[:-1]
    a = [random_invertible(rng, d) for d in dims]
    for q in range(k - 1):
        m = np.zeros((dims[q + 1], dims[q]), dtype=complex)
        # canonical: the last ranks[q] basis vectors of C^q map onto the first of C^{q+1}
        for i in range(ranks[q]):
            m[i, dims[q] - ranks[q] + i] = 1.0
        diff[q] = a[q + 1] @ m @ np.linalg.inv(a[q]) if dims[q] else m
    betti = [dims[q] - ranks[q] - incoming[q] for q in range(k)]
    base = int(rng.integers(-1, 2)) if q_min is None else q_min
    inner = {base + q: random_metric(rng, dims[q]) for q in range(k)} if metrics else None
    diff = {base + q: m for q, m in diff.items()}
    return validate_complex(dims, diff, inner, q_min=base), {base + q: b for q, b in enumerate(betti)}


def rank(m, tol=1e-9):
    if m.size == 0:
        return 0
    return int(np.linalg.matrix_rank(m, tol=tol * max(1.0, np.linalg.norm(m, 2))))
