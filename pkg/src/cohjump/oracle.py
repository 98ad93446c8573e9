"""Brute-force cohomology dimensions of ``sum_k t^k P_k`` at sampled ``t``.

Independent of the obstruction machinery: ranks come straight from singular
values of the assembled matrices, with their own tolerance.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentSamples
from .series import OperatorSeries

DEFAULT_ORACLE_TOL = 1e-8


@dataclass(frozen=True)
class SampleSpec:
    count: int = 8
    low: float = 1e-3
    high: float = 1e-1
    seed: int = 0

    def points(self) -> list[complex]:
        rng = np.random.default_rng(self.seed)
        moduli = np.geomspace(self.low, self.high, self.count)
        phases = rng.uniform(0.0, 2 * np.pi, self.count)
        return [complex(r * np.exp(1j * p)) for r, p in zip(moduli, phases)]


def _rank(m: np.ndarray, tol: float) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    cut = tol * s[0]
    close = (s > cut / 10) & (s < cut * 10)
    if np.any(close):
        warnings.warn(
            f"singular value within a decade of the rank threshold ({cut:.1e})",
            RuntimeWarning,
            stacklevel=3,
        )
    return int(np.sum(s > cut))


def dims_at(P: OperatorSeries, t: complex, tol: float = DEFAULT_ORACLE_TOL) -> dict[int, int]:
    """``dim ker D_t^q - rank D_t^{q-1}`` for every degree ``q``."""
    if abs(t) > 1:
        warnings.warn(f"|t| = {abs(t):.3g} > 1: truncated series may be meaningless", RuntimeWarning)
    cx = P.complex
    ranks = {q: _rank(P.at(t, q), tol) for q in range(cx.q_min - 1, cx.q_max + 1)}
    return {q: cx.dim(q) - ranks[q] - ranks[q - 1] for q in cx.degrees}


@dataclass(frozen=True)
class OracleReport:
    degree: int
    dim_at_zero: int
    samples: tuple[tuple[complex, int], ...]
    generic_dim: int
    discordant: tuple[int, ...]  # indices into samples
    tol: float
    spec: SampleSpec

    @property
    def jumps(self) -> bool:
        return self.dim_at_zero > self.generic_dim

    @property
    def semicontinuous(self) -> bool:
        return self.dim_at_zero >= self.generic_dim


def jump_oracle(
    P: OperatorSeries,
    q: int,
    spec: SampleSpec | None = None,
    tol: float = DEFAULT_ORACLE_TOL,
) -> OracleReport:
    """Compare ``dim H^q`` at ``t = 0`` with its majority value over the samples.

    Raises :class:`InconsistentSamples` when no dimension reaches a strict
    majority.  A generic dimension above the central one breaks upper
    semicontinuity; it is reported with a warning and ``semicontinuous``
    set to False.
    """
    P.complex.check_degree(q)
    spec = spec or SampleSpec()
    at_zero = dims_at(P, 0.0, tol)[q]
    samples = tuple((t, dims_at(P, t, tol)[q]) for t in spec.points())
    votes = Counter(d for _, d in samples)
    generic, count = votes.most_common(1)[0]
    if 2 * count <= len(samples):
        raise InconsistentSamples(f"no majority among sampled dimensions of H^{q}: {dict(votes)}")
    discordant = tuple(i for i, (_, d) in enumerate(samples) if d != generic)
    report = OracleReport(q, at_zero, samples, generic, discordant, tol, spec)
    if not report.semicontinuous:
        warnings.warn(
            f"H^{q}: generic dimension {generic} exceeds central dimension {at_zero}; "
            "tolerance problem",
            RuntimeWarning,
        )
    return report
