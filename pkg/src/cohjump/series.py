"""Truncated power series of degree +1 operators on a graded complex.

``P(t) = P_0 + t P_1 + ... + t^N P_N`` with ``P_0`` the differential of the
underlying complex.  The deformed differential is square-zero through order
``N`` when ``sum_{i+j=n} P_i P_j = 0`` for every ``n <= N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import IntegrabilityFailure, ShapeMismatch
from .hodge import GradedComplex

DEFAULT_INTEGRABILITY_TOL = 1e-9


@dataclass(frozen=True)
class OperatorSeries:
    complex: GradedComplex
    order: int
    coeffs: tuple[Mapping[int, np.ndarray], ...]  # P_1 .. P_N

    def coeff(self, k: int, q: int) -> np.ndarray:
        """``P_k`` restricted to ``C^q``; zero beyond the truncation order."""
        cx = self.complex
        if k == 0:
            return cx.d(q)
        if k <= self.order and q in self.coeffs[k - 1]:
            return self.coeffs[k - 1][q]
        return np.zeros((cx.dim(q + 1), cx.dim(q)), dtype=complex)

    def at(self, t: complex, q: int) -> np.ndarray:
        """The polynomial ``sum_k t^k P_k`` on ``C^q``."""
        out = np.array(self.complex.d(q), dtype=complex)
        for k in range(1, self.order + 1):
            out = out + t**k * self.coeff(k, q)
        return out

    def scale(self) -> float:
        """Largest spectral norm among all coefficients (at least 1)."""
        best = 1.0
        for k in range(self.order + 1):
            for q in self.complex.degrees:
                m = self.coeff(k, q)
                if m.size:
                    best = max(best, float(np.linalg.norm(m, 2)))
        return best

    def truncated(self, order: int) -> "OperatorSeries":
        return OperatorSeries(self.complex, order, tuple(self.coeffs[:order]) + tuple(
            {} for _ in range(max(0, order - self.order))
        ))


def operator_series(
    cx: GradedComplex, coeffs: Sequence[Mapping[int, object]]
) -> OperatorSeries:
    """Assemble an :class:`OperatorSeries` from per-order ``{degree: matrix}`` maps."""
    out = []
    for k, block in enumerate(coeffs, start=1):
        mats = {}
        for key, m in block.items():
            q = int(key)
            shape = (cx.dim(q + 1), cx.dim(q))
            arr = np.asarray(m, dtype=complex)
            if arr.size == 0 and shape[0] * shape[1] == 0:
                continue
            if arr.shape != shape:
                raise ShapeMismatch(f"P_{k} at degree {q}: expected {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ShapeMismatch(f"P_{k} at degree {q}: non-finite entries")
            arr.setflags(write=False)
            mats[q] = arr
        out.append(mats)
    return OperatorSeries(cx, len(out), tuple(out))


@dataclass(frozen=True)
class IntegrabilityReport:
    residuals: tuple[float, ...]  # index n = 0..N
    worst_degree: tuple[int | None, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals)

    @property
    def first_failure(self) -> int | None:
        for n, r in enumerate(self.residuals):
            if r > self.tol:
                return n
        return None


def check_integrability(
    P: OperatorSeries, tol: float = DEFAULT_INTEGRABILITY_TOL, raise_on_fail: bool = False
) -> IntegrabilityReport:
    """Residual of ``sum_{i+j=n} P_i P_j`` for each order ``n <= N``.

    The tolerance is relative to ``P.scale()**2``.
    """
    cx = P.complex
    scaled = tol * P.scale() ** 2
    residuals, where = [], []
    for n in range(P.order + 1):
        worst, at = 0.0, None
        for q in range(cx.q_min, cx.q_max - 1):
            acc = np.zeros((cx.dim(q + 2), cx.dim(q)), dtype=complex)
            for i in range(n + 1):
                acc += P.coeff(i, q + 1) @ P.coeff(n - i, q)
            r = float(np.max(np.abs(acc), initial=0.0))
            if r > worst:
                worst, at = r, q
        residuals.append(worst)
        where.append(at)
    report = IntegrabilityReport(tuple(residuals), tuple(where), scaled)
    if raise_on_fail and not report.passed:
        n = report.first_failure
        raise IntegrabilityFailure(n, where[n], residuals[n])
    return report


def gauge_transform(P: OperatorSeries, g: "Sequence[Mapping[int, object]]") -> OperatorSeries:
    """Conjugate ``P(t)`` by ``g(t) = Id + t g_1 + t^2 g_2 + ...``, truncated at ``P.order``.

    ``g[k-1][q]`` is the square matrix ``g_k`` on ``C^q``.  The result is
    ``g(t)^{-1} P(t) g(t)`` degree by degree; ``P_0`` is unchanged.
    """
    cx, N = P.complex, P.order

    def gk(k, q):
        if k == 0:
            return np.eye(cx.dim(q), dtype=complex)
        if k <= len(g) and q in g[k - 1]:
            return np.asarray(g[k - 1][q], dtype=complex)
        return np.zeros((cx.dim(q), cx.dim(q)), dtype=complex)

    inv: dict[int, list[np.ndarray]] = {}
    for q in range(cx.q_min, cx.q_max + 1):
        h = [np.eye(cx.dim(q), dtype=complex)]
        for n in range(1, N + 1):
            h.append(-sum((gk(k, q) @ h[n - k] for k in range(1, n + 1)),
                          np.zeros((cx.dim(q), cx.dim(q)), dtype=complex)))
        inv[q] = h

    coeffs = []
    for n in range(1, N + 1):
        block = {}
        for q in range(cx.q_min, cx.q_max):
            acc = np.zeros((cx.dim(q + 1), cx.dim(q)), dtype=complex)
            for a in range(n + 1):
                for b in range(n + 1 - a):
                    acc += inv[q + 1][a] @ P.coeff(b, q) @ gk(n - a - b, q)
            block[q] = acc
        coeffs.append(block)
    return OperatorSeries(cx, N, tuple(coeffs))
