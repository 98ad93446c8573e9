"""Finite cochain complexes with inner products and their Hodge decomposition.

A :class:`GradedComplex` is a finite sequence of complex vector spaces
``C^q`` (``q_min <= q <= q_max``) with differentials ``d^q : C^q -> C^{q+1}``
and Hermitian metrics.  :func:`hodge_data` computes the adjoint
differential, the Laplacian, the harmonic projector and the Green operator
in every degree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import DegreeOutOfRange, NonHermitianMetric, ShapeMismatch, SquareNonzero

DEFAULT_RANK_TOL = 1e-10
DEFAULT_VALIDATION_TOL = 1e-9


def _norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class GradedComplex:
    """Validated finite cochain complex.  Build it with :func:`validate_complex`."""

    q_min: int
    dims: tuple[int, ...]
    differential: Mapping[int, np.ndarray]
    inner_products: Mapping[int, np.ndarray]

    @property
    def q_max(self) -> int:
        return self.q_min + len(self.dims) - 1

    @property
    def degrees(self) -> range:
        return range(self.q_min, self.q_max + 1)

    def dim(self, q: int) -> int:
        if q < self.q_min or q > self.q_max:
            return 0
        return self.dims[q - self.q_min]

    def d(self, q: int) -> np.ndarray:
        """Differential ``C^q -> C^{q+1}`` (an empty matrix outside the range)."""
        if q in self.differential:
            return self.differential[q]
        return np.zeros((self.dim(q + 1), self.dim(q)), dtype=complex)

    def metric(self, q: int) -> np.ndarray:
        if q in self.inner_products:
            return self.inner_products[q]
        return np.eye(self.dim(q), dtype=complex)

    def euler_characteristic(self) -> int:
        return sum((-1) ** q * self.dim(q) for q in self.degrees)

    def check_degree(self, q: int) -> None:
        if q < self.q_min or q > self.q_max:
            raise DegreeOutOfRange(
                f"degree {q} outside complex range [{self.q_min}, {self.q_max}]"
            )


def _as_matrix(a, shape: tuple[int, int], what: str) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.size == 0 and shape[0] * shape[1] == 0:
        return np.zeros(shape, dtype=complex)
    if m.ndim != 2 or m.shape != shape:
        raise ShapeMismatch(f"{what}: expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeMismatch(f"{what}: non-finite entries")
    return m


def validate_complex(
    dims: Sequence[int],
    differential: Mapping[int, object] | None = None,
    inner_products: Mapping[int, object] | None = None,
    q_min: int = 0,
    tol: float = DEFAULT_VALIDATION_TOL,
) -> GradedComplex:
    """Check shapes, ``d∘d = 0`` and the metrics, and return a :class:`GradedComplex`.

    Missing differentials are zero maps; missing metrics are identities.
    ``d^{q+1} d^q`` is accepted when its entries are at most
    ``tol * max(1, |d^{q+1}| |d^q|)``.
    """
    dims = tuple(int(n) for n in dims)
    if not dims or any(n < 0 for n in dims):
        raise ShapeMismatch(f"dims must be a nonempty list of nonnegative integers: {dims}")
    q_max = q_min + len(dims) - 1

    def dim(q):
        return dims[q - q_min] if q_min <= q <= q_max else 0

    diff: dict[int, np.ndarray] = {}
    for key, mat in (differential or {}).items():
        q = int(key)
        if not (q_min <= q < q_max):
            if np.asarray(mat).size:
                raise ShapeMismatch(f"differential given at degree {q} with no target")
            continue
        diff[q] = _as_matrix(mat, (dim(q + 1), dim(q)), f"differential[{q}]")
    for q in range(q_min, q_max):
        diff.setdefault(q, np.zeros((dim(q + 1), dim(q)), dtype=complex))

    metrics: dict[int, np.ndarray] = {}
    for key, mat in (inner_products or {}).items():
        q = int(key)
        if not (q_min <= q <= q_max):
            raise ShapeMismatch(f"metric given at degree {q} outside the complex")
        m = _as_matrix(mat, (dim(q), dim(q)), f"metric[{q}]")
        scale = max(1.0, _norm(m))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol * scale:
            raise NonHermitianMetric(f"metric at degree {q} is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if m.size and np.min(np.linalg.eigvalsh(m)) <= 0:
            raise NonHermitianMetric(f"metric at degree {q} is not positive definite")
        metrics[q] = m
    for q in range(q_min, q_max + 1):
        metrics.setdefault(q, np.eye(dim(q), dtype=complex))

    for q in range(q_min, q_max - 1):
        comp = diff[q + 1] @ diff[q]
        res = float(np.max(np.abs(comp), initial=0.0))
        if res > tol * max(1.0, _norm(diff[q + 1]) * _norm(diff[q])):
            raise SquareNonzero(q, res)

    for m in list(diff.values()) + list(metrics.values()):
        m.setflags(write=False)
    return GradedComplex(q_min, dims, diff, metrics)


@dataclass(frozen=True)
class HodgeData:
    """Adjoint, Laplacian, harmonic projector and Green operator per degree.

    ``harmonic_basis[q]`` has orthonormal columns (for the metric of degree
    ``q``) spanning ``ker Δ^q``.
    """

    adjoint: Mapping[int, np.ndarray]
    laplacian: Mapping[int, np.ndarray]
    harmonic_projector: Mapping[int, np.ndarray]
    green: Mapping[int, np.ndarray]
    harmonic_basis: Mapping[int, np.ndarray]
    rank_tol: float
    near_threshold: tuple[str, ...] = field(default=())

    def h(self, q: int) -> np.ndarray:
        return self.harmonic_projector[q]

    def codiff_green(self, q: int) -> np.ndarray:
        """``d* G`` on degree ``q``, landing in degree ``q - 1``."""
        return self.adjoint[q] @ self.green[q]


def hodge_data(cx: GradedComplex, rank_tol: float = DEFAULT_RANK_TOL) -> HodgeData:
    """Hodge decomposition of every degree.

    Work in coordinates orthonormal for the metrics (``M_q = L_q L_q^H``):
    there ``d~^q = L_{q+1}^H d^q L_q^{-H}``, the adjoint is the conjugate
    transpose and ``Δ~`` is Hermitian, so ``eigh`` applies directly.  Results
    are mapped back with ``X = L_p^{-H} X~ L_q^H``.
    """
    low = {q: np.linalg.cholesky(cx.metric(q)) if cx.dim(q) else np.zeros((0, 0), dtype=complex)
           for q in range(cx.q_min - 1, cx.q_max + 2)}

    def to_tilde(mat, p, q):  # L_p^H X L_q^{-H}
        if mat.size == 0:
            return np.zeros(mat.shape, dtype=complex)
        right = scipy.linalg.solve_triangular(low[q], mat.conj().T, lower=True).conj().T
        return low[p].conj().T @ right

    def from_tilde(mat, p, q):  # L_p^{-H} X~ L_q^H
        if mat.size == 0:
            return np.zeros(mat.shape, dtype=complex)
        return scipy.linalg.solve_triangular(low[p].conj().T, mat @ low[q].conj().T, lower=False)

    dt = {q: to_tilde(np.asarray(cx.d(q), dtype=complex), q + 1, q) for q in range(cx.q_min - 1, cx.q_max + 1)}

    # d*^q = M_{q-1}^{-1} (d^{q-1})^H M_q
    adjoint = {q: from_tilde(dt[q - 1].conj().T, q - 1, q) for q in range(cx.q_min, cx.q_max + 2)}

    laplacian, proj, green, basis = {}, {}, {}, {}
    notes = []
    for q in cx.degrees:
        n = cx.dim(q)
        if n == 0:
            empty = np.zeros((0, 0), dtype=complex)
            laplacian[q], proj[q], green[q], basis[q] = empty, empty, empty, empty
            continue
        sym = dt[q - 1] @ dt[q - 1].conj().T + dt[q].conj().T @ dt[q]
        sym = 0.5 * (sym + sym.conj().T)
        evals, evecs = np.linalg.eigh(sym)
        top = float(evals[-1])
        thresh = rank_tol * top
        zero = evals <= thresh if top > 0 else np.ones_like(evals, dtype=bool)
        if top > 0:
            close = (evals > thresh / 100) & (evals < thresh * 100)
            if np.any(close):
                notes.append(f"degree {q}: Laplacian eigenvalue near rank threshold")
                warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        u0 = evecs[:, zero]
        inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, evals))
        laplacian[q] = from_tilde(sym, q, q)
        proj[q] = from_tilde(u0 @ u0.conj().T, q, q)
        green[q] = from_tilde((evecs * inv) @ evecs.conj().T, q, q)
        basis[q] = scipy.linalg.solve_triangular(low[q].conj().T, u0, lower=False)

    for group in (adjoint, laplacian, proj, green, basis):
        for m in group.values():
            m.setflags(write=False)
    return HodgeData(adjoint, laplacian, proj, green, basis, rank_tol, tuple(notes))


def cohomology_basis(cx: GradedComplex, hd: HodgeData, q: int) -> list[np.ndarray]:
    """Orthonormal harmonic representatives of ``H^q``."""
    cx.check_degree(q)
    b = hd.harmonic_basis[q]
    return [b[:, i].copy() for i in range(b.shape[1])]


def betti(cx: GradedComplex, hd: HodgeData) -> dict[int, int]:
    return {q: int(hd.harmonic_basis[q].shape[1]) for q in cx.degrees}


def hodge_residuals(cx: GradedComplex, hd: HodgeData) -> dict[str, float]:
    """Largest residual of each Hodge identity over all degrees.

    Residuals are operator norms induced by the inner products: for
    ``X : C^q -> C^p`` the norm is ``|L_p^H X L_q^{-H}|_2`` with ``M = L L^H``.
    """
    worst = {
        "id_eq_h_plus_lap_green": 0.0,
        "id_eq_h_plus_green_lap": 0.0,
        "h_green": 0.0,
        "h_idempotent": 0.0,
        "h_selfadjoint": 0.0,
        "d_green_commute": 0.0,
        "adjoint_green_commute": 0.0,
        "h_d_zero": 0.0,
    }
    chol = {q: np.linalg.cholesky(cx.metric(q)) for q in cx.degrees if cx.dim(q)}

    def mnorm(mat, p, q):
        if mat.size == 0:
            return 0.0
        right = scipy.linalg.solve_triangular(chol[q], mat.conj().T, lower=True).conj().T  # X L_q^{-H}
        return _norm(chol[p].conj().T @ right)

    def bump(key, mat, p, q):
        worst[key] = max(worst[key], mnorm(mat, p, q))

    for q in cx.degrees:
        n = cx.dim(q)
        if n == 0:
            continue
        eye = np.eye(n)
        h, g, lap, m = hd.harmonic_projector[q], hd.green[q], hd.laplacian[q], cx.metric(q)
        bump("id_eq_h_plus_lap_green", eye - h - lap @ g, q, q)
        bump("id_eq_h_plus_green_lap", eye - h - g @ lap, q, q)
        bump("h_green", h @ g, q, q)
        bump("h_green", g @ h, q, q)
        bump("h_idempotent", h @ h - h, q, q)
        bump("h_selfadjoint", h - np.linalg.solve(m, h.conj().T @ m), q, q)
        if q + 1 <= cx.q_max and cx.dim(q + 1):
            dq = cx.d(q)
            bump("d_green_commute", dq @ g - hd.green[q + 1] @ dq, q + 1, q)
            bump("adjoint_green_commute", hd.adjoint[q + 1] @ hd.green[q + 1] - g @ hd.adjoint[q + 1], q, q + 1)
            bump("h_d_zero", hd.harmonic_projector[q + 1] @ dq, q + 1, q)
            bump("h_d_zero", dq @ h, q + 1, q)
    return worst
