"""Obstructions to the constancy of ``dim H^q`` along a one-parameter deformation.

Two routes compute the first obstruction:

* :func:`extend_class` runs the canonical (Kuranishi-gauge) recursion
  ``alpha^n = -d* G sum_{i<n} P_{n-i} alpha^i`` and watches the harmonic part
  of the order-``n`` failure term;
* :func:`obstruction_map_image` takes every closed cochain of the complex
  truncated mod ``t^n`` and projects its order-``n`` failure term to
  harmonics.

:func:`jump_verdict` combines the extension side in degree ``q`` with the
exactness side in degree ``q - 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotClosed, OrderExceedsTruncation, ShapeMismatch
from .hodge import GradedComplex, HodgeData
from .series import (
    DEFAULT_INTEGRABILITY_TOL,
    IntegrabilityReport,
    OperatorSeries,
    check_integrability,
    operator_series,
)

__all__ = [
    "OperatorSeries",
    "IntegrabilityReport",
    "check_integrability",
    "operator_series",
    "truncated_differential",
    "truncated_cohomology",
    "extend_class",
    "obstruction_map_image",
    "jump_verdict",
]

DEFAULT_OBSTRUCTION_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-10


def truncated_differential(P: OperatorSeries, q: int, n: int) -> np.ndarray:
    """Block lower-triangular matrix of ``sum_{k<n} t^k P_k`` on ``C^q ⊗ K[t]/(t^n)``.

    Block ``(r, s)`` is ``P_{r-s}``; coefficient vectors are stacked by
    increasing power of ``t``.
    """
    if n > P.order + 1:
        raise OrderExceedsTruncation(f"order {n} needs P_{n - 1}, series stops at P_{P.order}")
    cx = P.complex
    a, b = cx.dim(q + 1), cx.dim(q)
    out = np.zeros((n * a, n * b), dtype=complex)
    for r in range(n):
        for s in range(r + 1):
            out[r * a:(r + 1) * a, s * b:(s + 1) * b] = P.coeff(r - s, q)
    return out


def _svd_split(m: np.ndarray, rel_tol: float):
    """Return (rank, orthonormal range basis, orthonormal kernel basis)."""
    rows, cols = m.shape
    if m.size == 0:
        return 0, np.zeros((rows, 0), dtype=complex), np.eye(cols, dtype=complex)
    u, s, vh = np.linalg.svd(m)
    top = s[0] if s.size else 0.0
    r = int(np.sum(s > rel_tol * top)) if top > 0 else 0
    return r, u[:, :r], vh[r:, :].conj().T


@dataclass(frozen=True)
class TruncatedCohomology:
    degree: int
    order: int
    dim: int
    kernel_dim: int
    incoming_rank: int
    basis: np.ndarray  # columns: representatives in C^q ⊗ K[t]/(t^n)


def _block_metric(cx: GradedComplex, q: int, n: int) -> np.ndarray:
    m = cx.metric(q)
    return np.kron(np.eye(n), m) if m.size else np.zeros((0, 0), dtype=complex)


def truncated_cohomology(
    P: OperatorSeries, q: int, n: int, rank_tol: float = DEFAULT_RANK_TOL
) -> TruncatedCohomology:
    """``H^q`` of the complex with coefficients in ``K[t]/(t^n)``."""
    cx = P.complex
    cx.check_degree(q)
    if n < 1:
        raise ValueError("truncation order must be at least 1")
    out_mat = truncated_differential(P, q, n)
    in_mat = truncated_differential(P, q - 1, n)
    _, _, kernel = _svd_split(out_mat, rank_tol)
    r_in, image, _ = _svd_split(in_mat, rank_tol)
    w = _block_metric(cx, q, n)
    # representatives orthogonal to the incoming image
    if image.shape[1] and kernel.shape[1]:
        _, _, c = _svd_split(image.conj().T @ w @ kernel, rank_tol)
        basis = kernel @ c
    else:
        basis = kernel
    return TruncatedCohomology(q, n, kernel.shape[1] - r_in, kernel.shape[1], r_in, basis)


def _leading_term(P: OperatorSeries, q: int, coeffs: list[np.ndarray], n: int) -> np.ndarray:
    """``sum_{j<n} P_{n-j} alpha^j`` in ``C^{q+1}``."""
    acc = np.zeros(P.complex.dim(q + 1), dtype=complex)
    for j in range(min(n, len(coeffs))):
        acc += P.coeff(n - j, q) @ coeffs[j]
    return acc


def _is_nonzero(vec: np.ndarray, ref: float, tol: float) -> bool:
    return float(np.linalg.norm(vec)) > tol * ref


@dataclass(frozen=True)
class Extension:
    """Canonical extension ``alpha(t) = sum alpha^n t^n`` of a closed cochain.

    ``harmonic_parts[n-1]`` is ``H(sum_{i<n} P_{n-i} alpha^i)``.  Coefficients
    at and beyond ``obstructed_at`` are still computed but do not certify a
    closed extension.
    """

    degree: int
    coeffs: tuple[np.ndarray, ...]  # alpha^0 .. alpha^N
    harmonic_parts: tuple[np.ndarray, ...]  # h_1 .. h_N
    obstructed_at: int | None
    obstruction_witness: np.ndarray | None

    @property
    def base_class(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def certified_order(self) -> int:
        """Largest ``m`` with ``D_t alpha(t) = 0 mod t^{m+1}`` guaranteed."""
        return self.order if self.obstructed_at is None else self.obstructed_at - 1


def extend_class(
    P: OperatorSeries,
    hd: HodgeData,
    alpha: np.ndarray,
    q: int,
    N: int,
    obstruction_tol: float = DEFAULT_OBSTRUCTION_TOL,
    closed_tol: float = DEFAULT_INTEGRABILITY_TOL,
) -> Extension:
    """Solve ``alpha(t) + d* G (P(t) - P_0) alpha(t) = 0`` through order ``N``.

    ``obstructed_at`` is the least ``n`` whose harmonic part exceeds
    ``obstruction_tol`` relative to ``max(|failure term|, |alpha| * P.scale())``.
    """
    cx = P.complex
    cx.check_degree(q)
    if N > P.order:
        raise OrderExceedsTruncation(f"order {N} exceeds series truncation {P.order}")
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (cx.dim(q),):
        raise ShapeMismatch(f"class must have length {cx.dim(q)}")
    scale = P.scale()
    a_norm = float(np.linalg.norm(alpha))
    if float(np.linalg.norm(cx.d(q) @ alpha)) > closed_tol * max(1.0, a_norm) * scale:
        raise NotClosed(f"class is not closed in degree {q}")

    dg = hd.codiff_green(q + 1) if q + 1 <= cx.q_max else np.zeros((cx.dim(q), 0), dtype=complex)
    h_next = hd.h(q + 1) if q + 1 <= cx.q_max else np.zeros((0, 0), dtype=complex)
    coeffs = [alpha]
    harmonic = []
    obstructed, witness = None, None
    for n in range(1, N + 1):
        s = _leading_term(P, q, coeffs, n)
        h = h_next @ s
        harmonic.append(h)
        coeffs.append(-(dg @ s))
        if obstructed is None and _is_nonzero(h, max(float(np.linalg.norm(s)), a_norm * scale), obstruction_tol):
            obstructed, witness = n, h
    return Extension(q, tuple(coeffs), tuple(harmonic), obstructed, witness)


def extension_fixed_point_residual(P: OperatorSeries, hd: HodgeData, ext: Extension) -> float:
    """Largest coefficient of ``alpha(t) + d* G (P(t) - P_0) alpha(t)`` beyond order 0."""
    cx, q = P.complex, ext.degree
    if q + 1 > cx.q_max:
        return max([0.0] + [float(np.linalg.norm(c)) for c in ext.coeffs[1:]])
    dg = hd.codiff_green(q + 1)
    coeffs = list(ext.coeffs)
    return max(
        [0.0]
        + [
            float(np.linalg.norm(coeffs[n] + dg @ _leading_term(P, q, coeffs, n)))
            for n in range(1, ext.order + 1)
        ]
    )


def closedness_residuals(P: OperatorSeries, ext: Extension) -> list[float]:
    """``|sum_{i+j=n} P_i alpha^j|`` for ``n = 0..N``."""
    q = ext.degree
    out = []
    for n in range(ext.order + 1):
        acc = np.zeros(P.complex.dim(q + 1), dtype=complex)
        for j in range(n + 1):
            acc += P.coeff(n - j, q) @ ext.coeffs[j]
        out.append(float(np.linalg.norm(acc)))
    return out


@dataclass(frozen=True)
class ObstructionImage:
    """Span of harmonic classes hit by the order-``n`` obstruction from degree ``q``.

    ``basis`` has orthonormal columns in ``C^{q+1}``; ``exact_leak`` is the
    largest image of an exact truncated cochain (should be rounding-level).
    """

    degree: int
    order: int
    basis: np.ndarray
    domain_dim: int
    exact_leak: float

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    @property
    def witness(self) -> np.ndarray | None:
        return self.basis[:, 0].copy() if self.rank else None


def obstruction_of(P: OperatorSeries, hd: HodgeData, q: int, cochain: np.ndarray, n: int) -> np.ndarray:
    """Harmonic part of the order-``n`` failure term of a truncated cochain.

    ``cochain`` stacks ``alpha^0 .. alpha^{n-1}`` (each in ``C^q``).
    """
    cx = P.complex
    if q + 1 > cx.q_max or q + 1 < cx.q_min:
        return np.zeros(cx.dim(q + 1), dtype=complex)
    d = cx.dim(q)
    coeffs = [cochain[j * d:(j + 1) * d] for j in range(n)]
    return hd.h(q + 1) @ _leading_term(P, q, coeffs, n)


def obstruction_map_image(
    P: OperatorSeries,
    hd: HodgeData,
    q: int,
    n: int,
    obstruction_tol: float = DEFAULT_OBSTRUCTION_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> ObstructionImage:
    """Image in ``H^{q+1}`` (at ``t = 0``) of the order-``n`` obstruction map from degree ``q``."""
    cx = P.complex
    if n < 1:
        raise ValueError("obstruction order must be at least 1")
    if n > P.order:
        raise OrderExceedsTruncation(f"order {n} needs P_{n}, series stops at P_{P.order}")
    target = cx.dim(q + 1)
    if cx.dim(q) == 0 or target == 0 or q < cx.q_min or q >= cx.q_max:
        return ObstructionImage(q, n, np.zeros((target, 0), dtype=complex), 0, 0.0)
    _, _, kernel = _svd_split(truncated_differential(P, q, n), rank_tol)
    d = cx.dim(q)
    lead, harm = [], []
    for col in kernel.T:
        coeffs = [col[j * d:(j + 1) * d] for j in range(n)]
        s = _leading_term(P, q, coeffs, n)
        lead.append(s)
        harm.append(hd.h(q + 1) @ s)
    scale = P.scale()
    ref = max([scale] + [float(np.linalg.norm(s)) for s in lead])
    if harm:
        w = np.stack(harm, axis=1)
        u, sv, _ = np.linalg.svd(w, full_matrices=False)
        r = int(np.sum(sv > obstruction_tol * ref))
        basis = u[:, :r]
    else:
        basis = np.zeros((target, 0), dtype=complex)

    leak = 0.0
    if q - 1 >= cx.q_min and cx.dim(q - 1):
        _, image, _ = _svd_split(truncated_differential(P, q - 1, n), rank_tol)
        for col in image.T:
            leak = max(leak, float(np.linalg.norm(obstruction_of(P, hd, q, col, n))))
        if leak > obstruction_tol * ref:
            warnings.warn(
                f"exact cochains leak into the obstruction (degree {q}, order {n}): {leak:.2e}",
                RuntimeWarning,
                stacklevel=2,
            )
    return ObstructionImage(q, n, basis, kernel.shape[1], leak)


EXTENSION = "extension"
EXACTNESS = "exactness"


@dataclass(frozen=True)
class JumpVerdict:
    """Outcome of the obstruction scan for ``H^q`` through order ``order_checked``.

    ``jump`` false means no obstruction was found up to that order; it is not
    a statement about higher orders.  When ``jump`` is true, ``side`` names the
    obstruction (``"extension"`` in degree ``q`` or ``"exactness"`` from degree
    ``q - 1``), ``order`` the first order at which it fired and ``witness`` a
    harmonic representative of the obstruction class.
    """

    degree: int
    order_checked: int
    jump: bool
    side: str | None = None
    side_degree: int | None = None
    order: int | None = None
    witness: np.ndarray | None = None
    extension_order: int | None = None
    exactness_order: int | None = None
    integrability: IntegrabilityReport | None = field(default=None, compare=False)

    def describe(self) -> str:
        if not self.jump:
            return f"NoJumpDetected({self.order_checked})"
        kind = "ExtensionObstruction" if self.side == EXTENSION else "ExactnessObstruction"
        return f"Jump{{{kind}({self.side_degree}), order {self.order}}}"


def extension_side(
    P: OperatorSeries, hd: HodgeData, q: int, N: int, obstruction_tol: float = DEFAULT_OBSTRUCTION_TOL
) -> tuple[int | None, np.ndarray | None]:
    """First obstructed order over the harmonic basis of ``H^q`` (canonical route)."""
    best, wit = None, None
    basis = hd.harmonic_basis[q]
    for i in range(basis.shape[1]):
        ext = extend_class(P, hd, basis[:, i], q, N, obstruction_tol)
        if ext.obstructed_at is not None and (best is None or ext.obstructed_at < best):
            best, wit = ext.obstructed_at, ext.obstruction_witness
    return best, wit


def truncated_side(
    P: OperatorSeries,
    hd: HodgeData,
    q: int,
    N: int,
    obstruction_tol: float = DEFAULT_OBSTRUCTION_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[int | None, np.ndarray | None]:
    """First order ``n <= N`` with a nonzero obstruction image from degree ``q``."""
    for n in range(1, N + 1):
        img = obstruction_map_image(P, hd, q, n, obstruction_tol, rank_tol)
        if img.rank:
            return n, img.witness
    return None, None


def jump_verdict(
    P: OperatorSeries,
    hd: HodgeData,
    q: int,
    N: int,
    obstruction_tol: float = DEFAULT_OBSTRUCTION_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    integrability_tol: float = DEFAULT_INTEGRABILITY_TOL,
) -> JumpVerdict:
    """Scan both obstruction families through order ``N``.

    Raises :class:`IntegrabilityFailure` if ``P`` is not square-zero through
    order ``N``.  When both sides fire, the earlier order wins and the
    extension side wins ties.
    """
    P.complex.check_degree(q)
    if N > P.order:
        raise OrderExceedsTruncation(f"order {N} exceeds series truncation {P.order}")
    report = check_integrability(P.truncated(N), integrability_tol, raise_on_fail=True)
    ext_n, ext_w = extension_side(P, hd, q, N, obstruction_tol)
    exa_n, exa_w = truncated_side(P, hd, q - 1, N, obstruction_tol, rank_tol)
    common = dict(extension_order=ext_n, exactness_order=exa_n, integrability=report)
    if ext_n is not None and (exa_n is None or ext_n <= exa_n):
        return JumpVerdict(q, N, True, EXTENSION, q, ext_n, ext_w, **common)
    if exa_n is not None:
        return JumpVerdict(q, N, True, EXACTNESS, q - 1, exa_n, exa_w, **common)
    return JumpVerdict(q, N, False, **common)
