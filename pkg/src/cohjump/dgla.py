"""Differential graded Lie algebras given by structure constants.

The bracket is stored per pair of degrees as a dense array ``c[(p1, p2)]`` of
shape ``(dim L^p1, dim L^p2, dim L^{p1+p2})`` with
``[e_i, e_j] = sum_k c[i, j, k] e_k``.  A Maurer-Cartan series is a degree-1
element ``x(t) = x_1 t + ... + x_N t^N`` and the Maurer-Cartan equation is
``d x + 1/2 [x, x] = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    AntisymmetryViolation,
    CompatibilityViolation,
    DegreeMismatch,
    JacobiViolation,
    LeibnizViolation,
    NotHarmonic,
    ShapeMismatch,
)
from .hodge import DEFAULT_RANK_TOL, GradedComplex, HodgeData, hodge_data
from .series import OperatorSeries

DEFAULT_DGLA_TOL = 1e-9


@dataclass(frozen=True)
class DGLA:
    complex: GradedComplex
    bracket: Mapping[tuple[int, int], np.ndarray]
    hodge: HodgeData

    def structure(self, p1: int, p2: int) -> np.ndarray:
        cx = self.complex
        c = self.bracket.get((p1, p2))
        if c is None:
            return np.zeros((cx.dim(p1), cx.dim(p2), cx.dim(p1 + p2)), dtype=complex)
        return c

    def br(self, a: np.ndarray, p1: int, b: np.ndarray, p2: int) -> np.ndarray:
        """``[a, b]`` for ``a`` in ``L^p1`` and ``b`` in ``L^p2``."""
        return np.einsum("i,j,ijk->k", a, b, self.structure(p1, p2))

    def is_abelian(self) -> bool:
        return all(not np.any(c) for c in self.bracket.values())


def _sign(n: int) -> int:
    return -1 if n % 2 else 1


def validate_dgla(
    cx: GradedComplex,
    bracket: Mapping[tuple[int, int], object] | None = None,
    tol: float = DEFAULT_DGLA_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> DGLA:
    """Check graded antisymmetry, the Leibniz rule and the Jacobi identity on bases.

    Violations raise with the offending basis tuple ``(degree, index)``.
    """
    degs = list(cx.degrees)
    consts: dict[tuple[int, int], np.ndarray] = {}
    for (p1, p2), arr in (bracket or {}).items():
        p1, p2 = int(p1), int(p2)
        shape = (cx.dim(p1), cx.dim(p2), cx.dim(p1 + p2))
        a = np.asarray(arr, dtype=complex)
        if a.size == 0 and 0 in shape:
            continue
        if a.shape != shape:
            raise ShapeMismatch(f"bracket ({p1},{p2}): expected {shape}, got {a.shape}")
        if np.any(a) and (p1 not in cx.degrees or p2 not in cx.degrees or p1 + p2 not in cx.degrees):
            raise ShapeMismatch(f"bracket ({p1},{p2}) lands outside the complex")
        a.setflags(write=False)
        consts[(p1, p2)] = a
    L = DGLA(cx, consts, hodge_data(cx, rank_tol))

    scale = max([1.0] + [float(np.max(np.abs(c))) for c in consts.values() if c.size])
    lim = tol * max(1.0, scale**2)

    for p1 in degs:
        for p2 in degs:
            c12, c21 = L.structure(p1, p2), L.structure(p2, p1)
            diff = c12 + _sign(p1 * p2) * np.transpose(c21, (1, 0, 2))
            if diff.size and np.max(np.abs(diff)) > tol * scale:
                i, j, _ = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)
                raise AntisymmetryViolation(
                    f"[e({p1},{i}), e({p2},{j})] != -(-1)^(|a||b|) [e({p2},{j}), e({p1},{i})]"
                )

    for p1 in degs:
        for p2 in degs:
            c = L.structure(p1, p2)
            if c.size == 0:
                continue
            lhs = np.einsum("ijk,lk->ijl", c, cx.d(p1 + p2))
            rhs = np.einsum("mi,mjl->ijl", cx.d(p1), L.structure(p1 + 1, p2))
            rhs = rhs + _sign(p1) * np.einsum("mj,iml->ijl", cx.d(p2), L.structure(p1, p2 + 1))
            diff = lhs - rhs
            if diff.size and np.max(np.abs(diff)) > lim:
                i, j, _ = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)
                raise LeibnizViolation(f"Leibniz rule fails on basis pair ({p1},{i}), ({p2},{j})")

    for p1 in degs:
        for p2 in degs:
            for p3 in degs:
                if p1 + p2 + p3 not in cx.degrees:
                    continue
                t1 = np.einsum("jkm,imn->ijkn", L.structure(p2, p3), L.structure(p1, p2 + p3))
                t2 = np.einsum("ijm,mkn->ijkn", L.structure(p1, p2), L.structure(p1 + p2, p3))
                t3 = np.einsum("ikm,jmn->ijkn", L.structure(p1, p3), L.structure(p2, p1 + p3))
                diff = t1 - t2 - _sign(p1 * p2) * t3
                if diff.size and np.max(np.abs(diff)) > lim:
                    i, j, k, _ = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)
                    raise JacobiViolation(
                        f"Jacobi identity fails on basis triple ({p1},{i}), ({p2},{j}), ({p3},{k})"
                    )
    return L


@dataclass(frozen=True)
class MaurerCartanSeries:
    """Degree-1 series ``x_1 t + ... + x_N t^N``.

    ``integrable`` is only ever set by :func:`check_mc`.
    """

    order: int
    coeffs: tuple[np.ndarray, ...]
    integrable: bool = False

    def coeff(self, n: int) -> np.ndarray:
        return self.coeffs[n - 1]


def mc_series(coeffs: Sequence[object]) -> MaurerCartanSeries:
    arrs = tuple(np.asarray(c, dtype=complex) for c in coeffs)
    return MaurerCartanSeries(len(arrs), arrs)


def _quadratic(L: DGLA, x: MaurerCartanSeries, n: int) -> np.ndarray:
    """``sum_{i+j=n, i,j>=1} [x_i, x_j]``."""
    acc = np.zeros(L.complex.dim(2), dtype=complex)
    for i in range(1, n):
        if i <= x.order and n - i <= x.order:
            acc += L.br(x.coeff(i), 1, x.coeff(n - i), 1)
    return acc


def mc_residual(L: DGLA, x: MaurerCartanSeries, N: int | None = None) -> list[np.ndarray]:
    """Coefficients ``n = 1..N`` of ``d x + 1/2 [x, x]``."""
    N = x.order if N is None else N
    if N > x.order:
        raise ValueError(f"series has order {x.order} < {N}")
    return [L.complex.d(1) @ x.coeff(n) + 0.5 * _quadratic(L, x, n) for n in range(1, N + 1)]


def check_mc(L: DGLA, x: MaurerCartanSeries, tol: float = DEFAULT_DGLA_TOL) -> MaurerCartanSeries:
    """Return ``x`` with ``integrable`` set according to :func:`mc_residual`."""
    res = mc_residual(L, x)
    ok = all(np.linalg.norm(r) <= tol * max(1.0, _series_norm(x) ** 2) for r in res)
    return replace(x, integrable=bool(ok))


def _series_norm(x: MaurerCartanSeries) -> float:
    return max([0.0] + [float(np.linalg.norm(c)) for c in x.coeffs])


@dataclass(frozen=True)
class KuranishiSolution:
    series: MaurerCartanSeries
    obstructions: tuple[np.ndarray, ...]  # ob_1 .. ob_N, harmonic, in L^2
    obstruction_factor: float

    def first_obstruction(self, tol: float = 1e-8) -> int | None:
        scale = max(1.0, _series_norm(self.series) ** 2)
        for n, ob in enumerate(self.obstructions, start=1):
            if np.linalg.norm(ob) > tol * scale:
                return n
        return None


def kuranishi_solve(
    L: DGLA,
    xi: np.ndarray,
    N: int,
    obstruction_factor: float = 0.5,
    tol: float = DEFAULT_DGLA_TOL,
) -> KuranishiSolution:
    """Solve ``x = t xi - 1/2 d* G [x, x]`` order by order.

    The obstruction coefficient is ``obstruction_factor * H sum_{i+j=n} [x_i, x_j]``;
    with the default factor 1/2 it vanishes through order ``N`` exactly when
    ``x`` solves the Maurer-Cartan equation through order ``N``.
    """
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (L.complex.dim(1),):
        raise ShapeMismatch(f"xi must have length {L.complex.dim(1)}")
    H1 = L.hodge.h(1)
    if np.linalg.norm(H1 @ xi - xi) > tol * max(1.0, float(np.linalg.norm(xi))):
        raise NotHarmonic("xi is not harmonic in degree 1")
    dg = L.hodge.codiff_green(2)
    H2 = L.hodge.h(2)
    coeffs = [xi]
    obs = [np.zeros(L.complex.dim(2), dtype=complex)]
    for n in range(2, N + 1):
        partial = MaurerCartanSeries(n - 1, tuple(coeffs))
        quad = _quadratic(L, partial, n)
        coeffs.append(-0.5 * (dg @ quad))
        obs.append(obstruction_factor * (H2 @ quad))
    return KuranishiSolution(MaurerCartanSeries(N, tuple(coeffs)), tuple(obs), obstruction_factor)


def fixed_point_residual(L: DGLA, xi: np.ndarray, x: MaurerCartanSeries) -> float:
    """Largest coefficient norm of ``x - t xi + 1/2 d* G [x, x]`` mod ``t^{N+1}``."""
    dg = L.hodge.codiff_green(2)
    worst = 0.0
    for n in range(1, x.order + 1):
        r = x.coeff(n) + 0.5 * (dg @ _quadratic(L, x, n))
        if n == 1:
            r = r - xi
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


@dataclass(frozen=True)
class Representation:
    """Action ``rho(e_i) : C^q -> C^{q+p}`` for ``e_i`` in ``L^p``.

    ``action[(p, q)]`` has shape ``(dim L^p, dim C^{q+p}, dim C^q)``.
    """

    dgla: DGLA
    complex: GradedComplex
    action: Mapping[tuple[int, int], np.ndarray]

    def op(self, p: int, q: int) -> np.ndarray:
        a = self.action.get((p, q))
        if a is None:
            return np.zeros(
                (self.dgla.complex.dim(p), self.complex.dim(q + p), self.complex.dim(q)), dtype=complex
            )
        return a

    def of(self, ell: np.ndarray, p: int, q: int) -> np.ndarray:
        """Matrix of ``rho(ell)`` on ``C^q``."""
        return np.einsum("i,irc->rc", ell, self.op(p, q))


def validate_representation(
    L: DGLA,
    action: Mapping[tuple[int, int], object],
    cx: GradedComplex,
    tol: float = DEFAULT_DGLA_TOL,
) -> Representation:
    """Check ``rho(d l) = [d, rho(l)]`` and ``rho([a, b]) = [rho(a), rho(b)]`` on bases."""
    acts: dict[tuple[int, int], np.ndarray] = {}
    for (p, q), arr in action.items():
        p, q = int(p), int(q)
        shape = (L.complex.dim(p), cx.dim(q + p), cx.dim(q))
        a = np.asarray(arr, dtype=complex)
        if a.size == 0 and 0 in shape:
            continue
        if a.shape != shape:
            raise DegreeMismatch(f"representation ({p},{q}): expected {shape}, got {a.shape}")
        a.setflags(write=False)
        acts[(p, q)] = a
    rep = Representation(L, cx, acts)
    scale = max([1.0] + [float(np.max(np.abs(a))) for a in acts.values() if a.size])
    lim = tol * max(1.0, scale**2, scale * max(1.0, _max_norm(cx), _max_norm(L.complex)))

    ldeg, cdeg = list(L.complex.degrees), list(cx.degrees)
    for p in ldeg:
        for q in cdeg:
            if L.complex.dim(p) == 0:
                continue
            # rho(d e_i) on C^q
            lhs = np.einsum("mi,mrc->irc", L.complex.d(p), rep.op(p + 1, q))
            r = rep.op(p, q)
            rhs = np.einsum("sr,irc->isc", cx.d(q + p), r) - _sign(p) * np.einsum(
                "irc,cd->ird", rep.op(p, q + 1), cx.d(q)
            )
            diff = lhs - rhs
            if diff.size and np.max(np.abs(diff)) > lim:
                i = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)[0]
                raise CompatibilityViolation(
                    f"rho(d e({p},{i})) != [d, rho(e({p},{i}))] on C^{q}"
                )
    for p1 in ldeg:
        for p2 in ldeg:
            c = L.structure(p1, p2)
            for q in cdeg:
                lhs = np.einsum("ijk,krc->ijrc", c, rep.op(p1 + p2, q))
                ab = np.einsum("irs,jsc->ijrc", rep.op(p1, q + p2), rep.op(p2, q))
                ba = np.einsum("jrs,isc->ijrc", rep.op(p2, q + p1), rep.op(p1, q))
                diff = lhs - ab + _sign(p1 * p2) * ba
                if diff.size and np.max(np.abs(diff)) > lim:
                    i, j = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)[:2]
                    raise CompatibilityViolation(
                        f"rho([a,b]) != [rho(a), rho(b)] on basis pair ({p1},{i}), ({p2},{j}), C^{q}"
                    )
    return rep


def _max_norm(cx: GradedComplex) -> float:
    return max([0.0] + [float(np.linalg.norm(cx.d(q), 2)) for q in cx.degrees if cx.d(q).size])


def adjoint_representation(L: DGLA) -> Representation:
    """``L`` acting on itself by ``rho(a) b = [a, b]``."""
    action = {}
    for p in L.complex.degrees:
        for q in L.complex.degrees:
            # (i, k, j): [e_i, e_j] -> e_k
            action[(p, q)] = np.transpose(L.structure(p, q), (0, 2, 1))
    return validate_representation(L, action, L.complex)


def represent(
    L: DGLA,
    rho: Representation | Mapping[tuple[int, int], object],
    cx: GradedComplex,
    x: MaurerCartanSeries,
) -> OperatorSeries:
    """``P_0 = d_C`` and ``P_k = rho(x_k)``."""
    if not isinstance(rho, Representation):
        rho = validate_representation(L, rho, cx)
    elif rho.complex is not cx or rho.dgla is not L:
        raise DegreeMismatch("representation was validated for a different algebra or complex")
    coeffs = []
    for k in range(1, x.order + 1):
        xk = np.asarray(x.coeff(k), dtype=complex)
        if xk.shape != (L.complex.dim(1),):
            raise DegreeMismatch(f"x_{k} is not a degree-1 element")
        block = {}
        for q in range(cx.q_min, cx.q_max):
            block[q] = rho.of(xk, 1, q)
        coeffs.append(block)
    return OperatorSeries(cx, x.order, tuple(coeffs))
