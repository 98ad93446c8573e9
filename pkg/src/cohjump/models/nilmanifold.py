"""Invariant Dolbeault complexes of nilmanifolds and the deformations acting on them.

Structure constants give ``dω^k`` as a combination of ``ω^i∧ω^j`` (``"hol"``)
and ``ω^i∧ω̄^j`` (``"mixed"``); indices are zero-based.  Supported bundles are
the trivial bundle, the holomorphic tangent bundle and the wedge powers of
the holomorphic cotangent bundle, all restricted to invariant sections.

A deformation is a series ``φ(t) = φ_1 t + ...`` of invariant (0,1)-forms
with values in the tangent bundle, stored as vectors indexed by ``j * n + a``
for ``ω̄^j ⊗ Z_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from ..dgla import DGLA, MaurerCartanSeries, adjoint_representation, represent, validate_dgla
from ..errors import ModelError, NotSquareZero
from ..hodge import GradedComplex, validate_complex
from ..series import OperatorSeries, check_integrability
from .exterior import ExteriorAlgebra, _bits, wedge_sign

TRIVIAL = "trivial"
TANGENT = "tangent"
WEDGE = "wedge"


@dataclass(frozen=True)
class StructureTerm:
    k: int
    i: int
    j: int
    kind: str  # "hol" or "mixed"
    coeff: complex


@dataclass(frozen=True)
class NilmanifoldSpec:
    n: int
    structure: tuple[StructureTerm, ...] = ()
    bundle: str = TRIVIAL
    p: int = 0  # wedge power for WEDGE bundles
    name: str = ""

    def __post_init__(self):
        if self.bundle not in (TRIVIAL, TANGENT, WEDGE):
            raise ModelError(f"unknown bundle {self.bundle!r}")
        if self.bundle == WEDGE and not 0 <= self.p <= self.n:
            raise ModelError(f"wedge power {self.p} outside [0, {self.n}]")
        for t in self.structure:
            if t.kind not in ("hol", "mixed"):
                raise ModelError(f"structure term kind must be 'hol' or 'mixed', got {t.kind!r}")
            if not all(0 <= v < self.n for v in (t.k, t.i, t.j)):
                raise ModelError(f"structure term index out of range: {t}")

    @property
    def wedge_power(self) -> int:
        return self.p if self.bundle == WEDGE else 0

    def with_bundle(self, bundle: str, p: int = 0) -> "NilmanifoldSpec":
        return NilmanifoldSpec(self.n, self.structure, bundle, p, self.name)


def exterior_algebra(spec: NilmanifoldSpec) -> ExteriorAlgebra:
    n = spec.n
    size = 1 << (2 * n)
    gens = np.zeros((2 * n, size), dtype=complex)
    for t in spec.structure:
        a = 1 << t.i
        b = 1 << (t.j if t.kind == "hol" else n + t.j)
        s = wedge_sign(a, b)
        if s:
            gens[t.k, a | b] += s * complex(t.coeff)
    alg = ExteriorAlgebra(n, gens)
    for k in range(n):
        gens[n + k] = alg.conjugate(gens[k])
    alg = ExteriorAlgebra(n, gens)
    res = float(np.max(np.abs(alg.d @ alg.d), initial=0.0))
    if res > 1e-10:
        raise NotSquareZero(f"structure constants do not give d^2 = 0 (residual {res:.2e})")
    return alg


@dataclass(frozen=True)
class InvariantModel:
    """Invariant Dolbeault complex of one bundle, with the ``∂`` companion.

    ``labels[q]`` names the basis of ``C^q``.  For wedge bundles
    ``companion_del[q]`` is ``∂ : Ω^{p,q} -> Ω^{p+1,q}`` (target basis
    ``del_target_labels[q]``); it is empty for the tangent bundle.
    """

    spec: NilmanifoldSpec
    algebra: ExteriorAlgebra
    complex: GradedComplex
    labels: dict[int, list[str]]
    masks: dict[int, list[int]] = field(default_factory=dict)
    companion_del: dict[int, np.ndarray] = field(default_factory=dict)
    del_target_labels: dict[int, list[str]] = field(default_factory=dict)


def _mask_label(alg: ExteriorAlgebra, mask: int) -> str:
    if mask == 0:
        return "1"
    parts = []
    for g in _bits(mask):
        parts.append(f"w{g + 1}" if g < alg.n else f"wb{g - alg.n + 1}")
    return "^".join(parts)


def _tangent_basis(n: int, alg: ExteriorAlgebra, q: int) -> list[tuple[int, int]]:
    return [(m, a) for m in alg.masks(0, q) for a in range(n)]


def _tangent_delbar(alg: ExteriorAlgebra, q: int) -> np.ndarray:
    """``∂̄(β ⊗ Z_a) = ∂̄β ⊗ Z_a + (-1)^q β ∧ Σ_j ω̄^j ⊗ [Z̄_j, Z_a]^{1,0}``."""
    n = alg.n
    src = _tangent_basis(n, alg, q)
    dst = _tangent_basis(n, alg, q + 1)
    index = {key: r for r, key in enumerate(dst)}
    c = alg.lie_bracket
    mat = np.zeros((len(dst), len(src)), dtype=complex)
    for col, (mask, a) in enumerate(src):
        db = alg.delbar[:, mask]
        for m2 in np.flatnonzero(db):
            mat[index[(int(m2), a)], col] += db[m2]
        for j in range(n):
            s = wedge_sign(mask, 1 << (n + j))
            if not s:
                continue
            for b in range(n):
                coeff = c[n + j, a, b]
                if coeff:
                    mat[index[(mask | 1 << (n + j), b)], col] += (-1) ** q * s * coeff
    return mat


def build_invariant_complex(spec: NilmanifoldSpec) -> InvariantModel:
    """Invariant ``(0,•)`` complex with values in ``spec.bundle``."""
    alg = exterior_algebra(spec)
    n = spec.n
    labels, masks, diff, companion, del_labels = {}, {}, {}, {}, {}
    if spec.bundle == TANGENT:
        for q in range(n + 1):
            labels[q] = [f"{_mask_label(alg, m)} (x) Z{a + 1}" for m, a in _tangent_basis(n, alg, q)]
        for q in range(n):
            diff[q] = _tangent_delbar(alg, q)
    else:
        p = spec.wedge_power
        for q in range(n + 1):
            masks[q] = alg.masks(p, q)
            labels[q] = [_mask_label(alg, m) for m in masks[q]]
        for q in range(n):
            diff[q] = alg.restrict(alg.delbar, masks[q], masks[q + 1])
        if p < n:
            for q in range(n + 1):
                tgt = alg.masks(p + 1, q)
                companion[q] = alg.restrict(alg.del_, masks[q], tgt)
                del_labels[q] = [_mask_label(alg, m) for m in tgt]
    try:
        cx = validate_complex([len(labels[q]) for q in range(n + 1)], diff)
    except ModelError as exc:
        raise NotSquareZero(str(exc)) from exc
    return InvariantModel(spec, alg, cx, labels, masks, companion, del_labels)


def kodaira_spencer_dgla(spec: NilmanifoldSpec) -> tuple[DGLA, InvariantModel]:
    """Invariant tangent-valued ``(0,•)`` forms with the Frölicher-Nijenhuis bracket.

    ``[β⊗Z_a, γ⊗Z_b] = β∧γ ⊗ [Z_a, Z_b] + β∧ι_{Z_a}dγ ⊗ Z_b - ι_{Z_b}dβ∧γ ⊗ Z_a``.
    """
    model = build_invariant_complex(spec.with_bundle(TANGENT))
    alg, n = model.algebra, spec.n
    c = alg.lie_bracket
    if np.max(np.abs(c[:n, :n, n:]), initial=0.0) > 1e-12:
        raise ModelError("complex structure is not integrable: [T^{1,0}, T^{1,0}] leaves T^{1,0}")
    bases = {q: _tangent_basis(n, alg, q) for q in range(n + 1)}
    index = {q: {key: r for r, key in enumerate(b)} for q, b in bases.items()}
    iota = [alg.interior(a) for a in range(n)]
    bracket = {}
    for p1 in range(n + 1):
        for p2 in range(n + 1 - p1):
            tgt = index[p1 + p2]
            arr = np.zeros((len(bases[p1]), len(bases[p2]), len(bases[p1 + p2])), dtype=complex)
            for i, (m1, a) in enumerate(bases[p1]):
                beta = alg.monomial(m1)
                d_beta = alg.d @ beta
                for j, (m2, b) in enumerate(bases[p2]):
                    gamma = alg.monomial(m2)
                    out: dict[tuple[int, int], complex] = {}

                    def add(form, vec_index, coeff=1.0):
                        for m in np.flatnonzero(form):
                            key = (int(m), vec_index)
                            out[key] = out.get(key, 0) + coeff * form[m]

                    s = wedge_sign(m1, m2)
                    if s:
                        for e in range(n):
                            if c[a, b, e]:
                                add(s * alg.monomial(m1 | m2), e, c[a, b, e])
                    add(alg.wedge(beta, iota[a] @ (alg.d @ gamma)), b)
                    add(alg.wedge(iota[b] @ d_beta, gamma), a, -1.0)
                    for key, v in out.items():
                        if abs(v) > 0:
                            arr[i, j, tgt[key]] += v
            bracket[(p1, p2)] = arr
    return validate_dgla(model.complex, bracket), model


def contraction(alg: ExteriorAlgebra, phi: np.ndarray) -> np.ndarray:
    """Matrix of ``φ⌟`` on the whole algebra.

    For ``φ = ω̄^j ⊗ Z_a`` and ``α = ω^I ∧ ω̄^K``:
    ``φ⌟α = (ι_{Z_a} ω^I) ∧ ω̄^j ∧ ω̄^K``.
    """
    n = alg.n
    phi = np.asarray(phi, dtype=complex)
    mat = np.zeros((alg.size, alg.size), dtype=complex)
    for idx in np.flatnonzero(phi):
        j, a = divmod(int(idx), n)
        for mask in range(alg.size):
            if not mask >> a & 1:
                continue
            hol, anti = mask & alg.hol_mask, mask & alg.anti_mask
            s1 = (-1) ** bin(hol & ((1 << a) - 1)).count("1")
            s2 = wedge_sign(1 << (n + j), anti)
            if s2:
                mat[(hol & ~(1 << a)) | anti | 1 << (n + j), mask] += phi[idx] * s1 * s2
    return mat


def cotangent_action(
    model: InvariantModel, phi: MaurerCartanSeries, p: int | None = None, check: bool = True
) -> OperatorSeries:
    """``P_k α = φ_k⌟∂α + ∂(φ_k⌟α)`` on invariant ``(p,•)`` forms.

    Raises :class:`IntegrabilityFailure` when the result is not square-zero
    through the order of ``φ``.
    """
    spec = model.spec
    if spec.bundle == TANGENT:
        raise ModelError("cotangent_action needs a trivial or wedge-cotangent model")
    p = spec.wedge_power if p is None else p
    if p != spec.wedge_power:
        raise ModelError(f"model carries (p={spec.wedge_power}, •) forms, not p={p}")
    alg, n = model.algebra, spec.n
    coeffs = []
    for k in range(1, phi.order + 1):
        c = contraction(alg, phi.coeff(k))
        full = c @ alg.del_ + alg.del_ @ c
        coeffs.append({q: alg.restrict(full, model.masks[q], model.masks[q + 1]) for q in range(n)})
    P = OperatorSeries(model.complex, phi.order, tuple(coeffs))
    if check:
        check_integrability(P, raise_on_fail=True)
    return P


def tangent_action(
    model: InvariantModel, phi: MaurerCartanSeries, L: DGLA | None = None, check: bool = True
) -> OperatorSeries:
    """``P_k = [φ_k, -]`` on invariant tangent-valued forms."""
    if model.spec.bundle != TANGENT:
        raise ModelError("tangent_action needs a tangent-bundle model")
    if L is None:
        L, model2 = kodaira_spencer_dgla(model.spec)
    else:
        model2 = model
    rep = adjoint_representation(L)
    P = represent(L, rep, L.complex, phi)
    P = OperatorSeries(model.complex, P.order, P.coeffs)
    if check:
        check_integrability(P, raise_on_fail=True)
    return P


def phi_vector(n: int, terms: Sequence[tuple[int, int, complex]]) -> np.ndarray:
    """Vector for ``Σ c ω̄^j ⊗ Z_a`` from ``(j, a, c)`` triples."""
    v = np.zeros(n * n, dtype=complex)
    for j, a, c in terms:
        v[j * n + a] += c
    return v


def expected_dims(spec: NilmanifoldSpec) -> list[int]:
    n = spec.n
    rank = n if spec.bundle == TANGENT else comb(n, spec.wedge_power)
    return [rank * comb(n, q) for q in range(n + 1)]
