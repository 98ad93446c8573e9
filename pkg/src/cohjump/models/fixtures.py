"""Built-in fixtures.

Every fixture is a :class:`~cohjump.modelfile.ModelFile`.  Jump fixtures carry
an operator series (directly, or as DGLA + representation + Maurer-Cartan
series); DGLA fixtures carry only a DGLA for the Kuranishi solver.

Observed cohomology dimensions of the nilmanifold fixtures (oracle, default
samples), ``dim H^q`` at ``t = 0`` and at generic ``t``:

==========================  ==================  ==================
fixture                     t = 0               generic t
==========================  ==================  ==================
iwasawa-cotangent           3, 6, 6, 3          2, 5, 5, 2
iwasawa-tangent             3, 6, 6, 3          2, 5, 5, 2
iwasawa-canonical           3, 6, 6, 3          1, 4, 5, 2
iwasawa-parallelizable      3, 6, 6, 3          3, 6, 6, 3
kodaira-tangent             1, 2, 1             1, 2, 1
==========================  ==================  ==================
"""

from __future__ import annotations

import json
from typing import Any, Callable, Mapping

import numpy as np

from ..dgla import (
    DGLA,
    MaurerCartanSeries,
    adjoint_representation,
    kuranishi_solve,
    mc_residual,
    validate_dgla,
)
from ..errors import ModelError
from ..hodge import validate_complex
from ..modelfile import ModelFile
from ..series import gauge_transform, operator_series
from .nilmanifold import (
    TANGENT,
    TRIVIAL,
    WEDGE,
    NilmanifoldSpec,
    StructureTerm,
    build_invariant_complex,
    cotangent_action,
    kodaira_spencer_dgla,
    phi_vector,
    tangent_action,
)

FIXTURE_ORDER = 6

IWASAWA = NilmanifoldSpec(3, (StructureTerm(2, 0, 1, "hol", -1),), name="iwasawa")
KODAIRA = NilmanifoldSpec(2, (StructureTerm(1, 0, 0, "mixed", 1),), name="kodaira")
TORUS2 = NilmanifoldSpec(2, (), name="torus")


def _pad(coeffs: list, order: int, zero) -> list:
    return list(coeffs) + [zero() for _ in range(order - len(coeffs))]


def _trim(x: MaurerCartanSeries, tol: float = 1e-14) -> MaurerCartanSeries:
    """Drop trailing zero coefficients (keeps at least one)."""
    coeffs = list(x.coeffs)
    while len(coeffs) > 1 and np.max(np.abs(coeffs[-1]), initial=0.0) <= tol:
        coeffs.pop()
    return MaurerCartanSeries(len(coeffs), tuple(coeffs))


def exact_polynomial(L: DGLA, x: MaurerCartanSeries, tol: float = 1e-12) -> bool:
    """True when the polynomial ``x(t)`` solves the Maurer-Cartan equation exactly.

    The residual of a degree-``d`` polynomial has degree ``2d``, so checking
    orders ``1..2d`` suffices.
    """
    d = x.order
    padded = MaurerCartanSeries(2 * d, tuple(_pad(list(x.coeffs), 2 * d, lambda: np.zeros(L.complex.dim(1), dtype=complex))))
    return all(float(np.linalg.norm(r)) <= tol for r in mc_residual(L, padded))


# -- nilmanifold deformations ---------------------------------------------

def _spec_doc(spec: NilmanifoldSpec) -> dict:
    return {
        "n": spec.n,
        "structure": [[t.k, t.i, t.j, t.kind, complex(t.coeff).real, complex(t.coeff).imag] for t in spec.structure],
        "bundle": spec.bundle,
        "p": spec.p,
    }


def nilmanifold_model(
    spec: NilmanifoldSpec,
    phi: MaurerCartanSeries | None = None,
    name: str = "",
    description: str = "",
    provenance: Mapping[str, Any] | None = None,
    order: int = FIXTURE_ORDER,
) -> ModelFile:
    """Invariant model of ``spec`` deformed by ``phi`` (zero when omitted).

    ``phi`` must solve the Maurer-Cartan equation of the Kodaira-Spencer
    algebra of ``spec``; a polynomial exact solution is stored as such, any
    other series is stored truncated at its own order.
    """
    model = build_invariant_complex(spec)
    L, _ = kodaira_spencer_dgla(spec)
    if phi is None:
        phi = MaurerCartanSeries(1, (np.zeros(spec.n * spec.n, dtype=complex),))
    phi = _trim(phi)
    polynomial = exact_polynomial(L, phi)
    if polynomial:
        phi = MaurerCartanSeries(order, tuple(_pad(list(phi.coeffs), order, lambda: np.zeros(spec.n**2, dtype=complex))))
    if spec.bundle == TANGENT:
        P = tangent_action(model, phi, L)
    else:
        P = cotangent_action(model, phi)
    prov = {"builder": "nilmanifold", "spec": _spec_doc(spec)}
    prov.update(provenance or {})
    return ModelFile(
        model.complex,
        name=name or spec.name,
        description=description,
        labels=model.labels,
        companion_del=dict(model.companion_del) if spec.bundle != TANGENT else None,
        operator_series=P,
        polynomial=polynomial,
        provenance=prov,
    )


def _iwasawa_class_ii() -> MaurerCartanSeries:
    return MaurerCartanSeries(1, (phi_vector(3, [(0, 0, 1)]),))


def _iwasawa_class_i() -> MaurerCartanSeries:
    return MaurerCartanSeries(1, (phi_vector(3, [(0, 2, 1)]),))


def _iwasawa_class_iii() -> MaurerCartanSeries:
    L, _ = kodaira_spencer_dgla(IWASAWA)
    sol = kuranishi_solve(L, phi_vector(3, [(0, 0, 1), (1, 1, 1)]), FIXTURE_ORDER)
    return sol.series


def _phi_doc(terms) -> list:
    return [[j, a, complex(c).real, complex(c).imag] for j, a, c in terms]


def iwasawa_cotangent() -> ModelFile:
    return nilmanifold_model(
        IWASAWA.with_bundle(WEDGE, 1),
        _iwasawa_class_ii(),
        "iwasawa-cotangent",
        "Iwasawa manifold, (1,q)-forms, deformation t wb1 (x) Z1",
        {"phi": _phi_doc([(0, 0, 1)])},
    )


def iwasawa_tangent() -> ModelFile:
    return nilmanifold_model(
        IWASAWA.with_bundle(TANGENT),
        _iwasawa_class_ii(),
        "iwasawa-tangent",
        "Iwasawa manifold, tangent-valued (0,q)-forms, deformation t wb1 (x) Z1",
        {"phi": _phi_doc([(0, 0, 1)])},
    )


def iwasawa_canonical() -> ModelFile:
    return nilmanifold_model(
        IWASAWA.with_bundle(WEDGE, 2),
        _iwasawa_class_iii(),
        "iwasawa-canonical",
        "Iwasawa manifold, (2,q)-forms, Kuranishi series through wb1 (x) Z1 + wb2 (x) Z2",
        {"kuranishi_xi": _phi_doc([(0, 0, 1), (1, 1, 1)])},
    )


def iwasawa_parallelizable() -> ModelFile:
    return nilmanifold_model(
        IWASAWA.with_bundle(WEDGE, 1),
        _iwasawa_class_i(),
        "iwasawa-parallelizable",
        "Iwasawa manifold, (1,q)-forms, deformation t wb1 (x) Z3",
        {"phi": _phi_doc([(0, 2, 1)])},
    )


def kodaira_tangent() -> ModelFile:
    L, _ = kodaira_spencer_dgla(KODAIRA)
    xi = phi_vector(2, [(0, 0, 1), (1, 1, 1)])
    sol = kuranishi_solve(L, L.hodge.h(1) @ xi, FIXTURE_ORDER)
    return nilmanifold_model(
        KODAIRA.with_bundle(TANGENT),
        sol.series,
        "kodaira-tangent",
        "primary Kodaira surface, tangent-valued (0,q)-forms, Kuranishi series through wb1 (x) Z1 + wb2 (x) Z2",
        {"kuranishi_xi": _phi_doc([(0, 0, 1), (1, 1, 1)])},
    )


def trivial() -> ModelFile:
    return nilmanifold_model(
        TORUS2.with_bundle(WEDGE, 1),
        None,
        "trivial",
        "complex 2-torus, (1,q)-forms, zero deformation",
    )


# -- hand-built operator series -------------------------------------------

def toy() -> ModelFile:
    """``C^0 = C^1 = K`` with ``P_0 = 0`` and ``P_1 = 1``: ``D_t = t``."""
    cx = validate_complex([1, 1])
    P = operator_series(cx, [{0: [[1.0]]}] + [{} for _ in range(FIXTURE_ORDER - 1)])
    return ModelFile(cx, name="toy", description="two-term complex with D_t = t", operator_series=P, polynomial=True)


def order_two() -> ModelFile:
    """``C^0 = <a, u>``, ``C^1 = <b, w>``, ``∂̄u = w``, ``P_1 a = w``, ``P_1 u = b``.

    ``P_1 a`` is exact, so the first-order obstruction vanishes; the
    correction ``α^1 = -u`` then meets ``P_1 u = b``, a harmonic class.
    """
    cx = validate_complex([2, 2], {0: [[0, 0], [0, 1]]})
    P = operator_series(cx, [{0: [[0, 1], [1, 0]]}] + [{} for _ in range(FIXTURE_ORDER - 1)])
    return ModelFile(
        cx,
        name="order-two",
        description="first obstruction at order 2 in degrees 0 and 1",
        labels={0: ["a", "u"], 1: ["b", "w"]},
        operator_series=P,
        polynomial=True,
    )


def order_two_gauged(seed: int = 7) -> ModelFile:
    """:func:`order_two` conjugated by a random ``g(t) = Id + t g_1 + t^2 g_2``."""
    base = order_two()
    P = base.operator_series
    rng = np.random.default_rng(seed)
    cx = P.complex
    g = [
        {q: 0.5 * (rng.standard_normal((cx.dim(q),) * 2) + 1j * rng.standard_normal((cx.dim(q),) * 2)) for q in cx.degrees}
        for _ in range(2)
    ]
    G = gauge_transform(P, g)
    return ModelFile(
        cx,
        name="order-two-gauged",
        description="order-two fixture conjugated by a random degree-0 gauge series (truncated at order 6)",
        labels=base.labels,
        operator_series=G,
        polynomial=False,
        provenance={"gauge_seed": seed},
    )


# -- DGLA fixtures -----------------------------------------------------------

def _dgla_model(L: DGLA, name: str, description: str, x: MaurerCartanSeries | None = None,
                polynomial: bool = False) -> ModelFile:
    rep = adjoint_representation(L)
    return ModelFile(
        L.complex,
        name=name,
        description=description,
        dgla=L,
        representation=rep,
        mc_series=x,
        polynomial=polynomial,
    )


def dgla_abelian() -> ModelFile:
    L, _ = kodaira_spencer_dgla(TORUS2)
    return _dgla_model(L, "dgla-abelian", "Kodaira-Spencer algebra of the complex 2-torus (abelian)")


def dgla_obstructed() -> ModelFile:
    """``L^1 = <e>``, ``L^2 = <f>``, zero differential, ``[e, e] = 2f``."""
    cx = validate_complex([1, 1], q_min=1)
    L = validate_dgla(cx, {(1, 1): np.array([[[2.0]]])})
    return _dgla_model(L, "dgla-obstructed", "[e, e] = 2f with f harmonic: obstructed at order 2")


def _exact_bracket_dgla() -> DGLA:
    # L^1 = <e, u>, L^2 = <f>, du = f, [e, e] = 2f
    cx = validate_complex([2, 1], {1: [[0, 1]]}, q_min=1)
    c = np.zeros((2, 2, 1))
    c[0, 0, 0] = 2.0
    return validate_dgla(cx, {(1, 1): c})


def dgla_exact() -> ModelFile:
    L = _exact_bracket_dgla()
    return _dgla_model(L, "dgla-exact", "[e, e] = 2f with f = du exact: unobstructed, x = t e - t^2 u")


def dgla_iwasawa() -> ModelFile:
    L, _ = kodaira_spencer_dgla(IWASAWA)
    return _dgla_model(L, "dgla-iwasawa", "Kodaira-Spencer algebra of the Iwasawa manifold")


def dgla_adjoint() -> ModelFile:
    """Adjoint action of the exact-bracket DGLA along ``x = t e - t^2 u``."""
    L = _exact_bracket_dgla()
    x = _trim(kuranishi_solve(L, np.array([1.0, 0.0]), FIXTURE_ORDER).series)
    x = MaurerCartanSeries(FIXTURE_ORDER, tuple(_pad(list(x.coeffs), FIXTURE_ORDER, lambda: np.zeros(2, dtype=complex))))
    return _dgla_model(
        L, "dgla-adjoint", "exact-bracket DGLA acting on itself along x = t e - t^2 u", x, polynomial=True
    )


JUMP_FIXTURES: dict[str, Callable[[], ModelFile]] = {
    "trivial": trivial,
    "toy": toy,
    "order-two": order_two,
    "order-two-gauged": order_two_gauged,
    "iwasawa-cotangent": iwasawa_cotangent,
    "iwasawa-tangent": iwasawa_tangent,
    "iwasawa-canonical": iwasawa_canonical,
    "iwasawa-parallelizable": iwasawa_parallelizable,
    "kodaira-tangent": kodaira_tangent,
    "dgla-adjoint": dgla_adjoint,
}

DGLA_FIXTURES: dict[str, Callable[[], ModelFile]] = {
    "dgla-abelian": dgla_abelian,
    "dgla-obstructed": dgla_obstructed,
    "dgla-exact": dgla_exact,
    "dgla-iwasawa": dgla_iwasawa,
}

FIXTURES: dict[str, Callable[[], ModelFile]] = {**JUMP_FIXTURES, **DGLA_FIXTURES}


def build_fixture(name: str) -> ModelFile:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ModelError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


# -- spec files ------------------------------------------------------------

def _terms(raw, n: int, what: str) -> list[tuple[int, int, complex]]:
    out = []
    for t in raw:
        if not (isinstance(t, list) and len(t) == 4):
            raise ModelError(f"{what}: terms are [j, a, re, im], got {t!r}")
        j, a = int(t[0]), int(t[1])
        if not (0 <= j < n and 0 <= a < n):
            raise ModelError(f"{what}: index out of range in {t!r}")
        out.append((j, a, complex(t[2], t[3])))
    return out


def model_from_spec(doc: Mapping[str, Any]) -> ModelFile:
    """Build a nilmanifold model from a spec document.

    Keys: ``n``, ``structure`` (list of ``[k, i, j, "hol"|"mixed", re, im]``),
    ``bundle`` (``trivial``, ``tangent`` or ``wedge``), ``p``, optional ``name``
    and ``description``, and at most one deformation: ``phi`` (list of
    ``[j, a, re, im]``, a constant first-order term that must solve the
    Maurer-Cartan equation exactly) or ``kuranishi_xi`` (same layout, a
    harmonic direction fed to the Kuranishi solver).  ``order`` sets the
    truncation (default 6).
    """
    try:
        n = int(doc["n"])
        structure = tuple(
            StructureTerm(int(k), int(i), int(j), str(kind), complex(re, im))
            for k, i, j, kind, re, im in doc.get("structure", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed nilmanifold spec: {exc}") from None
    spec = NilmanifoldSpec(n, structure, str(doc.get("bundle", TRIVIAL)), int(doc.get("p", 0)),
                           str(doc.get("name", "")))
    order = int(doc.get("order", FIXTURE_ORDER))
    if order < 1:
        raise ModelError("order must be at least 1")
    if "phi" in doc and "kuranishi_xi" in doc:
        raise ModelError("give at most one of 'phi' and 'kuranishi_xi'")
    phi, prov = None, {}
    if "phi" in doc:
        terms = _terms(doc["phi"], n, "phi")
        phi = MaurerCartanSeries(1, (phi_vector(n, terms),))
        L, _ = kodaira_spencer_dgla(spec)
        if not exact_polynomial(L, phi):
            raise ModelError("phi does not solve the Maurer-Cartan equation; use kuranishi_xi instead")
        prov["phi"] = _phi_doc(terms)
    elif "kuranishi_xi" in doc:
        terms = _terms(doc["kuranishi_xi"], n, "kuranishi_xi")
        L, _ = kodaira_spencer_dgla(spec)
        sol = kuranishi_solve(L, phi_vector(n, terms), order)
        first = sol.first_obstruction()
        if first is not None:
            raise ModelError(f"Kuranishi series is obstructed at order {first}")
        phi = sol.series
        prov["kuranishi_xi"] = _phi_doc(terms)
    return nilmanifold_model(spec, phi, spec.name, str(doc.get("description", "")), prov, order)


def build_model(spec: str) -> ModelFile:
    """A built-in fixture by name, or a nilmanifold spec file by path."""
    if spec in FIXTURES:
        return build_fixture(spec)
    try:
        with open(spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ModelError(
            f"{spec!r} is neither a built-in fixture ({', '.join(sorted(FIXTURES))}) nor a readable spec file"
        ) from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"spec file {spec!r} is not valid JSON: {exc}") from None
    return model_from_spec(doc)
