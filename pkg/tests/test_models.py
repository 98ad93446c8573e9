from __future__ import annotations

import json
from math import comb

import numpy as np
import pytest

from cohjump.dgla import mc_series
from cohjump.errors import IntegrabilityFailure, ModelError, NotSquareZero
from cohjump.hodge import betti, hodge_data
from cohjump.modelfile import dumps, model_to_doc
from cohjump.models.fixtures import FIXTURES, IWASAWA, build_fixture, build_model
from cohjump.models.nilmanifold import (
    TANGENT,
    TRIVIAL,
    WEDGE,
    NilmanifoldSpec,
    StructureTerm,
    build_invariant_complex,
    contraction,
    cotangent_action,
    expected_dims,
    kodaira_spencer_dgla,
    phi_vector,
    tangent_action,
)
from cohjump.oracle import dims_at
from cohjump.series import check_integrability
from support import fixture_path, rank


def torus(n, bundle=TRIVIAL, p=0):
    return NilmanifoldSpec(n, (), bundle, p, name=f"torus{n}")


def zero_phi(n, order=2):
    return mc_series([np.zeros(n * n, dtype=complex)] * order)


# -- invariant complexes -------------------------------------------------------

def test_abelian_curve():
    m = build_invariant_complex(torus(1))
    assert m.complex.dims == (1, 1)
    assert np.allclose(m.complex.d(0), 0)
    assert betti(m.complex, hodge_data(m.complex)) == {0: 1, 1: 1}


def test_iwasawa_delbar_on_generator():
    m = build_invariant_complex(IWASAWA)
    alg, n = m.algebra, 3
    # dω̄^3 = -ω̄^1∧ω̄^2 (generators are zero-based in the code)
    form = alg.delbar @ alg.monomial(1 << (n + 2))
    expected = -alg.monomial((1 << n) | (1 << (n + 1)))
    assert np.allclose(form, expected)
    assert m.complex.dims == (1, 3, 3, 1)


def test_iwasawa_dolbeault_numbers_by_rank_nullity():
    m = build_invariant_complex(IWASAWA)
    cx = m.complex
    brute = {q: cx.dim(q) - rank(cx.d(q)) - rank(cx.d(q - 1)) for q in cx.degrees}
    assert betti(cx, hodge_data(cx)) == brute
    # ω̄^1, ω̄^2 closed, ω̄^3 not, nothing exact in degree 1
    assert brute[1] == 2


def test_iwasawa_tangent_dims():
    m = build_invariant_complex(IWASAWA.with_bundle(TANGENT))
    assert list(m.complex.dims) == [3 * comb(3, q) for q in range(4)]
    cx = m.complex
    brute = {q: cx.dim(q) - rank(cx.d(q)) - rank(cx.d(q - 1)) for q in cx.degrees}
    assert betti(cx, hodge_data(cx)) == brute


@pytest.mark.parametrize("bundle,p", [(TRIVIAL, 0), (TANGENT, 0), (WEDGE, 1), (WEDGE, 2), (WEDGE, 3)])
def test_euler_characteristic_is_binomial(bundle, p):
    spec = IWASAWA.with_bundle(bundle, p)
    m = build_invariant_complex(spec)
    r = 3 if bundle == TANGENT else comb(3, p)
    assert list(m.complex.dims) == expected_dims(spec)
    assert m.complex.euler_characteristic() == sum((-1) ** q * r * comb(3, q) for q in range(4))


def test_not_square_zero():
    bad = NilmanifoldSpec(2, (StructureTerm(0, 0, 0, "mixed", 1), StructureTerm(0, 0, 1, "hol", 1)))
    with pytest.raises(NotSquareZero):
        build_invariant_complex(bad)


def test_spec_rejects_bad_bundle_and_indices():
    with pytest.raises(ModelError):
        NilmanifoldSpec(2, (), "spinor")
    with pytest.raises(ModelError):
        NilmanifoldSpec(2, (StructureTerm(2, 0, 1, "hol", 1),))
    with pytest.raises(ModelError):
        NilmanifoldSpec(2, (), WEDGE, 3)


# -- actions ---------------------------------------------------------------------

def test_tangent_action_zero_phi():
    m = build_invariant_complex(IWASAWA.with_bundle(TANGENT))
    P = tangent_action(m, zero_phi(3))
    for q in range(3):
        assert np.allclose(P.coeff(1, q), 0)
        assert np.allclose(P.at(0.3, q), m.complex.d(q))


def test_cotangent_action_zero_phi():
    m = build_invariant_complex(IWASAWA.with_bundle(WEDGE, 1))
    P = cotangent_action(m, zero_phi(3))
    for q in range(3):
        assert np.allclose(P.at(0.3, q), m.complex.d(q))


def test_abelian_constant_phi_integrable():
    rng = np.random.default_rng(0)
    spec = torus(2, TANGENT)
    m = build_invariant_complex(spec)
    phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    P = tangent_action(m, mc_series([phi, np.zeros(4)]))
    assert check_integrability(P).passed
    L, _ = kodaira_spencer_dgla(spec)
    assert np.allclose(L.br(phi, 1, phi, 1), 0)


def test_cotangent_p0_is_contraction_after_del():
    # on (0,q) forms φ⌟α = 0, so P_k = φ_k⌟∂
    rng = np.random.default_rng(3)
    m = build_invariant_complex(IWASAWA)
    alg = m.algebra
    phi = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    P = cotangent_action(m, mc_series([phi]), check=False)
    c = contraction(alg, phi)
    for q in range(3):
        ref = alg.restrict(c @ alg.del_, m.masks[q], m.masks[q + 1])
        assert np.allclose(P.coeff(1, q), ref)


def test_cotangent_p1_iwasawa_hand_assembled():
    # (1,0) basis ω^1, ω^2, ω^3; ∂ω^1 = ∂ω^2 = 0, ∂ω^3 = -ω^1∧ω^2 and ∂ω̄^j = 0,
    # so P(ω^1) = P(ω^2) = 0 and P(ω^3) = -φ⌟(ω^1∧ω^2)
    #   = -Σ_j (c_{j1} ω^2∧ω̄^j - c_{j2} ω^1∧ω̄^j)
    rng = np.random.default_rng(4)
    m = build_invariant_complex(IWASAWA.with_bundle(WEDGE, 1))
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    phi = phi_vector(3, [(j, a, c[j, a]) for j in range(3) for a in range(3)])
    P1 = cotangent_action(m, mc_series([phi]), check=False).coeff(1, 0)
    assert m.labels[0] == ["w1", "w2", "w3"]
    rows = {lab: r for r, lab in enumerate(m.labels[1])}
    hand = np.zeros((len(m.labels[1]), 3), dtype=complex)
    for j in range(3):
        hand[rows[f"w2^wb{j + 1}"], 2] -= c[j, 0]
        hand[rows[f"w1^wb{j + 1}"], 2] += c[j, 1]
    assert np.allclose(P1, hand)


def test_cotangent_top_degree_on_abelian():
    # p = n: ∂α = 0, so P_k α = ∂(φ_k⌟α); on the torus ∂ vanishes on invariant forms
    rng = np.random.default_rng(5)
    m = build_invariant_complex(torus(2, WEDGE, 2))
    alg = m.algebra
    phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    P = cotangent_action(m, mc_series([phi]))
    c = contraction(alg, phi)
    for q in range(2):
        ref = alg.restrict(alg.del_ @ c, m.masks[q], m.masks[q + 1])
        assert np.allclose(P.coeff(1, q), ref)
        assert np.allclose(P.coeff(1, q), 0)


def test_tangent_and_cotangent_agree_on_abelian():
    # with constant coefficients both the bracket and the Lie derivative vanish
    rng = np.random.default_rng(6)
    phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    Pt = tangent_action(build_invariant_complex(torus(2, TANGENT)), mc_series([phi]))
    Pc = cotangent_action(build_invariant_complex(torus(2, WEDGE, 1)), mc_series([phi]))
    for q in range(2):
        assert Pt.coeff(1, q).shape == Pc.coeff(1, q).shape
        assert np.allclose(Pt.coeff(1, q), 0)
        assert np.allclose(Pc.coeff(1, q), 0)


def test_tangent_action_non_closed_fails_at_order_one():
    # ω̄^3⊗Z_1 is not ∂̄-closed (∂̄ω̄^3 = -ω̄^1∧ω̄^2), so P_0 P_1 + P_1 P_0 != 0
    m = build_invariant_complex(IWASAWA.with_bundle(TANGENT))
    phi = phi_vector(3, [(2, 0, 1)])
    with pytest.raises(IntegrabilityFailure) as exc:
        tangent_action(m, mc_series([phi, np.zeros(9)]))
    assert exc.value.order == 1


# -- shipped fixtures ------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_shipped_fixture_matches_builder(name):
    text = fixture_path(name).read_text(encoding="utf-8")
    assert text == dumps(model_to_doc(build_fixture(name)))


def test_unknown_fixture():
    with pytest.raises(ModelError, match="unknown fixture"):
        build_fixture("nope")


def test_spec_file_build(tmp_path):
    doc = {
        "n": 3,
        "structure": [[2, 0, 1, "hol", -1, 0]],
        "bundle": "wedge",
        "p": 1,
        "name": "iwasawa-from-spec",
        "phi": [[0, 0, 1, 0]],
        "order": 3,
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    m = build_model(str(path))
    assert m.name == "iwasawa-from-spec"
    P = m.series(3)
    assert check_integrability(P).passed
    assert dims_at(P, 0.0) == {0: 3, 1: 6, 2: 6, 3: 3}


def test_spec_file_rejects_non_mc_phi(tmp_path):
    doc = {"n": 3, "structure": [[2, 0, 1, "hol", -1, 0]], "bundle": "tangent",
           "phi": [[0, 0, 1, 0], [1, 1, 1, 0]]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelError, match="Maurer-Cartan"):
        build_model(str(path))


def test_spec_file_missing():
    with pytest.raises(ModelError, match="neither"):
        build_model("/nonexistent/spec.json")
