"""Fixture builders: nilmanifold invariant complexes and hand-built series."""

from .fixtures import DGLA_FIXTURES, FIXTURES, JUMP_FIXTURES, build_fixture, build_model, model_from_spec
from .nilmanifold import (
    NilmanifoldSpec,
    StructureTerm,
    build_invariant_complex,
    contraction,
    cotangent_action,
    kodaira_spencer_dgla,
    phi_vector,
    tangent_action,
)

__all__ = [
    "DGLA_FIXTURES",
    "FIXTURES",
    "JUMP_FIXTURES",
    "NilmanifoldSpec",
    "StructureTerm",
    "build_fixture",
    "build_invariant_complex",
    "build_model",
    "contraction",
    "cotangent_action",
    "kodaira_spencer_dgla",
    "model_from_spec",
    "phi_vector",
    "tangent_action",
]
