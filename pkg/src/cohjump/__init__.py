"""Cohomology jumps of one-parameter deformations of finite complexes."""

from .dgla import (
    DGLA,
    MaurerCartanSeries,
    Representation,
    adjoint_representation,
    kuranishi_solve,
    mc_residual,
    mc_series,
    represent,
    validate_dgla,
    validate_representation,
)
from .errors import ModelError
from .hodge import GradedComplex, HodgeData, cohomology_basis, hodge_data, validate_complex
from .jump import (
    Extension,
    JumpVerdict,
    extend_class,
    jump_verdict,
    obstruction_map_image,
    truncated_cohomology,
)
from .oracle import OracleReport, SampleSpec, dims_at, jump_oracle
from .series import OperatorSeries, check_integrability, gauge_transform, operator_series

__version__ = "0.1.0"

__all__ = [
    "DGLA",
    "Extension",
    "GradedComplex",
    "HodgeData",
    "JumpVerdict",
    "MaurerCartanSeries",
    "ModelError",
    "OperatorSeries",
    "OracleReport",
    "Representation",
    "SampleSpec",
    "adjoint_representation",
    "check_integrability",
    "cohomology_basis",
    "dims_at",
    "extend_class",
    "gauge_transform",
    "hodge_data",
    "jump_oracle",
    "jump_verdict",
    "kuranishi_solve",
    "mc_residual",
    "mc_series",
    "obstruction_map_image",
    "operator_series",
    "represent",
    "truncated_cohomology",
    "validate_complex",
    "validate_dgla",
    "validate_representation",
]
