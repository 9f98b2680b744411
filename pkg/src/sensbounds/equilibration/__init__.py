"""Statically admissible stress recovery and the coupled residual pair."""

from .BeamRecovery import (
    beam_energy_parts,
    beam_equilibrium_defect,
    beam_fe_stress,
    nodal_defect,
    recover_beam_moments,
)
from .FluxRecovery import (
    flux_defect,
    membrane_energy_parts,
    membrane_fe_stress,
    recover_quad_flux,
    side_traces,
)
from .ResidualPair import (
    block_loads,
    block_stresses,
    build_admissible_pair,
    fe_stress,
    galerkin_defect,
    qoi_load,
    single_field_residual,
    verify_pair,
)
from .StressField import (
    AdmissibleResidualPair,
    Coupling,
    EquilibriumError,
    LambdaRangeError,
    StressField,
    forward_transform,
    inverse_transform,
)

__all__ = [
    "AdmissibleResidualPair",
    "Coupling",
    "EquilibriumError",
    "LambdaRangeError",
    "StressField",
    "beam_energy_parts",
    "beam_equilibrium_defect",
    "beam_fe_stress",
    "block_loads",
    "block_stresses",
    "build_admissible_pair",
    "fe_stress",
    "flux_defect",
    "forward_transform",
    "galerkin_defect",
    "inverse_transform",
    "membrane_energy_parts",
    "membrane_fe_stress",
    "nodal_defect",
    "qoi_load",
    "recover_beam_moments",
    "recover_quad_flux",
    "side_traces",
    "single_field_residual",
    "verify_pair",
]
