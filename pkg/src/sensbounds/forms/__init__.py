"""The two parameterized model problems and their assembly."""

from .assembly import assemble_load, assemble_operator, assemble_qoi, load_of
from .BeamForms import (
    FRAME_QOIS,
    PORTAL_MEAN,
    build_frame_problem,
    consistent_load,
    curvature_polynomial,
    element_beam,
    hermite_second,
    hermite_values,
)
from .MembraneForms import (
    MEMBRANE_MEAN,
    QOI_BOX,
    bilinear_basis,
    build_membrane_problem,
    element_quad,
)
from .models import (
    BeamLoad,
    CellLoad,
    ElementMatrices,
    LoadVariant,
    MembraneCoefficients,
    MembraneLoad,
    ParamProblem,
    PointLoad,
    QoI,
    ResolvedBeamLoad,
)

__all__ = [
    "FRAME_QOIS",
    "MEMBRANE_MEAN",
    "PORTAL_MEAN",
    "QOI_BOX",
    "BeamLoad",
    "CellLoad",
    "ElementMatrices",
    "LoadVariant",
    "MembraneCoefficients",
    "MembraneLoad",
    "ParamProblem",
    "PointLoad",
    "QoI",
    "ResolvedBeamLoad",
    "assemble_load",
    "assemble_operator",
    "assemble_qoi",
    "bilinear_basis",
    "build_frame_problem",
    "build_membrane_problem",
    "consistent_load",
    "curvature_polynomial",
    "element_beam",
    "element_quad",
    "hermite_second",
    "hermite_values",
    "load_of",
]
