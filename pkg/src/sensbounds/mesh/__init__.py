"""Frame and quadrilateral meshes, DOF maps and quadrature rules."""

from .FrameMesh import (
    Element,
    FrameGeometry,
    FrameNode,
    Member,
    MemberDef,
    Mesh1D,
    StiffnessProfile,
    build_frame_mesh,
)
from .QuadMesh import SIDE_SIGNS, Box, Mesh2D, build_quad_mesh
from .Quadrature import Quadrature, gauss_rule

__all__ = [
    "SIDE_SIGNS",
    "Box",
    "Element",
    "FrameGeometry",
    "FrameNode",
    "Member",
    "MemberDef",
    "Mesh1D",
    "Mesh2D",
    "Quadrature",
    "StiffnessProfile",
    "build_frame_mesh",
    "build_quad_mesh",
    "gauss_rule",
]
