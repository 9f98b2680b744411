"""Model-independent entry points for assembling K, K', f, f' and g."""

from typing import Literal

import numpy as np

from sensbounds.linalg import SymSparse
from sensbounds.mesh import Box, Mesh1D, Mesh2D

from .BeamForms import (
    assemble_frame_load,
    assemble_frame_matrix,
    frame_element_matrices,
    frame_qoi,
)
from .MembraneForms import assemble_membrane_load, assemble_quad_matrix, membrane_qoi
from .models import BeamLoad, MembraneLoad, ParamProblem, QoI

OperatorKind = Literal["K", "K'"]
LoadKind = Literal["f", "f'"]


def assemble_operator(problem: ParamProblem, which: OperatorKind = "K") -> SymSparse:
    if which not in ("K", "K'"):
        raise ValueError(f"Unknown operator {which!r}; expected 'K' or \"K'\"")
    prime = which == "K'"

    if isinstance(problem.mesh, Mesh1D):
        pieces = frame_element_matrices(problem)
        local = [em.stiffness_prime if prime else em.stiffness for _, em in pieces]
        return assemble_frame_matrix(problem.mesh, local)

    c = problem.coefficients
    assert c is not None
    if prime:
        return assemble_quad_matrix(problem.mesh, c.a_prime, c.k_prime)
    return assemble_quad_matrix(problem.mesh, c.a, c.k)


def load_of(problem: ParamProblem, which: LoadKind) -> BeamLoad | MembraneLoad:
    if which == "f":
        return problem.load
    if which == "f'":
        return problem.load_prime
    raise ValueError(f"Unknown load {which!r}; expected 'f' or \"f'\"")


def assemble_load(problem: ParamProblem, which: LoadKind = "f") -> np.ndarray:
    load = load_of(problem, which)
    if isinstance(problem.mesh, Mesh1D):
        assert isinstance(load, BeamLoad)
        return assemble_frame_load(problem.mesh, load)
    assert isinstance(load, MembraneLoad)
    return assemble_membrane_load(problem.mesh, load)


def assemble_qoi(problem: ParamProblem, qoi_def: str | Box | np.ndarray) -> QoI:
    """
    Build the extraction vector of a quantity of interest.

    ``qoi_def`` is a frame target (see :func:`frame_qoi`), "average" or a
    :class:`Box` for the membrane, or a caller-supplied extraction vector.
    """
    mesh = problem.mesh
    if isinstance(qoi_def, np.ndarray):
        if qoi_def.shape != (mesh.n_free,):
            raise ValueError(
                f"Extraction vector has shape {qoi_def.shape}, "
                f"mesh has {mesh.n_free} DOFs"
            )
        return QoI(kind="custom", label="custom", extraction_vector=qoi_def.copy())

    if isinstance(mesh, Mesh1D):
        if not isinstance(qoi_def, str):
            raise ValueError(f"Frame QoI must be a DOF name, got {qoi_def!r}")
        return frame_qoi(mesh, qoi_def)

    assert isinstance(mesh, Mesh2D)
    if isinstance(qoi_def, Box):
        return membrane_qoi(mesh, qoi_def)
    if qoi_def == "average":
        return membrane_qoi(mesh)
    raise ValueError(f"Unknown membrane QoI {qoi_def!r}")
