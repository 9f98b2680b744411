"""Enumerations shared across the model, solver and harness layers."""

from enum import Enum


class ModelKind(str, Enum):
    FRAME = "frame"
    MEMBRANE = "membrane"


class Parameter(str, Enum):
    """The input parameter a sensitivity derivative is taken with respect to."""

    BETA1 = "beta1"
    BETA2 = "beta2"

    @property
    def index(self) -> int:
        return 0 if self is Parameter.BETA1 else 1


class Role(str, Enum):
    PRIMAL = "primal"
    ADJOINT = "adjoint"
