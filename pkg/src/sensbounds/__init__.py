"""sensbounds: strict CRE bounds on sensitivity derivatives of structural outputs."""

from .parameters import ModelKind, Parameter, Role

__all__ = ["ModelKind", "Parameter", "Role"]
