"""
Study configuration: built-in cases, YAML documents and CLI overrides.

A config document looks like::

    case_id: frame-J1
    mesh_sizes: [2, 4, 8, 16, 32]
    xi_values: [0.1, 1.0, 1.9]
    reference_mesh: 50
    solver_tol: 1.0e-12
    output_dir: results/frame-J1

Keys may appear in any order; unknown keys are rejected. Omitted keys take
the preset of ``case_id``. ``custom`` cases also name ``model``,
``parameter`` and ``qoi``.
"""

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import yaml

from sensbounds.forms import LoadVariant
from sensbounds.linalg import DEFAULT_REL_TOL
from sensbounds.parameters import ModelKind, Parameter

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SENSBOUNDS_OUTPUT_DIR"


@dataclass(slots=True, frozen=True)
class CaseDefinition:
    """What a case computes: model, active parameter and quantity of interest."""

    model: ModelKind
    parameter: Parameter
    qoi: str
    # Published reference value of the sensitivity, where one exists.
    published_value: float | None = None
    # Published value of the quantity itself at the mean parameters.
    published_quantity: float | None = None


CASES: dict[str, CaseDefinition] = {
    "frame-J1": CaseDefinition(
        ModelKind.FRAME, Parameter.BETA1, "Delta_C", -0.0176547, 0.0430866
    ),
    "frame-J2": CaseDefinition(
        ModelKind.FRAME, Parameter.BETA2, "theta_B", 0.0122243, 0.0444687
    ),
    "membrane-J1": CaseDefinition(
        ModelKind.MEMBRANE, Parameter.BETA1, "average", -8.762e-3
    ),
    "membrane-J2": CaseDefinition(
        ModelKind.MEMBRANE, Parameter.BETA2, "average", 1.1060
    ),
}

CASE_IDS = (*CASES, "custom")

_FRAME_MESHES = (2, 4, 8, 16, 32)
_MEMBRANE_MESHES = (8, 16, 32, 64)
_FD_DELTAS = (1e-2, 5e-3, 2.5e-3)


@dataclass(slots=True, frozen=True)
class CaseConfig:
    """
    One study: a case, the meshes and ξ values to sweep, and the reference.

    ``mesh_sizes`` count divisions per member (frame) or cells per side
    (membrane) and are stored finest-last, i.e. strictly increasing, so h
    strictly decreases. ``reference_mesh`` must be finer than all of them.
    """

    case_id: str
    mesh_sizes: tuple[int, ...]
    xi_values: tuple[float, ...] = (1.0,)
    reference_mesh: int = 50
    solver_tol: float = DEFAULT_REL_TOL
    output_dir: Path = Path("results")
    fd_deltas: tuple[float, ...] = _FD_DELTAS
    load_variant: LoadVariant = LoadVariant.BOUNDARY_F
    workers: int = 1
    model: ModelKind | None = None
    parameter: Parameter | None = None
    qoi: str | None = None

    def __post_init__(self) -> None:
        if self.case_id not in CASE_IDS:
            raise ValueError(
                f"Unknown case_id {self.case_id!r}; "
                f"expected one of {', '.join(CASE_IDS)}"
            )
        if not self.mesh_sizes:
            raise ValueError("mesh_sizes must not be empty")
        if any(n < 1 for n in self.mesh_sizes):
            raise ValueError(
                f"mesh_sizes must be positive, got {list(self.mesh_sizes)}"
            )
        if any(b <= a for a, b in zip(self.mesh_sizes, self.mesh_sizes[1:])):
            raise ValueError(
                f"mesh_sizes must refine strictly (h decreasing), got "
                f"{list(self.mesh_sizes)}"
            )
        if self.reference_mesh <= max(self.mesh_sizes):
            raise ValueError(
                f"reference_mesh={self.reference_mesh} must be finer than every "
                f"study mesh (max {max(self.mesh_sizes)})"
            )
        if not self.xi_values or any(xi <= 0.0 for xi in self.xi_values):
            raise ValueError(f"xi_values must be positive, got {list(self.xi_values)}")
        if not 0.0 < self.solver_tol < 1.0:
            raise ValueError(f"solver_tol must lie in (0, 1), got {self.solver_tol}")
        if not self.fd_deltas or any(d <= 0.0 for d in self.fd_deltas):
            raise ValueError(f"fd_deltas must be positive, got {list(self.fd_deltas)}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.case_id == "custom" and None in (self.model, self.parameter, self.qoi):
            raise ValueError("custom cases need model, parameter and qoi")

    # ------------------------------------------------------------------ #
    # Case resolution
    # ------------------------------------------------------------------ #

    @property
    def case(self) -> CaseDefinition:
        if self.case_id != "custom":
            return CASES[self.case_id]
        assert self.model is not None and self.parameter is not None
        assert self.qoi is not None
        return CaseDefinition(self.model, self.parameter, self.qoi)

    @classmethod
    def preset(cls, case_id: str) -> "CaseConfig":
        """The built-in study for ``case_id``."""
        if case_id not in CASES:
            raise ValueError(
                f"No preset for case_id {case_id!r}; expected one of {', '.join(CASES)}"
            )
        if CASES[case_id].model is ModelKind.FRAME:
            return cls(case_id, _FRAME_MESHES, reference_mesh=50)
        return cls(case_id, _MEMBRANE_MESHES, reference_mesh=128)

    def with_overrides(self, **changes: Any) -> "CaseConfig":
        """A copy with every non-None entry of ``changes`` applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    # ------------------------------------------------------------------ #
    # Serialization
    # ------------------------------------------------------------------ #

    def to_mapping(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "case_id": self.case_id,
            "mesh_sizes": list(self.mesh_sizes),
            "xi_values": list(self.xi_values),
            "reference_mesh": self.reference_mesh,
            "solver_tol": self.solver_tol,
            "output_dir": str(self.output_dir),
            "fd_deltas": list(self.fd_deltas),
            "load_variant": self.load_variant.value,
            "workers": self.workers,
        }
        if self.case_id == "custom":
            assert self.model is not None and self.parameter is not None
            data.update(
                model=self.model.value,
                parameter=self.parameter.value,
                qoi=self.qoi,
            )
        return data

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "CaseConfig":
        """
        Build a config from a plain mapping; missing keys fall back to the
        preset of ``case_id`` (custom cases need mesh_sizes themselves).
        """
        unknown = set(data) - _KEYS
        if unknown:
            raise ValueError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        if "case_id" not in data:
            raise ValueError("Config is missing case_id")

        case_id = str(data["case_id"])
        base: dict[str, Any] = {}
        if case_id in CASES:
            base = cls.preset(case_id).to_mapping()
        merged = {**base, **data}
        if "mesh_sizes" not in merged:
            raise ValueError("Config is missing mesh_sizes")

        sizes = merged["mesh_sizes"]
        variant = merged.get("load_variant", LoadVariant.BOUNDARY_F.value)
        return cls(
            case_id=case_id,
            mesh_sizes=tuple(int(n) for n in sizes),
            xi_values=tuple(float(x) for x in merged.get("xi_values", (1.0,))),
            reference_mesh=int(merged.get("reference_mesh", 2 * max(sizes))),
            solver_tol=float(merged.get("solver_tol", DEFAULT_REL_TOL)),
            output_dir=Path(merged.get("output_dir", "results")),
            fd_deltas=tuple(float(d) for d in merged.get("fd_deltas", _FD_DELTAS)),
            load_variant=LoadVariant(variant),
            workers=int(merged.get("workers", 1)),
            model=ModelKind(merged["model"]) if "model" in merged else None,
            parameter=Parameter(merged["parameter"]) if "parameter" in merged else None,
            qoi=str(merged["qoi"]) if "qoi" in merged else None,
        )


_KEYS = {
    "case_id",
    "mesh_sizes",
    "xi_values",
    "reference_mesh",
    "solver_tol",
    "output_dir",
    "fd_deltas",
    "load_variant",
    "workers",
    "model",
    "parameter",
    "qoi",
}


def load_config(path: Path) -> CaseConfig:
    """Read a YAML config document."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Config {path} must be a mapping, got {type(data).__name__}")
    logger.debug("Loaded config %s", path)
    return CaseConfig.from_mapping(data)


def resolve_config(
    case_id: str | None = None,
    config_path: Path | None = None,
    **overrides: Any,
) -> CaseConfig:
    """
    Layer a config: preset < config file < environment < explicit overrides.
    The environment only supplies the output directory.
    """
    if config_path is not None:
        config = load_config(config_path)
        if case_id is not None and case_id != config.case_id:
            raise ValueError(
                f"--case {case_id} conflicts with case_id {config.case_id} "
                f"in {config_path}"
            )
    elif case_id is not None:
        config = CaseConfig.preset(case_id)
    else:
        raise ValueError("Either a case id or a config file is required")

    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        config = replace(config, output_dir=Path(env_dir))
    return config.with_overrides(**overrides)
