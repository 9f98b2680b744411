"""Case configuration, mesh-refinement studies, oracles and study outputs."""

from .CaseConfig import (
    CASE_IDS,
    CASES,
    OUTPUT_DIR_ENV,
    CaseConfig,
    CaseDefinition,
    load_config,
    resolve_config,
)
from .Oracle import OracleResult, fd_oracle, oracle_deltas, quantity_at, richardson
from .OutputMeta import OutputMeta, file_digest
from .Outputs import (
    CSV_HEADER,
    emit_outputs,
    read_csv,
    read_plot_data,
    write_csv,
    write_figures,
    write_plot_data,
)
from .RunManifest import RunManifest
from .Study import (
    CSV_COLUMNS,
    EQUILIBRIUM_GUARD,
    RateFit,
    StudyResult,
    StudyRow,
    build_case_problem,
    evaluate_row,
    fit_rate,
    fit_rates,
    reference_value,
    run_case,
    sensitivity_report,
    value_bounds,
)
from .StudyRunner import RowTask, StudyRunner

__all__ = [
    "CASES",
    "CASE_IDS",
    "CSV_COLUMNS",
    "CSV_HEADER",
    "EQUILIBRIUM_GUARD",
    "OUTPUT_DIR_ENV",
    "CaseConfig",
    "CaseDefinition",
    "OracleResult",
    "OutputMeta",
    "RateFit",
    "RowTask",
    "RunManifest",
    "StudyResult",
    "StudyRow",
    "StudyRunner",
    "build_case_problem",
    "emit_outputs",
    "evaluate_row",
    "fd_oracle",
    "file_digest",
    "fit_rate",
    "fit_rates",
    "load_config",
    "oracle_deltas",
    "quantity_at",
    "read_csv",
    "read_plot_data",
    "reference_value",
    "resolve_config",
    "richardson",
    "run_case",
    "sensitivity_report",
    "value_bounds",
    "write_csv",
    "write_figures",
    "write_plot_data",
]
