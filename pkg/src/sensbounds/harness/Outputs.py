"""
Study outputs: CSV table, plot-data series and PNG figures.

CSV
    Header ``h,xi,J_h,lower,upper,gap,re_Jh,re_gap,solver_res,equil_res,error``,
    one row per (h, ξ) in study order, numbers written with 17 significant
    digits so that re-reading reproduces them bit for bit. ``error`` is empty
    for completed rows and holds the failure message otherwise.

Plot data
    Whitespace-separated ``h value`` pairs, one block per series, blocks
    separated by two blank lines and introduced by ``# series: <name>``.
    Per ξ there is a bounds file (J_h, upper, lower) and an RE file
    (re_Jh, re_gap) meant for log-log axes.
"""

import csv
import logging
from collections.abc import Iterable, Sequence
from math import isnan
from pathlib import Path

from .RunManifest import RunManifest
from .Study import CSV_COLUMNS, StudyResult, StudyRow, fit_rate

logger = logging.getLogger(__name__)

FORMATS = ("csv", "plot-data")
BOUNDS_SERIES = ("J_h", "upper", "lower")
RE_SERIES = ("re_Jh", "re_gap")
CSV_HEADER = (*CSV_COLUMNS, "error")


def format_float(value: float) -> str:
    return format(value, ".17g")


def _xi_tag(xi: float) -> str:
    return format(xi, "g").replace(".", "p")


# ---------------------------------------------------------------------- #
# CSV
# ---------------------------------------------------------------------- #


def write_csv(rows: Sequence[StudyRow], path: Path) -> Path:
    if not rows:
        raise ValueError("Refusing to write a study CSV without rows")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([*(format_float(v) for v in row.values()), row.error])
    return path


def read_csv(path: Path) -> list[StudyRow]:
    """Rows of a study CSV, failure messages included."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(
                f"{path} is not a study CSV: expected header {','.join(CSV_HEADER)}"
            )
        rows = []
        for record in reader:
            if len(record) != len(CSV_HEADER):
                raise ValueError(
                    f"{path}: row has {len(record)} fields, "
                    f"expected {len(CSV_HEADER)}"
                )
            *numbers, error = record
            values = [float(v) for v in numbers]
            if isnan(values[2]) and not error:
                error = "failed"
            rows.append(StudyRow(*values, error=error))
    return rows


# ---------------------------------------------------------------------- #
# Plot data
# ---------------------------------------------------------------------- #


def _write_series(path: Path, series: dict[str, list[tuple[float, float]]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        blocks = []
        for name, points in series.items():
            lines = [f"# series: {name}"]
            lines.extend(f"{format_float(x)} {format_float(y)}" for x, y in points)
            blocks.append("\n".join(lines))
        f.write("\n\n\n".join(blocks))
        f.write("\n")


def _series(
    rows: list[StudyRow], names: tuple[str, ...]
) -> dict[str, list[tuple[float, float]]]:
    return {name: [(row.h, getattr(row, name)) for row in rows] for name in names}


def write_plot_data(result: StudyResult, directory: Path) -> list[Path]:
    """Bounds and RE series per ξ; failed rows are skipped."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for xi in result.xi_values:
        rows = [row for row in result.rows_for(xi) if row.ok]
        if not rows:
            continue
        stem = f"{result.case_id}-xi{_xi_tag(xi)}"

        bounds = directory / f"{stem}-bounds.dat"
        _write_series(bounds, _series(rows, BOUNDS_SERIES))
        errors = directory / f"{stem}-re.dat"
        _write_series(errors, _series(rows, RE_SERIES))
        paths.extend([bounds, errors])
    return paths


def read_plot_data(path: Path) -> dict[str, list[tuple[float, float]]]:
    series: dict[str, list[tuple[float, float]]] = {}
    current: list[tuple[float, float]] | None = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line.startswith("# series:"):
                current = series.setdefault(line.split(":", 1)[1].strip(), [])
            elif line and current is not None:
                x, y = line.split()
                current.append((float(x), float(y)))
    return series


# ---------------------------------------------------------------------- #
# Emission
# ---------------------------------------------------------------------- #


def emit_outputs(
    result: StudyResult,
    output_dir: Path,
    formats: Iterable[str] = FORMATS,
    manifest: RunManifest | None = None,
) -> list[Path]:
    """
    Write ``result`` in each of ``formats`` under ``output_dir``, recording
    every file in ``manifest`` when one is given.

    Raises:
        ValueError: the result has no rows or a format is unknown.
        OSError: ``output_dir`` cannot be written.
    """
    if not result.rows:
        raise ValueError(f"Study {result.case_id} has no rows to emit")
    formats = tuple(formats)
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"Unknown output formats: {', '.join(sorted(unknown))}")

    written: list[Path] = []
    if "csv" in formats:
        path = write_csv(result.rows, output_dir / f"{result.case_id}.csv")
        written.append(path)
        if manifest is not None:
            manifest.record(path, "csv", row_count=len(result.rows))
    if "plot-data" in formats:
        completed = sum(1 for row in result.rows if row.ok)
        for path in write_plot_data(result, output_dir):
            written.append(path)
            if manifest is not None:
                manifest.record(path, "plot-data", row_count=completed)
    for path in written:
        logger.info("Wrote %s", path)
    return written


# ---------------------------------------------------------------------- #
# Figures
# ---------------------------------------------------------------------- #


def write_figures(rows: Sequence[StudyRow], directory: Path, stem: str) -> list[Path]:
    """
    PNG figures per ξ: FE value with bounds against h, and RE(J_h), RE(gap)
    on log-log axes with fitted slopes in the legend.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not rows:
        raise ValueError("No rows to plot")
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for xi in sorted({row.xi for row in rows}):
        subset = sorted((r for r in rows if r.xi == xi and r.ok), key=lambda r: -r.h)
        if not subset:
            continue
        h = [r.h for r in subset]
        tag = f"{stem}-xi{_xi_tag(xi)}"

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(h, [r.J_h for r in subset], "o-", label="J_h")
        ax.plot(h, [r.upper for r in subset], "v--", label="upper")
        ax.plot(h, [r.lower for r in subset], "^--", label="lower")
        ax.set_xscale("log")
        ax.set_xlabel("h")
        ax.set_title(f"{stem}, xi={xi:g}")
        ax.legend()
        fig.tight_layout()
        path = directory / f"{tag}-bounds.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, marker in (("re_Jh", "o-"), ("re_gap", "s-")):
            pts = [(r.h, getattr(r, name)) for r in subset if getattr(r, name) > 0.0]
            if not pts:
                continue
            label = name
            if len(pts) >= 3:
                slope = fit_rate([p[0] for p in pts[-3:]], [p[1] for p in pts[-3:]])
                label = f"{name} (slope {slope:.2f})"
            ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker, label=label)
        ax.set_xlabel("h")
        ax.set_ylabel("relative error")
        ax.set_title(f"{stem}, xi={xi:g}")
        ax.legend()
        fig.tight_layout()
        path = directory / f"{tag}-re.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
