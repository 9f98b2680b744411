"""
Command-line entry point.

    sensbounds run      --case frame-J1 [--meshes 2,4,8] [--xi 1.0] [-o DIR]
    sensbounds converge --case frame-J1 --xi 0.1,1.0,1.9
    sensbounds oracle   --case membrane-J2
    sensbounds report   results/frame-J1/frame-J1.csv

``run``, ``converge`` and ``oracle`` exit 0 only when every strictness
check passes and no row misses the equilibrium guard. Each verb writes
``run-manifest.json`` into its output directory.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from sensbounds.forms import LoadVariant
from sensbounds.parameters import ModelKind

from .CaseConfig import CASE_IDS, CaseConfig, resolve_config
from .Oracle import ORACLE_TOL, fd_oracle
from .Outputs import emit_outputs, read_csv, write_figures
from .RunManifest import RunManifest
from .Study import EQUILIBRIUM_GUARD, StudyResult, run_case, value_bounds

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Expected gap slopes: h^(2p-2) with p=3 for Hermite beams, p=2 for bilinear quads.
RATE_WINDOWS = {ModelKind.FRAME: (3.7, 4.3), ModelKind.MEMBRANE: (1.8, 2.2)}
XI_SPREAD_TOL = 0.3


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensbounds",
        description=(
            "Strict bounds on sensitivity derivatives of FE quantities of interest."
        ),
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    def study_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--case", choices=CASE_IDS, help="built-in case id")
        p.add_argument("--config", type=Path, help="YAML config document")
        p.add_argument(
            "--meshes", type=_int_list, help="divisions per member / cells per side"
        )
        p.add_argument("--xi", type=_float_list, help="coupling weights")
        p.add_argument("--reference", type=int, help="reference mesh size")
        p.add_argument(
            "--solver-tol", type=float, help="solver relative-residual tolerance"
        )
        p.add_argument("--workers", type=int, help="worker threads for study rows")
        p.add_argument(
            "--load-variant",
            choices=[v.value for v in LoadVariant],
            help="membrane β₂ derivative load placement",
        )
        p.add_argument("-o", "--output-dir", type=Path, help="output directory")

    run = sub.add_parser("run", help="bounds for every mesh and ξ of a case")
    study_flags(run)
    run.add_argument(
        "--value",
        action="store_true",
        help="also bound the quantity itself on each mesh",
    )

    converge = sub.add_parser("converge", help="convergence rates over a ξ sweep")
    study_flags(converge)

    oracle = sub.add_parser(
        "oracle", help="finite-difference check on the reference mesh"
    )
    study_flags(oracle)
    oracle.add_argument("--deltas", type=_float_list, help="finite-difference steps")

    report = sub.add_parser("report", help="PNG figures from a study CSV")
    report.add_argument("csv", type=Path, help="study CSV written by run or converge")
    report.add_argument(
        "-o",
        "--output-dir",
        type=Path,
        help="figure directory (default: <csv dir>/figures)",
    )

    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)


def config_from_args(args: argparse.Namespace) -> CaseConfig:
    if args.case is None and args.config is None:
        raise ValueError("Either --case or --config is required")
    config = resolve_config(
        case_id=args.case,
        config_path=args.config,
        mesh_sizes=args.meshes,
        xi_values=args.xi,
        solver_tol=args.solver_tol,
        workers=args.workers,
        output_dir=args.output_dir,
        load_variant=LoadVariant(args.load_variant) if args.load_variant else None,
    )
    if args.reference is not None:
        config = replace(config, reference_mesh=args.reference)
    return config


# ---------------------------------------------------------------------- #
# Verbs
# ---------------------------------------------------------------------- #


def _print_rows(result: StudyResult) -> None:
    print(f"{result.case_id}: J_ref = {result.j_ref:.12g}")
    print(f"{'h':>12} {'xi':>6} {'J_h':>18} {'lower':>18} {'upper':>18} {'RE gap':>10}")
    for row in result.rows:
        if not row.ok:
            print(f"{row.h:12.6g} {row.xi:6g}  FAILED: {row.error}")
            continue
        flag = "" if row.bracketed(result.j_ref) else "  << J_ref outside"
        print(
            f"{row.h:12.6g} {row.xi:6g} {row.J_h:18.12g} {row.lower:18.12g} "
            f"{row.upper:18.12g} {row.re_gap:10.3e}{flag}"
        )


def _report_failures(result: StudyResult) -> None:
    violations = result.violations()
    if violations:
        logger.warning(
            "%d of %d rows violate strict bounding", len(violations), len(result.rows)
        )
    unguarded = result.unguarded()
    if unguarded:
        logger.error(
            "%d of %d rows exceed the equilibrium guard %.0e: %s",
            len(unguarded),
            len(result.rows),
            EQUILIBRIUM_GUARD,
            ", ".join(f"h={row.h:g} xi={row.xi:g}" for row in unguarded),
        )


def _finish(manifest: RunManifest, config: CaseConfig, passed: bool) -> int:
    manifest.passed = passed
    manifest.save(config.output_dir)
    return 0 if passed else 1


def cmd_run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    manifest = RunManifest(command="run", config=config.to_mapping())
    result = run_case(config)
    emit_outputs(result, config.output_dir, manifest=manifest)
    _print_rows(result)

    if args.value:
        for h, report in value_bounds(config):
            print(
                f"value h={h:.6g}: {report.quantity_value:.12g} in "
                f"[{report.lower:.12g}, {report.upper:.12g}]"
            )

    _report_failures(result)
    return _finish(manifest, config, result.passed)


def cmd_converge(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    manifest = RunManifest(command="converge", config=config.to_mapping())
    result = run_case(config)
    emit_outputs(result, config.output_dir, manifest=manifest)
    _print_rows(result)

    _report_failures(result)
    low, high = RATE_WINDOWS[config.case.model]
    passed = result.passed
    slopes = []
    for fit in result.fitted_rates:
        if fit.gap is None:
            print(f"xi={fit.xi:g}: too few usable meshes for a rate fit ({fit.points})")
            passed = False
            continue
        slopes.append(fit.gap)
        in_window = low <= fit.gap <= high
        passed = passed and in_window
        re_text = "n/a" if fit.re_Jh is None else f"{fit.re_Jh:.3f}"
        print(
            f"xi={fit.xi:g}: gap slope {fit.gap:.3f} (expected [{low}, {high}]), "
            f"RE(J_h) slope {re_text}"
        )
    if len(slopes) > 1:
        spread = max(slopes) - min(slopes)
        print(f"gap slope spread over xi: {spread:.3f} (limit {XI_SPREAD_TOL})")
        passed = passed and spread <= XI_SPREAD_TOL
    return _finish(manifest, config, passed)


def cmd_oracle(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    manifest = RunManifest(command="oracle", config=config.to_mapping())
    result = fd_oracle(config, args.deltas)

    print(f"{result.case_id}: FD {result.fd_value:.12g}, J_ref {result.j_ref:.12g}")
    for d, estimate in zip(result.deltas, result.estimates):
        print(f"  delta={d:.6g}: {estimate:.12g}")
    for variant, value in result.variants.items():
        print(f"  J_ref with {variant}: {value:.12g}")
    print(f"relative difference {result.relative_difference:.3e} (limit {ORACLE_TOL})")
    if result.noisy:
        print(f"warning: Richardson spread {result.spread:.2e}")
    return _finish(manifest, config, result.agrees())


def cmd_report(args: argparse.Namespace) -> int:
    rows = read_csv(args.csv)
    directory = args.output_dir or args.csv.parent / "figures"
    manifest = RunManifest(command="report", config={"csv": str(args.csv)})
    for path in write_figures(rows, directory, args.csv.stem):
        manifest.record(path, "figure")
        logger.info("Wrote %s", path)
    manifest.passed = True
    manifest.save(directory)
    return 0


COMMANDS = {
    "run": cmd_run,
    "converge": cmd_converge,
    "oracle": cmd_oracle,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
