"""Command line interface: `gcelab classify | verify | homogenize | holonomy | catalog`.

Every command writes one JSON document (sorted keys) to stdout. When stdout
is a terminal a rich summary table also goes to stderr, unless --json is set.
"""

import functools
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import BaseModel
from rich import box
from rich.console import Console
from rich.table import Table

from gcelab import __version__
from gcelab.api.schemas import (
    CatalogListing,
    CatalogListingEntry,
    HolonomyReport,
    HomogenizationReport,
    VerificationSummary,
    stable_float,
)
from gcelab.config import config
from gcelab.exceptions import GceLabError, InvalidParameterError
from gcelab.services.characteristic import classify_metric
from gcelab.services.homogenize import (
    holonomy_integral,
    lift_parallelogram,
    solve_flat_case,
    solve_hyperbolic_case,
)
from gcelab.services.verification import classification_document
from gcelab.utils.catalog import load_frame_file
from gcelab.utils.expressions import periodic_function_from_spec

logger = logging.getLogger(__name__)

stderr_console = Console(stderr=True)


def parse_alpha(text: str) -> complex:
    """Parse `a+bi`; the imaginary part must be positive."""
    try:
        alpha = complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as e:
        raise InvalidParameterError(f"cannot parse α = '{text}' (expected a+bi)") from e
    if alpha.imag <= 0:
        raise InvalidParameterError(f"α must have Im α > 0, got {text}")
    return alpha


def handle_errors(command):
    """Map library errors to exit codes with a one-line diagnostic on stderr."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except GceLabError as e:
            logger.debug("command failed", exc_info=True)
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


def emit(document: BaseModel, as_json: bool, table: Optional[Table] = None) -> None:
    payload = document.model_dump(mode="json", exclude_none=True)
    click.echo(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))
    if table is not None and not as_json and sys.stdout.isatty():
        stderr_console.print(table)


def _mark(passed: bool) -> str:
    return "[green]✓[/green]" if passed else "[red]✗[/red]"


@click.group()
@click.version_option(__version__, prog_name="gcelab")
@click.option("--log-level", default=None, help="Logging level (default LOG_LEVEL or INFO).")
def cli(log_level: Optional[str]):
    """Exterior calculus and hermitian structures on left-invariant frames."""
    level = (log_level or config.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


@cli.command()
@click.argument("frame_file", type=click.Path(path_type=Path))
@click.option("--tol", type=float, default=None, help="Residual tolerance.")
@click.option("--json", "as_json", is_flag=True, help="Only emit the JSON document.")
@handle_errors
def classify(frame_file: Path, tol: Optional[float], as_json: bool):
    """Classify the hermitian structure stored in FRAME_FILE."""
    tolerance = tol if tol is not None else config.tolerance.default
    frame = load_frame_file(frame_file, tolerance)
    report = classify_metric(frame, tolerance=tolerance, lee_threshold=config.tolerance.lee_threshold)
    document = classification_document(report)

    table = Table(title=f"{document.model}: {document.case_tag}", box=box.SIMPLE)
    table.add_column("flag")
    table.add_column("value", justify="center")
    table.add_column("residual", justify="right")
    for name, flag in sorted(document.flags.items()):
        table.add_row(name, _mark(flag.value), f"{flag.residual:.3e}")
    if document.c is not None:
        table.caption = f"c = {document.c:.12g}"
    emit(document, as_json, table)


@cli.command()
@click.argument("target")
@click.option("--tol", type=float, default=None, help="Residual tolerance.")
@click.option("--seed", type=int, default=None, help="Seed for the random checks (default 0).")
@click.option("--count", type=int, default=None, help="Random frames / parameters per suite.")
@click.option("--modifications", type=int, default=None, help="Random modifications per product model.")
@click.option("--alpha", default=None, help="Calabi-Eckmann parameter a+bi, Im > 0.")
@click.option("--workers", type=int, default=None, help="Models verified in parallel.")
@click.option("--timing", is_flag=True, help="Report wall time per model.")
@click.option("--json", "as_json", is_flag=True, help="Only emit the JSON document.")
@handle_errors
def verify(target, tol, seed, count, modifications, alpha, workers, timing, as_json):
    """Run the invariant suite on TARGET, a catalog model name or `catalog`."""
    from gcelab.dependencies import get_catalog, get_verification_service

    overrides = {
        key: value
        for key, value in dict(
            tolerance=tol, seed=seed, count=count, modifications=modifications, workers=workers
        ).items()
        if value is not None
    }
    service = get_verification_service(**overrides)
    parsed_alpha = parse_alpha(alpha) if alpha is not None else None
    names = [entry.name for entry in get_catalog().models] if target == "catalog" else [target]
    reports = service.verify(names, alpha=parsed_alpha, timing=timing)
    summary = VerificationSummary(
        tool_version=__version__, passed=all(r.passed for r in reports), reports=reports
    )

    table = Table(title=f"verification (tol {service.tolerance:g}, seed {service.seed})", box=box.SIMPLE)
    table.add_column("model")
    table.add_column("checks", justify="right")
    table.add_column("failed")
    table.add_column("", justify="center")
    for report in reports:
        failed = ", ".join(c.id for c in report.failed_checks) or (report.error or "")
        table.add_row(report.model, str(len(report.checks)), failed, _mark(report.passed))
    emit(summary, as_json, table)
    if not summary.passed:
        sys.exit(1)


@cli.command()
@click.argument("case", type=click.Choice(["flat", "hyperbolic"]))
@click.option("--f", "f_spec", required=True, help="Expression in t (or y), or a sample file.")
@click.option("--period", type=float, default=2 * math.pi, show_default=True, help="Period w (flat case).")
@click.option("--a0", type=float, default=None, help="Period a₀ (hyperbolic case).")
@click.option("--c", "c", type=float, default=None, help="Constant c (hyperbolic case).")
@click.option("--samples", type=int, default=None, help="Grid intervals per period.")
@click.option("--symmetrize", is_flag=True, help="Average with t ↦ -t (flat case, even f).")
@click.option("--json", "as_json", is_flag=True, help="Only emit the JSON document.")
@handle_errors
def homogenize(case, f_spec, period, a0, c, samples, symmetrize, as_json):
    """Solve the homogenization ODE for the conformal factor f."""
    if case == "flat":
        f = periodic_function_from_spec(f_spec, period)
        solution = solve_flat_case(f, steps=samples, symmetrize=symmetrize)
        drift, flag = None, symmetrize
    else:
        if a0 is None or c is None:
            raise InvalidParameterError("the hyperbolic case needs --a0 and --c")
        f = periodic_function_from_spec(f_spec, a0)
        solution = solve_hyperbolic_case(f, c, steps=samples)
        drift, flag = stable_float(solution.drift), None

    report = HomogenizationReport(
        case=case,
        c=stable_float(solution.c),
        period=stable_float(f.period),
        grid=[stable_float(v) for v in solution.grid],
        values=[stable_float(v) for v in solution.values],
        residuals={k: stable_float(v) for k, v in solution.residuals.items()},
        drift=drift,
        symmetrized=flag,
    )
    table = Table(title=f"{case} case, f = {f.name}", box=box.SIMPLE)
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("c", f"{report.c:.12g}")
    for key, value in sorted(report.residuals.items()):
        table.add_row(f"residual.{key}", f"{value:.3e}")
    emit(report, as_json, table)


@cli.command()
@click.option("--v", "V", type=float, nargs=2, required=True, help="First translation (x, y).")
@click.option("--w", "W", type=float, nargs=2, required=True, help="Second translation (x, y).")
@click.option("--samples", type=int, default=64, show_default=True, help="Samples per edge.")
@click.option("--tol", type=float, default=None, help="Agreement tolerance against the area integral.")
@click.option("--json", "as_json", is_flag=True, help="Only emit the JSON document.")
@handle_errors
def holonomy(V, W, samples, tol, as_json):
    """Fiber shift of the lifted commutator of two translations on Nil³."""
    tolerance = tol if tol is not None else config.tolerance.default
    path = lift_parallelogram(V, W, samples)
    oracle = holonomy_integral(V, W)
    report = HolonomyReport(
        V=list(V),
        W=list(W),
        shift=stable_float(path.shift),
        oracle=stable_float(oracle),
        horizontality_residual=stable_float(path.horizontality_residual),
    )
    table = Table(title="commutator holonomy", box=box.SIMPLE)
    table.add_column("shift", justify="right")
    table.add_column("-∫dλ", justify="right")
    table.add_row(f"{report.shift:.12g}", f"{report.oracle:.12g}")
    emit(report, as_json, table)
    if abs(path.shift - oracle) > tolerance * max(1.0, abs(oracle)):
        click.echo(f"shift {path.shift:.12g} disagrees with {oracle:.12g}", err=True)
        sys.exit(1)


@cli.command("catalog")
@click.option("--json", "as_json", is_flag=True, help="Only emit the JSON document.")
@handle_errors
def catalog_command(as_json: bool):
    """List the models of the catalog."""
    from gcelab.dependencies import get_catalog

    entries = get_catalog().models
    listing = CatalogListing(
        path=str(config.catalog.path),
        models=[CatalogListingEntry.from_entry(e) for e in entries],
    )
    table = Table(title="catalog", box=box.SIMPLE)
    for column in ("name", "kind", "dim", "expected case"):
        table.add_column(column)
    for e in entries:
        table.add_row(e.name, e.kind, str(e.dim), e.expected_case)
    emit(listing, as_json, table)


def main():
    cli()


if __name__ == "__main__":
    main()
