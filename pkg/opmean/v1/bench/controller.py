import functools
import logging
from typing import Callable, List, Optional

import typer
from pydantic import ValidationError

from opmean.utils.exceptions import (
    EXIT_INEQUALITY_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    OpmeanException,
)
from opmean.utils.query_parser import parse_grid, parse_ids, parse_params
from opmean.utils.utils_file import write_text
from opmean.v1._shared.schemas import (
    Backend,
    Command,
    EnsembleReport,
    GeneratorSpec,
    MeanKindId,
    OutputFormat,
    RunConfig,
)
from opmean.v1.bench.mapper import render_report
from opmean.v1.bench.use_case import cmd_mean, cmd_paper_example, cmd_sweep, cmd_verify
from opmean.v1.registry.use_case import registry_use_case

logger = logging.getLogger(__name__)

router = typer.Typer(
    help="Weighted Hermite-Hadamard operator inequalities: means, verification ensembles and sweeps.",
    no_args_is_help=True,
    add_completion=False,
)


def handle_errors(command: Callable) -> Callable:
    """Logs OpmeanException and validation errors and exits with their code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except OpmeanException as e:
            logger.error(e.detail)
            raise typer.Exit(code=e.exit_code)
        except ValidationError as e:
            for error in e.errors():
                location = ".".join(str(part) for part in error["loc"]) or "config"
                logger.error(f"{location}: {error['msg']}")
            raise typer.Exit(code=EXIT_USAGE)

    return wrapper


def _generator(
    a: Optional[str],
    b: Optional[str],
    dim: Optional[int],
    cond: Optional[float],
    seed: Optional[int],
    trials: Optional[int],
    complex_entries: bool,
) -> Optional[GeneratorSpec]:
    if a is not None or b is not None:
        return None
    values = {"dim": dim, "cond_cap": cond, "seed": seed, "trials": trials}
    return GeneratorSpec(complex_entries=complex_entries, **{k: v for k, v in values.items() if v is not None})


def _emit(report: EnsembleReport, out: Optional[str], output_format: OutputFormat, timing: bool) -> None:
    content = render_report(report, output_format, timing)
    if out:
        write_text(out, content)
    else:
        typer.echo(content)

    if any(case.error for case in report.cases):
        raise typer.Exit(code=EXIT_USAGE)
    raise typer.Exit(code=EXIT_INEQUALITY_FAILURE if report.failure_count else EXIT_OK)


@router.command("mean", help="Compute one operator mean of two matrices.")
@handle_errors
def mean_command(
    kind: MeanKindId = typer.Option(..., "--kind", help="nabla, harm, sharp, logm, pal_log, wlog_harm or wlog_geom."),
    weight: Optional[float] = typer.Option(None, "--lambda", help="Weight of the mean."),
    a: Optional[str] = typer.Option(None, "--a", help="Matrix file of the first operand."),
    b: Optional[str] = typer.Option(None, "--b", help="Matrix file of the second operand."),
    dim: Optional[int] = typer.Option(None, "--dim", help="Dimension of generated operands."),
    cond: Optional[float] = typer.Option(None, "--cond", help="Condition number cap of generated operands."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed (overrides OPMEAN_SEED)."),
    complex_entries: bool = typer.Option(False, "--complex", help="Generate complex Hermitian operands."),
    out: Optional[str] = typer.Option(None, "--out", help="Write the report here instead of stdout."),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
    timing: bool = typer.Option(False, "--timing", help="Include the runtime in the report."),
):
    config = RunConfig(
        command=Command.MEAN,
        a_path=a,
        b_path=b,
        generator=_generator(a, b, dim, cond, seed, None, complex_entries),
        kind=kind,
        weight=weight,
        out=out,
        format=output_format,
        timing=timing,
    )
    _emit(cmd_mean(config), out, output_format, timing)


@router.command("verify", help="Evaluate registry chains over a seeded ensemble.")
@handle_errors
def verify_command(
    chain: List[str] = typer.Option(..., "--chain", help="Chain id(s), repeated or comma separated."),
    trials: int = typer.Option(200, "--trials", help="Number of random pairs."),
    dim: Optional[int] = typer.Option(None, "--dim", help="Fixed dimension; cycles 2,3,4,6 when omitted."),
    cond: Optional[float] = typer.Option(None, "--cond", help="Condition number cap."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed (overrides OPMEAN_SEED)."),
    tol: Optional[float] = typer.Option(None, "--tol", help="Relative Loewner tolerance."),
    f: List[str] = typer.Option([], "--f", help="Palette function id(s); every palette member when omitted."),
    params: List[str] = typer.Option([], "--params", help="Fixed parameters k=v; the rest are drawn per trial."),
    a: Optional[str] = typer.Option(None, "--a", help="Matrix file of the first operand."),
    b: Optional[str] = typer.Option(None, "--b", help="Matrix file of the second operand."),
    complex_entries: bool = typer.Option(False, "--complex"),
    out: Optional[str] = typer.Option(None, "--out"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
    backend: Optional[Backend] = typer.Option(None, "--backend", help="serial, process or celery."),
    workers: Optional[int] = typer.Option(None, "--workers"),
    timing: bool = typer.Option(False, "--timing"),
):
    config = RunConfig(
        command=Command.VERIFY,
        a_path=a,
        b_path=b,
        generator=_generator(a, b, dim, cond, seed, trials, complex_entries),
        seed=seed,
        chains=parse_ids(chain),
        functions=parse_ids(f),
        params=parse_params(params),
        out=out,
        format=output_format,
        timing=timing,
        **_optional(tol=tol, backend=backend, workers=workers),
    )
    _emit(cmd_verify(config), out, output_format, timing)


@router.command("sweep", help="Evaluate one chain over a parameter grid.")
@handle_errors
def sweep_command(
    chain: str = typer.Option(..., "--chain", help="Chain id."),
    grid: List[str] = typer.Option([], "--grid", help="Grid k=v1:v2:n (or k=v), repeatable."),
    params: List[str] = typer.Option([], "--params", help="Fixed parameters k=v."),
    f: List[str] = typer.Option([], "--f", help="Palette function id(s)."),
    trials: int = typer.Option(1, "--trials", help="Random pairs per grid point."),
    dim: Optional[int] = typer.Option(None, "--dim"),
    cond: Optional[float] = typer.Option(None, "--cond"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    tol: Optional[float] = typer.Option(None, "--tol"),
    a: Optional[str] = typer.Option(None, "--a"),
    b: Optional[str] = typer.Option(None, "--b"),
    complex_entries: bool = typer.Option(False, "--complex"),
    out: Optional[str] = typer.Option(None, "--out"),
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format"),
    backend: Optional[Backend] = typer.Option(None, "--backend"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    timing: bool = typer.Option(False, "--timing"),
):
    config = RunConfig(
        command=Command.SWEEP,
        a_path=a,
        b_path=b,
        generator=_generator(a, b, dim, cond, seed, trials, complex_entries),
        seed=seed,
        chains=[chain],
        functions=parse_ids(f),
        params=parse_params(params),
        grid=parse_grid(grid),
        out=out,
        format=output_format,
        timing=timing,
        **_optional(tol=tol, backend=backend, workers=workers),
    )
    _emit(cmd_sweep(config), out, output_format, timing)


@router.command("paper-example", help="Reproduce the lambda=3/4 example on diag(1,2), diag(2,1).")
@router.command("example", hidden=True)
@handle_errors
def paper_example_command(
    out: Optional[str] = typer.Option(None, "--out"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
    timing: bool = typer.Option(False, "--timing"),
):
    config = RunConfig(command=Command.PAPER_EXAMPLE, out=out, format=output_format, timing=timing)
    _emit(cmd_paper_example(config), out, output_format, timing)


@router.command("chains", help="List the registry.")
@handle_errors
def chains_command():
    for listing in registry_use_case.get_all():
        params = ",".join(listing.params) or "-"
        typer.echo(f"{listing.id}\t{params}\t{listing.anchor}")


def _optional(**values):
    return {key: value for key, value in values.items() if value is not None}
