import logging

import typer
from rich.console import Console
from rich.logging import RichHandler

from opmean.utils.settings import settings
from opmean.v1.routes import routes


logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(message)s",
    datefmt="[%X]",
    handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
)
logger = logging.getLogger(__name__)


app = typer.Typer(
    name="opmean",
    help="Weighted Hermite-Hadamard operator inequalities: means, verification ensembles and sweeps.",
    no_args_is_help=True,
    add_completion=False,
)
app.add_typer(routes)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Log warnings and errors only."),
):
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif quiet:
        logging.getLogger().setLevel(logging.WARNING)


def cli():
    app()


if __name__ == "__main__":
    cli()
