# symbench/cli.py

"""Command-line interface for symbench.

Exit codes: 0 success, 1 runtime failure or failed verification, 2 invalid
input (campaign config or curve CSV), 3 enumeration cap exceeded.
"""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from symbench import __version__
from symbench.campaign.models import load_campaign_config
from symbench.campaign.runner import CampaignRunner
from symbench.core.fitting import fit_decay
from symbench.utils.exceptions import (
    CapabilityError,
    ConfigurationError,
    InvalidParameterError,
    ReportError,
    SymbenchError,
)
from symbench.utils.logging import setup_logging
from symbench.utils.reports import load_curve_csv, to_json

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_INPUT = 2
EXIT_CAPABILITY = 3

app = typer.Typer(
    name="symbench",
    help="Symmetry benchmarking of simulated qubit registers",
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)


@app.callback()
def callback():
    """Initialize the CLI application."""
    setup_logging()


def _fail(message: str, code: int) -> typer.Exit:
    err_console.print(f"[bold red]Error:[/bold red] {message}")
    return typer.Exit(code=code)


@app.command()
def run(
    config: Path = typer.Option(..., "--config", "-c", help="Campaign config (JSON)"),
    threads: Optional[int] = typer.Option(
        None, "--threads", "-t", min=1, max=64, help="Worker threads (results do not depend on it)"
    ),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", "-o", help="Override output_dir"),
):
    """Run a benchmarking campaign and write its reports.

    Example:
        symbench run --config campaigns/number_n4.json --threads 8
    """
    try:
        campaign = load_campaign_config(config)
    except ConfigurationError as e:
        raise _fail(str(e), EXIT_INVALID_INPUT)

    try:
        console.print(f"[bold blue]Running {campaign.kind} campaign {campaign.name}...[/bold blue]")
        result = CampaignRunner(campaign, threads, output_dir).run()
    except CapabilityError as e:
        raise _fail(str(e), EXIT_CAPABILITY)
    except SymbenchError as e:
        raise _fail(str(e), EXIT_FAILURE)

    table = Table(title=f"Campaign {campaign.name}")
    table.add_column("Curve", style="cyan")
    table.add_column("Order", justify="right")
    table.add_column("Decay", justify="right")
    table.add_column("Gamma_1", justify="right")
    table.add_column("mu", justify="right", style="green")
    for name, fit in sorted(result.outcome.fits.items()):
        table.add_row(name, str(fit.order), f"{fit.decay:.6f}", f"{fit.gamma1:.6f}", f"{fit.mu:.6f}")
    console.print(table)
    console.print(f"[bold green]Wrote {len(result.files)} files to {result.output_dir}[/bold green]")


@app.command()
def verify(
    config: Path = typer.Option(..., "--config", "-c", help="Campaign config (JSON)"),
    exact: bool = typer.Option(False, "--exact", help="Enumerate the whole ensemble"),
    samples: Optional[int] = typer.Option(None, "--samples", "-n", min=1, help="Sampled elements"),
    level: float = typer.Option(0.01, "--level", min=1e-9, max=0.5, help="Family-wise test level"),
):
    """Check that the campaign's design is a one-design on its sector.

    Example:
        symbench verify --config campaigns/number_n4.json --exact
        symbench verify --config campaigns/number_n6.json --samples 5000
    """
    if exact == (samples is not None):
        raise _fail("Pass exactly one of --exact or --samples N", EXIT_INVALID_INPUT)
    try:
        campaign = load_campaign_config(config)
    except ConfigurationError as e:
        raise _fail(str(e), EXIT_INVALID_INPUT)

    try:
        report = CampaignRunner(campaign).verify("exact" if exact else "statistical", samples, level)
    except CapabilityError as e:
        raise _fail(str(e), EXIT_CAPABILITY)
    except SymbenchError as e:
        raise _fail(str(e), EXIT_FAILURE)

    table = Table(title=f"{report.ensemble} on sector {report.sector_label} ({report.n_elements} elements)")
    table.add_column("Condition", style="cyan")
    table.add_column("Max violation", justify="right")
    table.add_column("Result")
    for condition in (1, 2, 3):
        ok = condition not in report.failed_conditions
        table.add_row(
            str(condition),
            f"{report.max_violation(condition):.3e}",
            "[green]pass[/green]" if ok else "[red]FAIL[/red]",
        )
    console.print(table)
    if not report.passed:
        console.print(f"[bold red]Failed conditions: {report.failed_conditions}[/bold red]")
        raise typer.Exit(code=EXIT_FAILURE)
    console.print("[bold green]One-design conditions hold[/bold green]")


@app.command()
def fit(
    input: Path = typer.Option(..., "--input", "-i", help="Curve CSV"),
    order: Optional[int] = typer.Option(None, "--order", min=1, max=2, help="Highest number of exponentials"),
    offset: Optional[str] = typer.Option(None, "--offset", help="include or subtract"),
):
    """Fit a decay curve and print the result as JSON on stdout.

    Example:
        symbench fit --input results/D_curve.csv --order 1
    """
    if offset not in (None, "include", "subtract"):
        raise _fail(f"--offset must be include or subtract, got {offset!r}", EXIT_INVALID_INPUT)
    try:
        curve = load_curve_csv(input)
        result = fit_decay(curve, order, offset)  # type: ignore[arg-type]
    except (ReportError, InvalidParameterError) as e:
        raise _fail(str(e), EXIT_INVALID_INPUT)
    except SymbenchError as e:
        raise _fail(str(e), EXIT_FAILURE)
    typer.echo(to_json(result.to_dict()))


@app.command()
def version():
    """Show version information."""
    console.print(f"[bold]symbench[/bold] v{__version__}")
    console.print("Symmetry benchmarking of simulated qubit registers")


if __name__ == "__main__":
    app()
