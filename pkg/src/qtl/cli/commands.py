"""
CLI commands for qtl.
"""

import sys
from functools import wraps
from typing import Callable, Optional

import click
from rich.console import Console
from rich.table import Table

from qtl import __version__

console = Console()
err_console = Console(stderr=True)


def handle_errors(fn: Callable) -> Callable:
    """Turn any QtlError into a one-line diagnostic and exit code 1."""
    from qtl.core.exceptions import QtlError

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except QtlError as e:
            err_console.print(f"[red]Error:[/red] {e}", soft_wrap=True, highlight=False)
            sys.exit(1)

    return wrapper


def scenario_options(fn: Callable) -> Callable:
    """Options shared by every experiment command."""
    options = [
        click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False),
                     help="Scenario JSON, or a result CSV to replay"),
        click.option("--preset", "-p", help="Name of a bundled preset (see 'qtl presets')"),
        click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1),
                     help="Run with this single seed instead of the configured ones"),
        click.option("--out", "-o", "output_dir", type=click.Path(file_okay=False),
                     help="Output directory (default: config, then QTL_OUTPUT_DIR)"),
        click.option("--workers", "-w", type=click.IntRange(min=1),
                     help="Worker threads (default: QTL_MAX_WORKERS or CPU count)"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def resolve_config(config_path: Optional[str], preset: Optional[str], **overrides):
    """Load the scenario from exactly one of --config / --preset and apply overrides."""
    from qtl.core.exceptions import ConfigurationError
    from qtl.core.schemas import load_scenario
    from qtl.presets import load_preset

    if bool(config_path) == bool(preset):
        raise ConfigurationError("Give exactly one of --config or --preset")
    config = load_scenario(config_path) if config_path else load_preset(preset)
    return config.with_overrides(**overrides)


def run_experiment(kind: str, config, output_dir: Optional[str], workers: Optional[int]) -> None:
    """Create, execute and report one experiment."""
    from qtl.experiments import ExperimentFactory

    experiment = ExperimentFactory.create(kind, config, max_workers=workers)
    with console.status(f"Running {experiment.kind.value} for {config.name}..."):
        report = experiment.execute(output_dir)
    print_report(report)


def print_report(report) -> None:
    from qtl.storage.results import format_value

    table = Table(title=f"{report.scenario}: {report.kind.value}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    for key, value in report.rows:
        table.add_row(key, value if isinstance(value, str) else format_value(value))
    console.print(table)
    for note in report.notes:
        console.print(f"[yellow]Note:[/yellow] {note}")
    if report.files:
        console.print("\n[blue]Files:[/blue]")
        for path in report.files:
            console.print(f"  {path}")


@click.group()
@click.version_option(version=__version__, prog_name="qtl")
@click.option("--log-level", default=None, help="Log level (default: QTL_LOG_LEVEL or INFO)")
@click.option("--log-json", is_flag=True, default=False, help="Render log events as JSON")
def cli(log_level: Optional[str], log_json: bool):
    """
    qtl: quantum thermalization lab.

    Closed-form equilibrium predictions, accessible-region sampling and exact
    propagation for small gas/container systems.
    """
    from qtl.config import get_settings
    from qtl.core.logging import configure_logging

    settings = get_settings()
    configure_logging(
        level=log_level or settings.log_level,
        json=settings.log_json or log_json,
    )


@cli.command()
@scenario_options
@handle_errors
def predict(config_path, preset, seed, output_dir, workers):
    """
    Evaluate every closed-form prediction for the scenario.

    Examples:

        qtl predict --preset micro-2x50

        qtl predict --config my_scenario.json --out results/
    """
    config = resolve_config(config_path, preset, seed=seed)
    run_experiment("predict", config, output_dir, workers)


@cli.command()
@scenario_options
@click.option("--samples", "-n", type=int, help="Number of accessible-region samples")
@click.option("--bins", "-b", type=int, help="Number of entropy bins")
@handle_errors
def histogram(config_path, preset, seed, output_dir, workers, samples, bins):
    """
    Sample the accessible region and histogram the local entropy.

    Example:

        qtl histogram --preset histogram --samples 100000 --bins 50
    """
    config = resolve_config(config_path, preset, seed=seed, samples=samples, bins=bins)
    run_experiment("histogram", config, output_dir, workers)


@cli.command()
@scenario_options
@handle_errors
def evolve(config_path, preset, seed, output_dir, workers):
    """
    Propagate every (seed, initial state) pair and record trajectories.

    Example:

        qtl evolve --preset canonical-2x3 --workers 4
    """
    config = resolve_config(config_path, preset, seed=seed)
    run_experiment("evolve", config, output_dir, workers)


@cli.command()
@scenario_options
@handle_errors
def sweep(config_path, preset, seed, output_dir, workers):
    """
    Measure occupation fluctuations against container size and fit the scaling.

    Example:

        qtl sweep --preset fluctuation-sweep
    """
    config = resolve_config(config_path, preset, seed=seed)
    run_experiment("fluctuation-sweep", config, output_dir, workers)


@cli.command()
@scenario_options
@handle_errors
def run(config_path, preset, seed, output_dir, workers):
    """
    Run the experiment named in the scenario's 'experiment' field.

    Useful for replaying a result CSV:

        qtl run --config results/micro-2x50_evolve_summary.csv
    """
    config = resolve_config(config_path, preset, seed=seed)
    run_experiment(config.experiment.value, config, output_dir, workers)


@cli.command()
@handle_errors
def presets():
    """List the bundled scenario presets."""
    from qtl.presets import list_presets, load_preset

    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Experiment", style="green")
    table.add_column("Dimension", justify="right")
    table.add_column("Interaction")
    for name in list_presets():
        config = load_preset(name)
        gas_dim = sum(n for _, n in config.gas.levels)
        container_dim = sum(n for _, n in config.container.levels)
        dimension = str(gas_dim * container_dim)
        if config.sweep is not None:
            dimension = ", ".join(
                str(gas_dim * config.sweep_container(size).dimension) for size in config.sweep.sizes
            )
        table.add_row(
            name,
            config.experiment.value,
            dimension,
            f"{config.interaction.kind.value} (deltaI={config.interaction.delta:g})",
        )
    console.print(table)
