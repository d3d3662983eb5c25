#!/usr/bin/env python3
"""
Ride-Sharing Network Planner - CLI Interface
Steady-state evaluation, design optimization and simulation of a multi-zone
shared-ride fleet
"""
import click
import csv
import functools
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# Add the project root to the path so `src` imports work from any directory
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src import __version__
from src.config.config_manager import ConfigManager, setup_logging
from src.config.validation import ConfigValidator
from src.evaluation.evaluator import compare_designs, evaluate_design
from src.exceptions import (
    BalanceError,
    DesignValidationError,
    GridValidationError,
    IngestionError,
    OptimizationError,
    ScenarioLoadError,
    StateIndexError,
    UnservableError,
)
from src.models.planning_models import EvaluationOutcome
from src.models.scenario_models import RhoSpec
from src.network.design import load_design
from src.optimization.optimizer import optimize, sweep
from src.rebalancing.transportation import solve_transportation
from src.reporting import report_writer
from src.scenario.catalog import (
    builtin_design,
    builtin_design_data,
    builtin_design_names,
    builtin_scenario,
    builtin_scenario_data,
    builtin_scenario_names,
)
from src.scenario.ingest import (
    TimeWindow,
    ingest_trip_summary,
    read_trips_csv,
    synthetic_trip_stream,
    write_trips_csv,
)
from src.scenario.loader import load_scenario
from src.simulation.oracles import run_oracles
from src.simulation.simulator import SimConfig, analytic_diagnostics, run_replications

console = Console()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

USAGE_ERRORS = (
    ScenarioLoadError,
    DesignValidationError,
    GridValidationError,
    IngestionError,
    StateIndexError,
    OSError,
    ValueError,
)
INFEASIBLE_ERRORS = (OptimizationError, BalanceError, UnservableError)


class PlannerGroup(click.Group):
    """Click group whose usage errors exit with status 1"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            console.print("[red]Aborted[/red]")
            sys.exit(EXIT_USAGE)


def handle_errors(func):
    """Map planner exceptions onto the exit-code contract"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except INFEASIBLE_ERRORS as e:
            console.print(f"[red]❌ Infeasible: {e}[/red]")
            for row in getattr(e, "diagnostics", []):
                console.print(f"[dim]   start {row['start']}: {row['status']} {row['detail']}[/dim]")
            sys.exit(EXIT_INFEASIBLE)
        except USAGE_ERRORS as e:
            console.print(f"[red]❌ Error: {e}[/red]")
            sys.exit(EXIT_USAGE)

    return wrapper


# ----------------------------------------------------------------------
# argument helpers
# ----------------------------------------------------------------------

def _resolve_scenario(value: str):
    """Scenario file path or built-in scenario name"""
    if Path(value).exists():
        return load_scenario(value)
    if value.lower() in builtin_scenario_names():
        return builtin_scenario(value)
    raise ScenarioLoadError(f"file not found: {value}")


def _resolve_design(value: str, scenario):
    if Path(value).exists():
        return load_design(value, scenario.grid)
    if value.lower() in builtin_design_names():
        return builtin_design(value, scenario.grid)
    raise DesignValidationError(f"file not found: {value}")


def _floats(text: str, name: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{text}'", param_hint=name)


def _settings(ctx):
    return ctx.obj["config_manager"].config


def _write_outputs(ctx, data: Dict[str, Any], out: Optional[str], rows: Optional[List[Dict[str, Any]]] = None, emit_csv: bool = False):
    config = _settings(ctx)
    digits = config.reporting.significant_digits
    if out:
        report_writer.write_json(data, out, digits)
        console.print(f"[dim]💾 Report written to {out}[/dim]")
    if rows and (emit_csv or config.reporting.emit_csv):
        target = Path(out).with_suffix(".csv") if out else Path(config.reporting.output_dir) / f"{data['meta']['scenario']}_{data['meta']['command']}.csv"
        report_writer.write_csv(rows, target, digits)
        console.print(f"[dim]📈 CSV written to {target}[/dim]")


def _print_json(data: Dict[str, Any], digits: int):
    console.print_json(data=report_writer.round_significant(data, digits))


def _print_csv(rows: List[Dict[str, Any]]):
    if not rows:
        return
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    click.echo(output.getvalue(), nl=False)


# ----------------------------------------------------------------------
# command group
# ----------------------------------------------------------------------

@click.group(cls=PlannerGroup)
@click.version_option(version=__version__, prog_name="Ride-Sharing Network Planner")
@click.option('--verbose', '-v', is_flag=True, help='Enable debug logging')
@click.option('--config-dir', type=click.Path(file_okay=False), help='Directory holding base.yaml and environments/')
@click.option('--env', 'environment', type=click.Choice(['development', 'testing', 'production']), help='Configuration environment')
@click.pass_context
def cli(ctx, verbose, config_dir, environment):
    """
    🚕 Ride-Sharing Network Planner

    Plans idle-vehicle deployment and seeker routing for a shared-ride fleet
    on a grid of square zones, and checks the plans by simulation.
    """
    ctx.ensure_object(dict)
    manager = ConfigManager(config_dir, environment)
    ctx.obj['verbose'] = verbose
    ctx.obj['config_manager'] = manager
    setup_logging(manager.config.logging, verbose)


@cli.command('evaluate')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--design', '-d', 'design_arg', required=True, help='Design file or built-in name')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.option('--emit-csv', is_flag=True, help='Also write per-zone metrics as CSV')
@click.option('--check-uniqueness', is_flag=True, help='Re-solve from a second seed and warn on multiple steady states')
@click.option('--output', '-o', type=click.Choice(['table', 'json']), default='table', help='Output format')
@click.pass_context
@handle_errors
def evaluate_cmd(ctx, scenario_arg, design_arg, out, emit_csv, check_uniqueness, output):
    """📊 Evaluate one design: steady state, rebalancing plan and system cost"""
    config = _settings(ctx)
    scenario = _resolve_scenario(scenario_arg)
    design = _resolve_design(design_arg, scenario)
    outcome = evaluate_design(
        scenario,
        design,
        solver_config=config.solver,
        rebalance_config=config.rebalance,
        penalty=config.optimizer.infeasible_penalty,
        probe_uniqueness=check_uniqueness or None,
    )
    report = report_writer.evaluation_report(scenario, design, outcome)
    rows = report_writer.zone_table(scenario, design, outcome) if outcome.feasible else None
    _write_outputs(ctx, report, out, rows, emit_csv)

    if output == 'json':
        _print_json(report, config.reporting.significant_digits)
    elif outcome.feasible:
        _display_performance(scenario.name, outcome.report)
        _display_zones(rows)
    if not outcome.feasible:
        console.print(f"[red]❌ Design infeasible ({outcome.status}): {outcome.detail}[/red]")
        sys.exit(EXIT_INFEASIBLE)


@cli.command('optimize')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--seed', type=int, help='Random seed for the multistarts')
@click.option('--multistarts', type=int, help='Number of random starts')
@click.option('--max-iters', type=int, help='Iterations per start')
@click.option('--workers', type=int, help='Parallel worker processes')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.option('--design-out', type=click.Path(dir_okay=False), help='Also write the best design as a design file')
@click.option('--emit-csv', is_flag=True, help='Also write per-zone metrics as CSV')
@click.option('--output', '-o', type=click.Choice(['table', 'json']), default='table', help='Output format')
@click.pass_context
@handle_errors
def optimize_cmd(ctx, scenario_arg, seed, multistarts, max_iters, workers, out, design_out, emit_csv, output):
    """🎯 Search idle counts and path fractions for the lowest cost per passenger"""
    config = _settings(ctx)
    overrides = {k: v for k, v in dict(seed=seed, multistarts=multistarts, max_iters=max_iters, workers=workers).items() if v is not None}
    optimizer_config = replace(config.optimizer, **overrides)
    scenario = _resolve_scenario(scenario_arg)

    console.print(Panel.fit(f"🚀 Optimizing '{scenario.name}' with {optimizer_config.multistarts} start(s)", style="bold blue"))

    def progress(summary):
        mark = "✅" if summary.feasible else "⚠️ "
        console.print(f"   {mark} start {summary.start}: Z = {summary.best_objective:.4f} after {summary.iterations} iterations ({summary.stop_reason})")

    result = optimize(scenario, optimizer_config, config.solver, config.rebalance, config.cache, progress=progress)
    settings = {
        "seed": optimizer_config.seed,
        "multistarts": optimizer_config.multistarts,
        "max_iters": optimizer_config.max_iters,
    }
    report = report_writer.optimization_report(scenario, result, settings)
    outcome = _best_outcome(result)
    rows = report_writer.zone_table(scenario, result.best_design, outcome)
    _write_outputs(ctx, report, out, rows, emit_csv)
    if design_out:
        report_writer.write_json(result.best_design.to_spec(scenario.grid), design_out, config.reporting.significant_digits)

    if output == 'json':
        _print_json(report, config.reporting.significant_digits)
    else:
        _display_performance(scenario.name, result.best_report)
        _display_zones(rows)
        _display_delta(result.best_design.to_spec(scenario.grid)["delta"])


@cli.command('simulate')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--design', '-d', 'design_arg', required=True, help='Design file or built-in name')
@click.option('--horizon', type=float, help='Simulated hours')
@click.option('--warmup', type=float, help='Hours discarded before measuring')
@click.option('--seed', type=int, help='Random seed')
@click.option('--replications', type=int, help='Independent replications')
@click.option('--workers', type=int, help='Parallel worker processes')
@click.option('--event-log', type=click.Path(dir_okay=False), help='CSV of every vehicle state change')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.option('--output', '-o', type=click.Choice(['table', 'json']), default='table', help='Output format')
@click.pass_context
@handle_errors
def simulate_cmd(ctx, scenario_arg, design_arg, horizon, warmup, seed, replications, workers, event_log, out, output):
    """🎲 Simulate the fleet at an evaluated design and compare with the analytic model"""
    config = _settings(ctx)
    overrides = dict(horizon=horizon, warmup=warmup, seed=seed, replications=replications, workers=workers, event_log=event_log)
    settings = replace(config.simulation, **{k: v for k, v in overrides.items() if v is not None})
    scenario = _resolve_scenario(scenario_arg)
    design = _resolve_design(design_arg, scenario)

    outcome = evaluate_design(scenario, design, solver_config=config.solver, rebalance_config=config.rebalance)
    if not outcome.feasible:
        console.print(f"[red]❌ Design infeasible ({outcome.status}): {outcome.detail}[/red]")
        sys.exit(EXIT_INFEASIBLE)

    sim_config = SimConfig.from_outcome(scenario, design, outcome, settings)
    console.print(Panel.fit(
        f"🚀 Simulating '{scenario.name}': {int(sim_config.fleet.sum())} vehicles, "
        f"{settings.horizon:g} h, {settings.replications} replication(s)",
        style="bold blue",
    ))
    metrics = run_replications(sim_config, settings.replications, settings.workers)
    diagnostics = analytic_diagnostics(metrics, scenario, design, outcome.report, settings.diagnostic_tolerance)
    report = report_writer.simulation_report(scenario, metrics, diagnostics)
    _write_outputs(ctx, report, out)

    if output == 'json':
        _print_json(report, config.reporting.significant_digits)
    else:
        _display_diagnostics(metrics, diagnostics)
    if metrics.starved:
        console.print(f"[red]❌ Fleet starved: a zone queue reached {metrics.max_queue} callers[/red]")
        sys.exit(EXIT_INFEASIBLE)


@cli.command('oracle')
@click.option('--samples', type=int, help='Monte-Carlo samples per constant')
@click.option('--seed', type=int, help='Random seed')
@click.option('--tolerance', type=float, help='Relative error allowed for PASS')
@click.option('--output', '-o', type=click.Choice(['table', 'json', 'csv']), default='table', help='Output format')
@click.pass_context
@handle_errors
def oracle_cmd(ctx, samples, seed, tolerance, output):
    """📐 Estimate the zone-geometry constants by Monte Carlo"""
    config = _settings(ctx)
    overrides = dict(samples=samples, seed=seed, tolerance=tolerance)
    oracle_config = replace(config.oracle, **{k: v for k, v in overrides.items() if v is not None})
    rows = report_writer.oracle_rows(run_oracles(oracle_config), oracle_config.tolerance)

    if output == 'json':
        _print_json({"tolerance": oracle_config.tolerance, "rows": rows}, config.reporting.significant_digits)
    elif output == 'csv':
        _print_csv(rows)
    else:
        table = Table(title=f"Geometry constants ({oracle_config.samples:,} samples, tolerance {oracle_config.tolerance:.1%})")
        table.add_column("Constant", style="bold")
        table.add_column("Estimate", justify="right")
        table.add_column("Std. error", justify="right")
        table.add_column("Expected", justify="right")
        table.add_column("Rel. error", justify="right")
        table.add_column("Result", justify="center")
        for row in rows:
            style = "green" if row["result"] == "PASS" else "red"
            table.add_row(
                row["name"],
                f"{row['estimate']:.5f}",
                f"{row['std_error']:.5f}",
                f"{row['expected']:.5f}",
                f"{row['relative_error']:.3%}",
                f"[{style}]{row['result']}[/{style}]",
            )
        console.print(table)

    failed = [row["name"] for row in rows if row["result"] == "FAIL"]
    if failed:
        console.print(f"[red]❌ {len(failed)} constant(s) outside tolerance: {', '.join(failed)}[/red]")
        sys.exit(EXIT_INFEASIBLE)


@cli.command('ingest')
@click.option('--trips', required=True, type=click.Path(dir_okay=False), help='Trip records CSV')
@click.option('--grid-scenario', required=True, help='Scenario file or built-in name supplying grid and costs')
@click.option('--window', default='07:00-09:00', show_default=True, help='Daily time window HH:MM-HH:MM')
@click.option('--days', default=1, type=int, show_default=True, help='Number of days covered by the records')
@click.option('--name', help='Name of the ingested scenario')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Scenario file to write')
@click.pass_context
@handle_errors
def ingest_cmd(ctx, trips, grid_scenario, window, days, name, out):
    """📥 Turn raw trip records into a scenario demand matrix"""
    config = _settings(ctx)
    base = _resolve_scenario(grid_scenario)
    summary = ingest_trip_summary(read_trips_csv(trips), base.grid, TimeWindow.parse(window), days)

    data = base.to_dict()
    data.update(
        {
            "name": name or f"{base.name}_ingested",
            "demand": summary.demand.tolist(),
            "demand_scale": 1.0,
        }
    )
    report_writer.write_json(data, out, config.reporting.significant_digits)

    table = Table(title=f"Ingestion of {trips}")
    table.add_column("Item", style="bold")
    table.add_column("Value", justify="right")
    for key, value in summary.to_dict().items():
        table.add_row(key.replace("_", " "), f"{value:,.1f}" if isinstance(value, float) else f"{value:,}")
    console.print(table)
    console.print(f"[green]✅ Scenario written to {out}[/green]")


@cli.command('rebalance')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--rho', required=True, help='Net idle-vehicle rates: JSON file or comma-separated values')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.pass_context
@handle_errors
def rebalance_cmd(ctx, scenario_arg, rho, out):
    """🔁 Solve the rebalancing transportation problem for given net rates"""
    config = _settings(ctx)
    scenario = _resolve_scenario(scenario_arg)
    if Path(rho).exists():
        with open(rho, "r", encoding="utf-8") as f:
            values = RhoSpec.model_validate(json.load(f)).rho
    else:
        values = _floats(rho, "--rho")
    if len(values) != scenario.size:
        raise click.BadParameter(f"expected {scenario.size} values, got {len(values)}", param_hint="--rho")
    plan = solve_transportation(scenario.grid, values, scenario.speed, config.rebalance)
    _write_outputs(ctx, report_writer.rebalance_report(scenario, values, plan), out)

    table = Table(title=f"Rebalancing plan ({plan.vehicle_hours:.3f} vehicles en route)")
    table.add_column("From → To", style="bold")
    table.add_column("Flow (veh/hr)", justify="right")
    for pair, flow in plan.nonzero_flows().items():
        table.add_row(pair.replace("->", " → "), f"{flow:.4f}")
    console.print(table)


@cli.command('compare')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--design', '-d', 'design_arg', required=True, help='Design file or built-in name')
@click.option('--baseline', '-b', 'baseline_arg', default='benchmark', show_default=True, help='Baseline design file or built-in name')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.pass_context
@handle_errors
def compare_cmd(ctx, scenario_arg, design_arg, baseline_arg, out):
    """⚖️  Relative cost and travel-time reductions of a design against a baseline"""
    config = _settings(ctx)
    scenario = _resolve_scenario(scenario_arg)
    design = _resolve_design(design_arg, scenario)
    baseline = _resolve_design(baseline_arg, scenario)
    comparison = compare_designs(scenario, design, baseline, solver_config=config.solver, rebalance_config=config.rebalance)
    _write_outputs(ctx, report_writer.comparison_report(scenario, comparison), out)

    if not (comparison["design_feasible"] and comparison["baseline_feasible"]):
        console.print(
            f"[red]❌ Cannot compare: design feasible={comparison['design_feasible']}, "
            f"baseline feasible={comparison['baseline_feasible']}[/red]"
        )
        sys.exit(EXIT_INFEASIBLE)

    table = Table(title=f"{design_arg} against {baseline_arg} on '{scenario.name}'")
    table.add_column("Metric", style="bold")
    table.add_column("Design", justify="right")
    table.add_column("Baseline", justify="right")
    table.add_column("Reduction", justify="right")
    ours, theirs = comparison["design"], comparison["baseline"]
    table.add_row("Cost per passenger ($)", f"{ours['cost_per_pax']:.3f}", f"{theirs['cost_per_pax']:.3f}", f"{comparison['cost_reduction']:.2%}")
    table.add_row(
        "Agency cost per passenger ($)",
        f"{ours['agency_cost'] / ours['total_demand']:.3f}",
        f"{theirs['agency_cost'] / theirs['total_demand']:.3f}",
        f"{comparison['agency_cost_reduction']:.2%}",
    )
    table.add_row(
        "Door-to-door time (min)",
        f"{60 * ours['mean_door_to_door']:.2f}",
        f"{60 * theirs['mean_door_to_door']:.2f}",
        f"{comparison['door_to_door_reduction']:.2%}",
    )
    console.print(table)


@cli.command('sweep')
@click.option('--scenario', '-s', 'scenario_arg', required=True, help='Scenario file or built-in name')
@click.option('--betas', default='10,20,30', show_default=True, help='Values of time ($/pax-hr)')
@click.option('--scales', default='1,2,3', show_default=True, help='Demand scaling factors')
@click.option('--seed', type=int, help='Random seed for the multistarts')
@click.option('--multistarts', type=int, help='Number of random starts per point')
@click.option('--workers', type=int, help='Parallel worker processes')
@click.option('--out', type=click.Path(dir_okay=False), help='Report file (JSON)')
@click.option('--emit-csv', is_flag=True, help='Also write the sweep table as CSV')
@click.pass_context
@handle_errors
def sweep_cmd(ctx, scenario_arg, betas, scales, seed, multistarts, workers, out, emit_csv):
    """📈 Optimize the design over a grid of values of time and demand scales"""
    config = _settings(ctx)
    beta_values = _floats(betas, "--betas")
    scale_values = _floats(scales, "--scales")
    overrides = {k: v for k, v in dict(seed=seed, multistarts=multistarts, workers=workers).items() if v is not None}
    optimizer_config = replace(config.optimizer, **overrides)
    scenario = _resolve_scenario(scenario_arg)

    console.print(Panel.fit(f"🚀 Sweeping {len(beta_values)} × {len(scale_values)} points on '{scenario.name}'", style="bold blue"))
    rows = sweep(scenario, beta_values, scale_values, optimizer_config, config.solver, config.rebalance, config.cache)
    settings = {"betas": beta_values, "scales": scale_values, "seed": optimizer_config.seed, "multistarts": optimizer_config.multistarts}
    _write_outputs(ctx, report_writer.sweep_report(scenario, rows, settings), out, rows, emit_csv)

    table = Table(title="Optimized designs")
    for column in ("β", "q", "Idle", "Rebalancing", "Fleet", "Pax-hours", "Z ($/pax)"):
        table.add_column(column, justify="right")
    for row in rows:
        if not row["feasible"]:
            table.add_row(f"{row['beta']:g}", f"{row['scale']:g}", "[red]infeasible[/red]", "", "", "", "")
            continue
        idle = " / ".join(f"{row[f'idle_{z}']:.1f}" for z in scenario.grid.zone_ids)
        table.add_row(
            f"{row['beta']:g}", f"{row['scale']:g}", idle,
            f"{row['rebalancing']:.1f}", f"{row['total_fleet']:.1f}",
            f"{row['passenger_hours']:.1f}", f"{row['cost_per_pax']:.3f}",
        )
    console.print(table)
    if not any(row["feasible"] for row in rows):
        sys.exit(EXIT_INFEASIBLE)


@cli.group()
@click.pass_context
def scenario(ctx):
    """🗺️  Built-in scenarios and synthetic trip data"""
    pass


@scenario.command('list')
def scenario_list():
    """List the built-in scenarios and designs"""
    table = Table(title="Built-in scenarios")
    table.add_column("Name", style="bold")
    table.add_column("Zones", justify="right")
    table.add_column("Trips/hr", justify="right")
    table.add_column("Design", justify="center")
    for name in builtin_scenario_names():
        case = builtin_scenario(name)
        table.add_row(name, str(case.size), f"{case.total_demand:,.0f}", "✅" if name in builtin_design_names() else "")
    console.print(table)


@scenario.command('export')
@click.argument('name')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Scenario file to write')
@click.option('--design-out', type=click.Path(dir_okay=False), help='Also write the built-in design of the same name')
@handle_errors
def scenario_export(name, out, design_out):
    """Write a built-in scenario (and its design) as JSON"""
    try:
        data = builtin_scenario_data(name)
        design = builtin_design_data(name) if design_out else None
    except KeyError as e:
        raise ScenarioLoadError(e.args[0]) from None
    report_writer.write_json(data, out)
    if design is not None:
        report_writer.write_json(design, design_out)
    console.print(f"[green]✅ Exported '{name}' to {out}[/green]")


@scenario.command('synth-trips')
@click.option('--scenario', '-s', 'scenario_arg', default='chicago3x3', show_default=True, help='Scenario file or built-in name')
@click.option('--window', default='07:00-09:00', show_default=True, help='Daily time window HH:MM-HH:MM')
@click.option('--days', default=1, type=int, show_default=True, help='Days of records')
@click.option('--seed', default=0, type=int, show_default=True, help='Random seed')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Trip records CSV to write')
@handle_errors
def scenario_synth_trips(scenario_arg, window, days, seed, out):
    """Generate coordinate-located trips whose ingestion returns the scenario demand"""
    case = _resolve_scenario(scenario_arg)
    records = synthetic_trip_stream(case.grid, case.demand, TimeWindow.parse(window), days, seed)
    count = write_trips_csv(records, out)
    console.print(f"[green]✅ Wrote {count:,} trips to {out}[/green]")


@cli.group()
@click.pass_context
def config(ctx):
    """⚙️  Configuration management"""
    pass


@config.command('show')
@click.option('--output', '-o', type=click.Choice(['table', 'json']), default='table', help='Output format')
@click.pass_context
def config_show(ctx, output):
    """Show the merged configuration"""
    manager = ctx.obj['config_manager']
    data = manager.to_dict()
    if output == 'json':
        console.print_json(data=data)
        return

    console.print(f"[bold]Environment:[/bold] {manager.environment.value}  [bold]Directory:[/bold] {manager.config_dir}")
    for section, values in data.items():
        if not isinstance(values, dict):
            continue
        table = Table(title=section)
        table.add_column("Setting", style="bold")
        table.add_column("Value")
        for key, value in values.items():
            table.add_row(key, str(value))
        console.print(table)


@config.command('validate')
@click.pass_context
def config_validate(ctx):
    """Validate the merged configuration"""
    errors, warnings = ConfigValidator(ctx.obj['config_manager'].config).validate_all()
    for warning in warnings:
        console.print(f"[yellow]⚠️  {warning}[/yellow]")
    for error in errors:
        console.print(f"[red]❌ {error}[/red]")
    if errors:
        sys.exit(EXIT_USAGE)
    console.print("[green]✅ Configuration is valid[/green]")


# ----------------------------------------------------------------------
# display helpers
# ----------------------------------------------------------------------

def _best_outcome(result):
    return EvaluationOutcome(
        True, result.best_objective, "converged",
        report=result.best_report, solution=result.best_solution, plan=result.best_plan,
    )


def _display_performance(name: str, report):
    table = Table(title=f"System performance: {name}")
    table.add_column("Metric", style="bold")
    table.add_column("Value", justify="right")
    table.add_row("Active vehicles ΣM_i", f"{float(sum(report.per_zone_active)):.2f}")
    table.add_row("Rebalancing vehicles M_b", f"{report.rebalancing:.2f}")
    table.add_row("Fleet size M", f"{report.total_fleet:.2f}")
    table.add_row("Passenger hours P", f"{report.passenger_hours:.2f}")
    table.add_row("Agency cost ($/hr)", f"{report.agency_cost:,.2f}")
    table.add_row("Passenger cost ($/hr)", f"{report.passenger_cost:,.2f}")
    table.add_row("Door-to-door (min)", f"{60 * report.mean_door_to_door:.2f}")
    table.add_row("[bold]Z ($/pax)[/bold]", f"[bold]{report.cost_per_pax:.4f}[/bold]")
    console.print(table)


def _display_zones(rows: Optional[List[Dict[str, Any]]]):
    if not rows:
        return
    table = Table(title="Vehicles per zone")
    table.add_column("Zone", style="bold", justify="right")
    table.add_column("Idle", justify="right")
    table.add_column("Local seekers", justify="right")
    table.add_column("Remote seekers", justify="right")
    table.add_column("Active", justify="right")
    table.add_column("ρ (veh/hr)", justify="right")
    for row in rows:
        table.add_row(
            str(row["zone"]),
            f"{row['idle']:.2f}",
            f"{row['seeker_local']:.2f}",
            f"{row['seeker_remote']:.2f}",
            f"{row['active']:.2f}",
            f"{row['net_rebalancing']:+.2f}",
        )
    console.print(table)


def _display_delta(delta: Dict[str, float]):
    if not delta:
        return
    table = Table(title="Seeker path fractions")
    table.add_column("Pair : next zone", style="bold")
    table.add_column("Fraction", justify="right")
    for key, value in delta.items():
        table.add_row(key, f"{value:.3f}")
    console.print(table)


def _display_diagnostics(metrics, diagnostics: Dict[str, Any]):
    console.print(
        f"\n📊 Served {metrics.served:,} of {metrics.generated:,} callers "
        f"({metrics.served_rate:,.1f}/hr), {metrics.queued:,} still queued, "
        f"mean pickup distance {metrics.mean_pickup_distance:.3f} km"
    )
    table = Table(title="Simulation against the analytic model")
    table.add_column("Quantity", style="bold")
    table.add_column("Simulated", justify="right")
    table.add_column("Analytic", justify="right")
    table.add_column("Gap", justify="right")
    table.add_column("Flag", justify="center")
    for name, row in diagnostics.items():
        style = "green" if row["flag"] == "pass" else "yellow"
        table.add_row(
            name.replace("_", " "),
            f"{row['simulated']:.4f}",
            f"{row['analytic']:.4f}",
            f"{row['relative_gap']:.2%}",
            f"[{style}]{row['flag'].upper()}[/{style}]",
        )
    console.print(table)


def main():
    cli(obj={})


if __name__ == '__main__':
    main()
