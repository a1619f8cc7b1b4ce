"""Command-line interface for spotmix experiments."""

import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import typer
from dotenv import load_dotenv
from pydantic import ValidationError

from .errors import ConfigError, SpotmixError
from .generators.config_generator import ConfigGenerator, describe_validation_error, dump_config, load_config
from .generators.trace_generator import TraceGenerator
from .models.experiment import ExperimentConfig, GeneratorConfig
from .models.omniscient import OptimizeRequest
from .models.policy import PolicyName
from .pipeline.analysis import run_analysis
from .pipeline.export import read_event_log, read_report, write_charts, write_rows_csv, write_run
from .pipeline.omniscient import brute_force, build_instance, evaluate_solution, schedule_from_events, solve_exact
from .pipeline.orchestrator import SweepOrchestrator
from .pipeline.simulator import resolve_trace, run_simulation
from .pipeline.validator import RunValidator

app = typer.Typer(help="spotmix - spot/on-demand serving simulator")

OUTPUT_DIR_ENV = "SPOTMIX_OUTPUT_DIR"


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level")):
    """Simulate SpotHedge and baseline policies over spot-capacity traces."""
    load_dotenv()
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@contextmanager
def _exit_codes():
    """Map library errors onto process exit codes."""
    try:
        yield
    except SpotmixError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(e.exit_code)
    except ValidationError as e:
        typer.echo(f"Error: {describe_validation_error(e)}", err=True)
        raise typer.Exit(ConfigError.exit_code)
    except json.JSONDecodeError as e:
        typer.echo(f"Error: not valid JSON ({e})", err=True)
        raise typer.Exit(ConfigError.exit_code)
    except OSError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(1)


def _output_dir(config: ExperimentConfig, out: Optional[Path]) -> Path:
    """--out, then $SPOTMIX_OUTPUT_DIR/<name>, then the config's own setting."""
    if out is not None:
        return out
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        return Path(env_dir) / config.name
    return config.resolved_out_dir()


def _apply_overrides(config: ExperimentConfig, seed: Optional[int], policy: Optional[str]) -> ExperimentConfig:
    if seed is not None:
        config.seed = seed
    if policy is not None:
        config.policy.name = _policy(policy)
    return config


def _policy(name: str) -> PolicyName:
    try:
        return PolicyName(name.strip())
    except ValueError:
        choices = ", ".join(p.value for p in PolicyName)
        raise ConfigError(f"policy: '{name}' is not one of {choices}")


def parse_seeds(text: str) -> List[int]:
    """'0,1,5' or '0-19' or a mix of both."""
    seeds: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                start, end = part.split("-", 1)
                seeds.extend(range(int(start), int(end) + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ConfigError(f"seeds: cannot parse '{part}'")
    if not seeds:
        raise ConfigError("seeds: at least one seed is required")
    return seeds


@app.command()
def simulate(
    config_path: Path = typer.Option(..., "--config", help="Experiment JSON file"),
    seed: Optional[int] = typer.Option(None, help="Override the root seed"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    policy: Optional[str] = typer.Option(None, help="Override the policy"),
    print_config: bool = typer.Option(False, "--print-config", help="Print the resolved config and exit"),
):
    """Run one experiment and write its report, logs and charts."""
    with _exit_codes():
        config = _apply_overrides(load_config(config_path), seed, policy)
        if print_config:
            typer.echo(dump_config(config), nl=False)
            return

        trace = resolve_trace(config)
        run = run_simulation(config, trace)
        out_dir = _output_dir(config, out)
        write_run(run, out_dir, charts=config.output.charts, event_log=config.output.event_log)

        d = config.cluster.cold_start_ticks(trace.tick_seconds)
        n_extra = config.policy.n_extra if config.cluster.od_capacity is None else None
        validator = RunValidator()
        is_valid, errors = validator.validate_run(run, trace, d, n_extra)
        if not is_valid:
            summary = validator.get_validation_summary(errors)
            typer.echo(f"Warning: run failed {summary['total_errors']} checks: {summary['error_types']}", err=True)

        report = run.report
        typer.echo(f"Run written to: {out_dir}")
        typer.echo(f"  availability:        {report.availability:.4f}")
        typer.echo(f"  cost relative to OD: {report.cost_relative_to_od:.4f}")
        typer.echo(f"  latency p50/p90/p99: {report.latency_p50:.2f}/{report.latency_p90:.2f}/{report.latency_p99:.2f}s")
        typer.echo(f"  failure rate:        {report.failure_rate:.4f}")


@app.command()
def sweep(
    config_path: Path = typer.Option(..., "--config", help="Experiment JSON file"),
    policies: Optional[str] = typer.Option(None, help="Comma-separated policies; default: the config's"),
    seeds: str = typer.Option("0-4", help="Seeds, e.g. '0-19' or '1,2,3'"),
    jobs: int = typer.Option(1, help="Runs executed in parallel"),
    out: Optional[Path] = typer.Option(None, help="Output directory"),
    print_config: bool = typer.Option(False, "--print-config", help="Print the resolved config and exit"),
):
    """Run every (policy, seed) combination and write a comparison table."""
    with _exit_codes():
        config = load_config(config_path)
        if print_config:
            typer.echo(dump_config(config), nl=False)
            return
        names = [_policy(p) for p in policies.split(",") if p.strip()] if policies else [config.policy.name]
        seed_list = parse_seeds(seeds)

        out_dir = _output_dir(config, out)
        orchestrator = SweepOrchestrator(jobs=jobs)
        runs = orchestrator.run_sweep(config, names, seed_list, out_dir)
        typer.echo(f"Sweep of {len(runs)} runs written to: {out_dir}")
        for name in names:
            group = [r.report for r in runs if r.report.policy == name.value]
            availability = sum(r.availability for r in group) / len(group)
            cost = sum(r.cost_relative_to_od for r in group) / len(group)
            typer.echo(f"  {name.value:15s} availability {availability:.4f}  relative cost {cost:.4f}")


@app.command()
def optimize(
    config_path: Path = typer.Option(..., "--config", help="Optimization request JSON file"),
    out: Path = typer.Option(Path("optimum.json"), help="Where to write the schedule"),
    exhaustive: bool = typer.Option(False, "--brute-force", help="Use exhaustive search (tiny instances)"),
):
    """Solve the offline optimum over a trace; optionally score a run's event log."""
    with _exit_codes():
        with open(config_path, "r") as f:
            request = OptimizeRequest.model_validate(json.load(f))
        base = config_path.parent
        trace_path = request.trace_path if request.trace_path.is_absolute() else base / request.trace_path
        trace = TraceGenerator().load(trace_path)

        k = request.k
        if k is None:
            mean_spot = sum(z.spot_unit_cost for z in trace.zones) / len(trace.zones)
            k = min(z.od_unit_cost for z in trace.zones) / mean_spot
        instance = build_instance(trace, request.n_tar, request.avail_tar, request.d, k,
                                  n_max=request.n_max, od_max=request.od_max)
        solution = brute_force(instance) if exhaustive else solve_exact(instance)

        result = {"objective": solution.objective, "solution": solution.model_dump(mode="json")}
        if request.events_path is not None:
            events_path = request.events_path if request.events_path.is_absolute() else base / request.events_path
            schedule = schedule_from_events(trace, read_event_log(events_path))
            evaluation = evaluate_solution(instance, schedule)
            result["evaluation"] = evaluation.model_dump(mode="json")
            if evaluation.objective > 0:
                result["gap"] = (evaluation.objective - solution.objective) / evaluation.objective

        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as f:
            json.dump(result, f, indent=2)
            f.write("\n")
        typer.echo(f"Optimal objective: {solution.objective:.3f} ({solution.nodes} nodes)")
        if "evaluation" in result:
            typer.echo(f"Scored run objective: {result['evaluation']['objective']:.3f}, "
                       f"feasible: {result['evaluation']['feasible']}")
        typer.echo(f"Schedule written to: {out}")


@app.command()
def analyze(
    n: int = typer.Option(6, help="Replicas"),
    lambdas: str = typer.Option("0.2,0.1,0.1", help="Per-zone preemption rates, comma-separated"),
    horizon: float = typer.Option(100.0, help="Time horizon T"),
    seeds: int = typer.Option(1000, help="Monte Carlo seeds"),
    out: Optional[Path] = typer.Option(None, help="CSV output path"),
):
    """Compare closed-form expected preemptions with Monte Carlo estimates."""
    with _exit_codes():
        try:
            rates = [float(x) for x in lambdas.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"lambdas: cannot parse '{lambdas}'")
        rows = run_analysis(n, rates, horizon, seeds)
        for row in rows:
            typer.echo(f"{row.policy:12s} analytic {row.analytic:10.3f}  "
                       f"simulated {row.monte_carlo_mean:10.3f} +/- {row.monte_carlo_stderr:.3f}  "
                       f"rel. error {row.relative_error:.4f}")
        if out is not None:
            fields = list(rows[0].model_dump().keys())
            write_rows_csv([row.model_dump() for row in rows], fields, out)
            typer.echo(f"Table written to: {out}")


@app.command("gen-trace")
def gen_trace(
    config_path: Path = typer.Option(..., "--config", help="Generator config, or an experiment config"),
    out: Path = typer.Option(..., help="Trace JSON to write"),
    seed: int = typer.Option(0, help="Root seed"),
):
    """Generate a capacity trace from Poisson zone models."""
    with _exit_codes():
        try:
            with open(config_path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path}: not valid JSON ({e})")
        if "trace" in data:
            generator_config = load_config(config_path).trace.generator
            if generator_config is None:
                raise ConfigError("trace.generator: the experiment uses a trace file, not a generator")
        else:
            generator_config = GeneratorConfig.model_validate(data)

        generator = TraceGenerator()
        trace = generator.generate_from_config(generator_config, seed)
        generator.save(trace, out)
        typer.echo(f"Trace with {len(trace.zones)} zones and {trace.horizon} ticks written to: {out}")


@app.command()
def plot(
    run_dirs: List[Path] = typer.Argument(..., help="Run or sweep directories"),
    out: Optional[Path] = typer.Option(None, help="Chart directory; default: the first input"),
):
    """Re-render charts from existing run directories."""
    with _exit_codes():
        reports = []
        for run_dir in run_dirs:
            manifest = run_dir / "manifest.jsonl"
            if manifest.exists():
                with open(manifest, "r") as f:
                    reports.extend(read_report(run_dir / json.loads(line)["dir"]) for line in f if line.strip())
            else:
                reports.append(read_report(run_dir))
        written = write_charts(reports, out or run_dirs[0])
        typer.echo(f"Wrote {len(written)} charts")


@app.command()
def create_config(
    template: str = typer.Argument("baseline", help="Template to use"),
    output_dir: Path = typer.Option(Path("experiments/configs"), help="Output directory"),
    customizations: Optional[str] = typer.Option(None, help="JSON string of overrides"),
):
    """Create an experiment config from a template."""
    with _exit_codes():
        generator = ConfigGenerator()
        custom_data = {}
        if customizations:
            try:
                custom_data = json.loads(customizations)
            except json.JSONDecodeError:
                typer.echo("Error: Invalid JSON in customizations", err=True)
                raise typer.Exit(ConfigError.exit_code)

        config = generator.generate_custom_config(template, custom_data)
        config_file = output_dir / f"{config.name}.json"
        generator.save_config(config, config_file)
        typer.echo(f"Config created: {config_file}")


@app.command()
def list_templates():
    """List available experiment templates."""
    generator = ConfigGenerator()
    typer.echo("Available templates:")
    for template in generator.list_templates():
        typer.echo(f"  - {template}")


if __name__ == "__main__":
    app()
