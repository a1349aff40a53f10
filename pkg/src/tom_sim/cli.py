"""Command line interface for tom-sim.

Subcommands:
  run             one episode of a run profile, trajectory printed
  batch           every seed of a run profile, metrics and tables written
  export-tree     the first planning tree of an agent, as records or DOT
  validate-model  build (and optionally dump) a task's generative model

Exit codes: 0 on success, 1 on configuration or validation errors, 2 on
usage errors.
"""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click

from .agents.agent import build_agent_model
from .config.config_manager import ConfigManager, parse_seeds
from .core.simulator import BatchResult, Metrics, RunConfig, Simulator
from .environment.grid_world import AGENTS, TaskConfig, observe, reset
from .model.generative_model import validate
from .model.serialization import dump_model
from .utils.errors import ConfigError, ExportError, ModelValidationError, TomSimError
from .utils.logger import configure_root
from .visualization.renderer import render_path, render_trace
from .visualization.tree_export import EXPORT_FORMATS, export_tree


def _planner_overrides(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option('--config-dir', type=click.Path(file_okay=False), default=None,
                     help='Directory holding tasks/, planners/ and runs/ profiles.'),
        click.option('--horizon', type=int, default=None, help='Planning depth.'),
        click.option('--policy-threshold', type=float, default=None,
                     help='Policy pruning threshold.'),
        click.option('--observation-threshold', type=float, default=None,
                     help='Observation pruning threshold.'),
        click.option('--temperature', type=float, default=None,
                     help='Action posterior temperature.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load_run(profile: str, config_dir: Optional[str], **overrides: Any) -> RunConfig:
    run = ConfigManager(config_dir).load_run_config(profile)
    run = run.with_overrides(
        horizon=overrides.pop('horizon', None),
        policy_prune_threshold=overrides.pop('policy_threshold', None),
        observation_prune_threshold=overrides.pop('observation_threshold', None),
        temperature=overrides.pop('temperature', None),
        **overrides,
    )
    return run.validate()


@click.group()
@click.option('-v', '--verbose', is_flag=True, help='Log at debug level.')
@click.option('--log-file', type=click.Path(dir_okay=False), default=None,
              help='Also write logs to this file.')
def cli(verbose: bool, log_file: Optional[str]) -> None:
    """tom-sim: active-inference agents with and without theory of mind."""
    configure_root(logging.DEBUG if verbose else logging.INFO, log_file)


@cli.command()
@click.option('--profile', required=True, help='Run profile name.')
@click.option('--seed', type=int, default=None, help='Seed (defaults to the first of the profile).')
@click.option('--out', type=click.Path(file_okay=False), default=None,
              help='Write trace, outcome and trees here.')
@click.option('--export-trees', is_flag=True, help='Keep every planning tree.')
@_planner_overrides
def run(profile: str, seed: Optional[int], out: Optional[str], export_trees: bool,
        config_dir: Optional[str], **overrides: Any) -> None:
    """Run one episode and print its trajectory."""
    config = _load_run(profile, config_dir, export_trees=export_trees or None, **overrides)
    seed = config.seeds[0] if seed is None else seed
    simulator = Simulator(config)
    result = simulator.run_episode(seed)
    task = config.effective_task()
    click.echo(render_trace(result.trace, task, seed))
    for a, agent in enumerate(AGENTS):
        click.echo(f"{agent} path: {render_path(result.trace, task, a)}")
    click.echo(json.dumps(result.outcome.to_dict()))  # type: ignore[attr-defined]
    if out:
        single = BatchResult(metrics=Metrics.from_outcomes([result.outcome]), episodes=[result])
        paths = simulator.write_batch(single, out)
        for step, trees in enumerate(result.trees):
            for name, tree in trees.items():
                export_tree(tree, Path(out) / f"tree_{name}_step{step}.jsonl", 'records')
        click.echo(f"wrote {', '.join(str(p) for p in paths.values())}")


@cli.command()
@click.option('--profile', required=True, help='Run profile name.')
@click.option('--seeds', 'seed_spec', default=None, help='Seeds, e.g. 0-99 or 1,4,9.')
@click.option('--out', type=click.Path(file_okay=False), default=None,
              help='Write outcome table, traces and metrics here.')
@click.option('--workers', type=int, default=None, help='Worker processes.')
@_planner_overrides
def batch(profile: str, seed_spec: Optional[str], out: Optional[str], workers: Optional[int],
          config_dir: Optional[str], **overrides: Any) -> None:
    """Run every seed of a profile and report metrics."""
    seeds = None
    if seed_spec is not None:
        try:
            seeds = parse_seeds(seed_spec)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint='--seeds') from e
    config = _load_run(profile, config_dir, seeds=seeds, workers=workers, **overrides)
    simulator = Simulator(config)
    result = simulator.run_batch()
    click.echo(json.dumps(result.metrics.to_dict(), indent=2))  # type: ignore[attr-defined]
    if out:
        paths = simulator.write_batch(result, out)
        click.echo(f"wrote {', '.join(str(p) for p in paths.values())}")


@cli.command('export-tree')
@click.option('--profile', required=True, help='Run profile name.')
@click.option('--agent', type=click.Choice(AGENTS), default='red', show_default=True)
@click.option('--format', 'fmt', type=click.Choice(EXPORT_FORMATS), default='records',
              show_default=True)
@click.option('--seed', type=int, default=None)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
@_planner_overrides
def export_tree_command(profile: str, agent: str, fmt: str, seed: Optional[int], out: str,
                        config_dir: Optional[str], **overrides: Any) -> None:
    """Export the step-0 planning tree of one agent."""
    config = _load_run(profile, config_dir, **overrides)
    simulator = Simulator(config)
    agents = simulator.make_agents()
    seed = config.seeds[0] if seed is None else seed
    observations = observe(reset(simulator.task, seed))
    index = AGENTS.index(agent)
    agents[index].update(observations[index])
    posterior, tree = agents[index].plan()
    export_tree(tree, out, fmt)
    click.echo(f"{agent} posterior: " + ', '.join(
        f"{name}={posterior[a]:.3f}" for a, name in enumerate(tree.action_names)))


@cli.command('validate-model')
@click.option('--task', type=click.Choice(['collision', 'foraging']), required=True)
@click.option('--agent', type=click.Choice(AGENTS), default='red', show_default=True)
@click.option('--role', type=click.Choice(['focal', 'other']), default='focal',
              show_default=True)
@click.option('--dump', type=click.Path(dir_okay=False), default=None,
              help='Write the model as YAML.')
def validate_model(task: str, agent: str, role: str, dump: Optional[str]) -> None:
    """Build a task model and report every validation problem."""
    config = TaskConfig.collision() if task == 'collision' else TaskConfig.foraging()
    model = build_agent_model(config, AGENTS.index(agent), role)
    problems = validate(model)
    if problems:
        raise ModelValidationError(model.name, problems)
    click.echo(f"{model.name}: {len(model.factors)} factors, {len(model.modalities)} "
               f"modalities, {model.action_count} actions - ok")
    if dump:
        dump_model(model, dump)
        click.echo(f"wrote {dump}")


def main(argv: Optional[list[str]] = None) -> int:
    """Console entrypoint."""
    try:
        cli.main(args=argv if argv is not None else sys.argv[1:], prog_name='tom-sim',
                 standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except (ConfigError, ModelValidationError, ExportError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except TomSimError as e:
        click.echo(f"error: {e}", err=True)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
