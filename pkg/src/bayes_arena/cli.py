"""Command-line entry point: figure sweeps, simulation, training, serving.

Every subcommand is a deterministic function of its flags, input files, and
seed; outputs are byte-stable so they can be diffed and regression-tested.
CSV (not plots) is the figure artifact: 12 significant digits, `.` decimal
separator, probability rows that sum to 1.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click

from .domains import SKILLS
from .infer import joint_posterior, skill_posterior, target_posterior
from .learning import NoDataError, evaluate, extract_records, fit
from .model import (
    ModelParams,
    build_skill_model,
    build_target_model,
    load_models,
    save_models,
)
from .sim import (
    BadScenarioError,
    BotPolicy,
    ScriptedRandomPolicy,
    World,
    load_scenario,
    read_log,
    run_episode,
    write_log,
)

CONFIG_ENV = "BAYES_ARENA_CONFIG"


class IoFailure(click.ClickException):
    exit_code = 1


def _fmt(x: float) -> str:
    if x == float("-inf"):
        return "-inf"
    return format(x, ".12g")


def _resolve_scenario(setup: str) -> dict:
    """A|B, an explicit path, or a name looked up in $BAYES_ARENA_CONFIG."""
    if setup in ("A", "B") or os.path.exists(setup):
        return load_scenario(setup)
    config_dir = os.environ.get(CONFIG_ENV)
    if config_dir:
        candidate = os.path.join(config_dir, setup)
        if not candidate.endswith(".json"):
            candidate += ".json"
        if os.path.exists(candidate):
            return load_scenario(candidate)
    raise BadScenarioError(f"unknown scenario {setup!r}")


def _parse_grid(grid: str) -> list[float]:
    try:
        start_s, stop_s, step_s = grid.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise click.UsageError(f"grid must be start:stop:step, got {grid!r}")
    if step <= 0 or start > stop:
        raise click.UsageError(f"bad grid {grid!r}")
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def _params(e_ally, e_id, persistence, prev_weight) -> ModelParams:
    if prev_weight is not None:
        return ModelParams(e_ally=e_ally, e_id=e_id, persistence=None,
                           prev_weight=prev_weight)
    return ModelParams(e_ally=e_ally, e_id=e_id, persistence=persistence)


def _write_text(path: str, text: str) -> None:
    try:
        if path == "-":
            sys.stdout.write(text)
            return
        with open(path, "w") as f:
            f.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path!r}: {exc}")


@click.group()
def main():
    """Bayesian druid bot: sweeps, simulation, training, evaluation, serving."""


@main.command("sweep-target")
@click.option("--setup", default="A", show_default=True, help="A, B, or scenario path")
@click.option("--grid", default="0.05:0.95:0.05", show_default=True)
@click.option("--e-ally", type=float, default=0.6, show_default=True)
@click.option("--persistence", type=float, default=0.4, show_default=True)
@click.option("--prev-weight", type=float, default=None)
@click.option("--out", default="-", show_default=True, help="CSV path or - for stdout")
def cmd_sweep_target(setup, grid, e_ally, persistence, prev_weight, out):
    """Target posterior per roster member across the dying-soft-evidence grid."""
    scenario = _resolve_scenario(setup)
    snapshot = World(scenario).snapshot()
    ids = snapshot.ids
    lines = ["e_id," + ",".join(ids)]
    for e_id in _parse_grid(grid):
        params = _params(e_ally, e_id, persistence, prev_weight)
        dist = target_posterior(build_target_model(params, len(ids)), snapshot)
        lines.append(",".join([_fmt(e_id)] + [_fmt(p) for p in dist.probs]))
    _write_text(out, "\n".join(lines) + "\n")


@main.command("sweep-skill")
@click.option("--setup", default="A", show_default=True)
@click.option("--grid", default="0.05:0.95:0.05", show_default=True)
@click.option("--e-ally", type=float, default=0.6, show_default=True)
@click.option("--persistence", type=float, default=0.4, show_default=True)
@click.option("--prev-weight", type=float, default=None)
@click.option("--out", default="-", show_default=True)
def cmd_sweep_skill(setup, grid, e_ally, persistence, prev_weight, out):
    """Skill posterior (mixed over targets) across the same grid.

    The soft evidence sweeps the target model only; the skill model's
    imminent-death table stays fixed and the shift emerges through the
    target mixture.
    """
    scenario = _resolve_scenario(setup)
    snapshot = World(scenario).snapshot()
    lines = ["e_id," + ",".join(SKILLS.values)]
    for e_id in _parse_grid(grid):
        params = _params(e_ally, e_id, persistence, prev_weight)
        tm = build_target_model(params, len(snapshot.ids))
        sm = build_skill_model(params)
        dist = skill_posterior(sm, snapshot, target_posterior(tm, snapshot))
        lines.append(",".join([_fmt(e_id)] + [_fmt(p) for p in dist.probs]))
    _write_text(out, "\n".join(lines) + "\n")


@main.command("joint-table")
@click.option("--setup", default="A", show_default=True)
@click.option("--e-id", type=float, default=0.9, show_default=True)
@click.option("--e-ally", type=float, default=0.6, show_default=True)
@click.option("--prev-weight", type=float, default=2.0, show_default=True)
@click.option("--out", default="-", show_default=True)
def cmd_joint_table(setup, e_id, e_ally, prev_weight, out):
    """Natural-log joint P(target, skill); impossible pairs print as -inf."""
    scenario = _resolve_scenario(setup)
    snapshot = World(scenario).snapshot()
    params = ModelParams(e_ally=e_ally, e_id=e_id, persistence=None,
                         prev_weight=prev_weight)
    tm = build_target_model(params, len(snapshot.ids))
    sm = build_skill_model(params)
    ranked = joint_posterior(tm, sm, snapshot)
    cell = {(t, s): p for t, s, p in ranked.entries}
    lines = ["target," + ",".join(SKILLS.values)]
    for t in snapshot.ids:
        row = [t]
        for s in SKILLS.values:
            p = cell[(t, s)]
            row.append(_fmt(math.log(p)) if p > 0.0 else "-inf")
        lines.append(",".join(row))
    _write_text(out, "\n".join(lines) + "\n")


@main.command("simulate")
@click.option("--setup", default="A", show_default=True)
@click.option("--policy", type=click.Choice(["bot", "bot-sample", "scripted-random"]),
              default="bot", show_default=True)
@click.option("--ticks", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--e-ally", type=float, default=0.6, show_default=True)
@click.option("--e-id", type=float, default=0.9, show_default=True)
@click.option("--persistence", type=float, default=0.4, show_default=True)
@click.option("--model", "model_path", default=None, help="trained model JSON to play")
@click.option("--log-out", required=True)
def cmd_simulate(setup, policy, ticks, seed, e_ally, e_id, persistence, model_path, log_out):
    """Run one episode and write its JSON-Lines log."""
    scenario = _resolve_scenario(setup)
    world = World(scenario, seed=seed)
    if policy == "scripted-random":
        druid_policy = ScriptedRandomPolicy()
    else:
        mode = "argmax" if policy == "bot" else "sample"
        if model_path:
            tm, sm = load_models(model_path)
            druid_policy = BotPolicy(tm, sm, mode)
        else:
            params = ModelParams(e_ally=e_ally, e_id=e_id, persistence=persistence)
            druid_policy = BotPolicy.from_params(params, len(world.alive_entities()), mode)
    log = run_episode(world, druid_policy, max_ticks=ticks)
    try:
        write_log(log, log_out)
    except OSError as exc:
        raise IoFailure(f"cannot write {log_out!r}: {exc}")
    click.echo(f"outcome={log.outcome} decisions={log.decision_count()} "
               f"ticks={len(log.records)}")


@main.command("train")
@click.argument("logs", nargs=-1, required=True)
@click.option("--pseudocount", type=float, default=1.0, show_default=True)
@click.option("--model-out", required=True)
def cmd_train(logs, pseudocount, model_out):
    """Fit all learnable tables from episode logs by counting and averaging."""
    records = []
    for path in logs:
        try:
            records.extend(extract_records(read_log(path)))
        except OSError as exc:
            raise IoFailure(f"cannot read {path!r}: {exc}")
    tm, sm, report = fit(records, pseudocount)
    try:
        save_models(model_out, tm, sm)
    except OSError as exc:
        raise IoFailure(f"cannot write {model_out!r}: {exc}")
    click.echo(json.dumps(report.to_json(), sort_keys=True))


@main.command("eval")
@click.argument("logs", nargs=-1, required=True)
@click.option("--model", "model_path", required=True)
def cmd_eval(logs, model_path):
    """Score a trained model's ranking against played decisions."""
    tm, sm = load_models(model_path)
    records = []
    legal_sizes = []
    for path in logs:
        try:
            log = read_log(path)
        except OSError as exc:
            raise IoFailure(f"cannot read {path!r}: {exc}")
        roster = len(log.scenario.get("roster", []))
        if roster != tm.n:
            raise click.ClickException(
                f"model trained for roster size {tm.n}, log {path!r} starts at {roster}"
            )
        records.extend(extract_records(log))
        for record in log.records:
            if record["action"] is not None:
                legal_sizes.append(len(record["legal"]))
    metrics = evaluate(tm, sm, records)
    if legal_sizes:
        metrics["uniform_baseline"] = 1.0 / (sum(legal_sizes) / len(legal_sizes))
    click.echo(json.dumps(metrics, sort_keys=True))


@main.command("serve")
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", default=None, help="serve the play UI from this directory")
@click.option("--scenario-dir", default=None, help="directory of named scenario JSONs")
def cmd_serve(port, host, static_dir, scenario_dir):
    """Host the session service (and the play UI when --static-dir is given)."""
    import errno

    import uvicorn

    from .service import create_app

    app = create_app(static_dir=static_dir,
                     scenario_dir=scenario_dir or os.environ.get(CONFIG_ENV))
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            raise click.ClickException(f"cannot bind port {port}: {exc}")
        raise
    except SystemExit as exc:
        # uvicorn exits 3 on startup failure (typically the port is taken)
        if exc.code:
            raise click.ClickException(f"server failed to start on port {port}")


def run() -> None:
    """Console-script entry with the documented exit codes."""
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except (BadScenarioError, NoDataError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
