"""Command line surface for the full pipeline.

Exit codes: 0 success, 2 usage error, 3 data error, 4 non-convergence.
An optional JSON config file supplies per-subcommand defaults; explicit
flags win on conflict.
"""
from __future__ import annotations

import functools
import json
import sys

import click

from .errors import NonConvergence, ShelfGuideError
from .hand_model import (
    fit,
    load_model,
    read_demos_csv,
    save_model,
    synthetic_default_model,
)
from .reach_mdp import load_policy, plan_overview, query, save_policy, solve
from .reach_mdp.policy import DONE
from .product_map import ProductMap, load_target_descriptor, read_frames_jsonl
from .scoring import select_best
from .session import SessionConfig
from .simulator import (
    SimHumanConfig,
    compare as run_compare,
    format_summary,
    records_to_csv,
    run_trials,
)

EXIT_DATA_ERROR = 3
EXIT_NON_CONVERGENCE = 4


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NonConvergence as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NON_CONVERGENCE)
        except (ShelfGuideError, FileNotFoundError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA_ERROR)
    return wrapper


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"expected dx,dy,dz, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise click.BadParameter(f"expected three numbers, got {text!r}")


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              default=None, help="JSON file with per-subcommand flag defaults.")
@click.pass_context
def main(ctx, config_path):
    """Verbal fine-grain manipulation guidance toolkit."""
    if config_path is not None:
        with open(config_path) as fh:
            ctx.default_map = json.load(fh)


@main.command("fit")
@click.option("--demos", "demos_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_guarded
def fit_cmd(demos_path, out_path):
    """Fit a movement-response model from a demonstration CSV."""
    demos = read_demos_csv(demos_path)
    model = fit(demos)
    save_model(model, out_path)
    fitted = sum(1 for g in model.gaussians if g.sample_count > 0)
    click.echo(f"wrote {out_path}: {fitted}/{len(model.gaussians)} commands fitted from data")


@main.command("build")
@click.option("--model", "model_path", default=None,
              type=click.Path(dir_okay=False),
              help="Fitted model JSON; defaults to the synthetic model.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--resolution", default=0.05, show_default=True)
@click.option("--extent", default=0.8, show_default=True)
@click.option("--gamma", default=0.99, show_default=True)
@click.option("--tolerance", default=0.1, show_default=True)
@click.option("--max-sweeps", default=10_000, show_default=True)
@_guarded
def build_cmd(model_path, out_path, resolution, extent, gamma, tolerance,
              max_sweeps):
    """Solve the reaching MDP and write the policy file."""
    model = load_model(model_path) if model_path else synthetic_default_model()
    policy = solve(model, gamma=gamma, tolerance=tolerance,
                   resolution=resolution, extent=extent, max_sweeps=max_sweeps)
    save_policy(policy, out_path)
    meta = policy.metadata
    click.echo(f"wrote {out_path}: {meta['sweeps']} sweeps, "
               f"final delta {meta['final_delta']:.4g}, "
               f"kernel {meta['kernel_backend']}")


@main.command("query")
@click.option("--policy", "policy_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--offset", required=True, help="target minus hand, meters: dx,dy,dz")
@click.option("--prev", default="none", show_default=True)
@_guarded
def query_cmd(policy_path, offset, prev):
    """Print the next command for a hand-to-target offset."""
    policy = load_policy(policy_path)
    off = _parse_vec3(offset)
    result = query(policy, (0.0, 0.0, 0.0), off, prev=prev)
    if result == DONE:
        click.echo("Done")
        return
    spec = policy.model.spec(result)
    click.echo(spec.utterance)
    click.echo(f"command_id={spec.id} direction={spec.direction} "
               f"magnitude_m={spec.nominal_magnitude:.4f}")


@main.command("simulate")
@click.option("--policy", "policy_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--mode", required=True, type=click.Choice(["discrete", "continuous"]))
@click.option("--trials", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@_guarded
def simulate_cmd(policy_path, mode, trials, seed, out_path):
    """Run seeded trials of one guidance mode; write per-trial CSV."""
    policy = load_policy(policy_path)
    records = run_trials(mode, policy, SimHumanConfig(), trials, seed)
    csv_text = records_to_csv(records)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(csv_text)
        succ = sum(r.metrics.success for r in records)
        click.echo(f"wrote {out_path}: {succ}/{trials} successes")
    else:
        click.echo(csv_text, nl=False)


@main.command("compare")
@click.option("--policy", "policy_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--trials", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Also write the per-trial CSV for both modes.")
@_guarded
def compare_cmd(policy_path, trials, seed, out_path):
    """Paired discrete-vs-continuous comparison with bootstrap intervals."""
    policy = load_policy(policy_path)
    summary = run_compare(policy, SimHumanConfig(), trials, seed)
    if out_path:
        records = summary["records"]["discrete"] + summary["records"]["continuous"]
        with open(out_path, "w") as fh:
            fh.write(records_to_csv(records))
    click.echo(format_summary(summary))


@main.command("ingest")
@click.option("--stream", "stream_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--target", "target_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--hand", required=True, help="hand pose, meters: x,y,z")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the map snapshot JSON here.")
@_guarded
def ingest_cmd(stream_path, target_path, hand, out_path):
    """Ingest a detection stream, score it, and print the best target."""
    with open(stream_path) as fh:
        frames = read_frames_jsonl(fh.read())
    target_feature = load_target_descriptor(target_path)
    hand_pose = _parse_vec3(hand)
    pmap = ProductMap()
    for frame in frames:
        pmap.ingest(frame, target_feature)
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(pmap.snapshot(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    instances = list(pmap.instances.values())
    if not instances:
        click.echo("no instances matched the target")
        return
    best = select_best(instances, hand_pose)
    chosen = pmap.instances[best.instance_id]
    pos = chosen.state[:3]
    click.echo(f"instances: {len(instances)}")
    click.echo(f"best: instance {best.instance_id} in cluster {best.cluster_id} "
               f"at ({pos[0]:.3f}, {pos[1]:.3f}, {pos[2]:.3f}), "
               f"similarity {best.similarity:.3f}, "
               f"top_level={best.top_level}, "
               f"cluster_distance {best.cluster_distance:.3f} m")
    click.echo(f"overview: {plan_overview(hand_pose, pos)}")


@main.command("serve")
@click.option("--policy", "policy_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8763, show_default=True)
@click.option("--frontend", "frontend_dir", default=None,
              type=click.Path(file_okay=False),
              help="Static directory to serve at /, e.g. the built playground.")
@_guarded
def serve_cmd(policy_path, host, port, frontend_dir):
    """Run the live guidance service."""
    import uvicorn

    from .service import create_app

    policy = load_policy(policy_path)
    app = create_app(policy, SessionConfig(), frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
