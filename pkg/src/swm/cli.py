"""Command-line front door.

Subcommands: `envs` (list environments and their variation leaves), `record`
(roll a policy and persist episodes), `evaluate` (online or offline success
rate), `inspect` (dataset summary). All randomness flows from --seed; the
dataset root comes from --root, else $SWM_HOME, else ~/.swm, and is printed
on every run. Exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import envs as envs_mod
from .datastore import dataset_open, resolve_root
from .planning import CEMSolver, GradSolver, MPCPolicy, MPPISolver, PlanConfig
from .policies import PushTExpert, RandomPolicy, TwoRoomExpert
from .world import World


def _parse_fixed(pairs):
    fixed = {}
    for item in pairs or ():
        name, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"--fix expects leaf=value, got {item!r}")
        try:
            fixed[name] = json.loads(raw)
        except json.JSONDecodeError:
            fixed[name] = raw  # bare strings (e.g. categorical choices)
    return fixed


def _options(args):
    opts = {}
    if args.vary:
        opts["variation"] = list(args.vary)
    fixed = _parse_fixed(args.fix)
    if fixed:
        opts["variation_values"] = fixed
    return opts or None


def _make_policy(name: str, env_id: str, args):
    if name == "random":
        return RandomPolicy(seed=args.seed)
    if name == "expert":
        if env_id == "swm/TwoRoom-v1":
            return TwoRoomExpert()
        if env_id == "swm/PushT-v1":
            return PushTExpert()
        raise ValueError(f"no scripted expert for {env_id}")
    if name == "mpc":
        model = envs_mod.make(env_id).cost_model()
        if args.solver == "cem":
            solver = CEMSolver(model=model, num_samples=args.num_samples)
        elif args.solver == "mppi":
            solver = MPPISolver(model=model, num_samples=args.num_samples)
        else:
            solver = GradSolver(model=model)
        config = PlanConfig(horizon=args.horizon, receding_horizon=args.receding_horizon)
        return MPCPolicy(solver, config, seed=args.seed)
    raise ValueError(f"unknown policy {name!r}")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("envs", help="list registered environments and variation leaves")

    rec = sub.add_parser("record", help="record a dataset")
    rec.add_argument("--env", required=True)
    rec.add_argument("--episodes", type=int, required=True)
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--num-envs", type=int, default=1)
    rec.add_argument("--name", default=None, help="dataset name (deterministic default)")
    rec.add_argument("--policy", choices=("random", "expert"), default="random")
    rec.add_argument("--vary", action="append", default=[],
                     help="variation selector (repeatable): all, a group, or a leaf")
    rec.add_argument("--fix", action="append", default=[],
                     help="fixed leaf value as leaf=JSON (repeatable)")
    rec.add_argument("--max-steps", type=int, default=None)
    rec.add_argument("--root", default=None)
    rec.add_argument("--overwrite", action="store_true")

    ev = sub.add_parser("evaluate", help="run goal-conditioned evaluation")
    ev.add_argument("--env", required=True)
    ev.add_argument("--episodes", type=int, default=50)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--budget", type=int, default=50)
    ev.add_argument("--num-envs", type=int, default=1)
    ev.add_argument("--policy", choices=("random", "expert", "mpc"), default="mpc")
    ev.add_argument("--solver", choices=("cem", "mppi", "grad"), default="cem")
    ev.add_argument("--num-samples", type=int, default=300)
    ev.add_argument("--horizon", type=int, default=10)
    ev.add_argument("--receding-horizon", type=int, default=5)
    ev.add_argument("--offline", action="store_true",
                    help="draw start/goal pairs from --dataset instead of sampling")
    ev.add_argument("--dataset", default=None)
    ev.add_argument("--max-gap", type=int, default=50)
    ev.add_argument("--vary", action="append", default=[])
    ev.add_argument("--fix", action="append", default=[])
    ev.add_argument("--root", default=None)
    ev.add_argument("--out", default=None, help="write the full report as JSON")

    ins = sub.add_parser("inspect", help="summarize a dataset")
    ins.add_argument("--name", required=True)
    ins.add_argument("--root", default=None)
    return p


def _cmd_envs(args) -> int:
    for env_id in sorted(envs_mod.REGISTRY):
        env = envs_mod.make(env_id)
        names = env.variation_space.names()
        print(f"{env_id}  ({len(names)} variation leaves)")
        for name in names:
            print(f"  {name}  [{env.variation_space.domain(name).describe()}]")
    return 0


def _cmd_record(args) -> int:
    print(f"dataset root: {resolve_root(args.root)}")
    world = World(args.env, num_envs=args.num_envs)
    world.set_policy(_make_policy(args.policy, args.env, args))
    name = args.name
    if name is None:
        short = args.env.split("/")[-1].split("-")[0].lower()
        name = f"{short}_{args.policy}_e{args.episodes}_s{args.seed}"
    ds = world.record_dataset(name, episodes=args.episodes, seed=args.seed,
                              options=_options(args), max_steps=args.max_steps,
                              overwrite=args.overwrite, root=args.root)
    print(f"recorded {ds.episode_count} episodes -> {ds.path}")
    return 0


def _cmd_evaluate(args) -> int:
    print(f"dataset root: {resolve_root(args.root)}")
    world = World(args.env, num_envs=args.num_envs)
    world.set_policy(_make_policy(args.policy, args.env, args))
    if args.offline:
        if not args.dataset:
            raise ValueError("--offline requires --dataset")
        report = world.evaluate_from_dataset(
            args.dataset, episodes=args.episodes, seed=args.seed,
            budget=args.budget, max_gap=args.max_gap, root=args.root)
    else:
        from .evaluation import EvalConfig, evaluate
        report = evaluate(world, EvalConfig(episodes=args.episodes, seed=args.seed,
                                            budget=args.budget, options=_options(args)))
    print(f"Success Rate: {report.success_rate:.1f}%")
    if args.out:
        report.save(args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_inspect(args) -> int:
    print(f"dataset root: {resolve_root(args.root)}")
    ds = dataset_open(args.name, frameskip=1, num_steps=1, root=args.root)
    print(f"dataset {args.name!r}: {ds.episode_count} episodes on {ds.env_id}")
    for key in sorted(ds.keys):
        info = ds.keys[key]
        print(f"  {key}: dtype {info['dtype']}, shape {info['shape']}, per {info['per']}")
    if ds.episode_count:
        lens = [ds.episode_length(e) for e in range(ds.episode_count)]
        print(f"  lengths: min {min(lens)}, max {max(lens)}, total frames {sum(lens)}")
    return 0


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    handlers = {"envs": _cmd_envs, "record": _cmd_record,
                "evaluate": _cmd_evaluate, "inspect": _cmd_inspect}
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
