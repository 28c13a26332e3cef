"""Goal-conditioned evaluation protocols.

Online: every episode resets with freshly sampled start/goal leaves (the
env's task leaves are always resampled, on top of any user-selected
variation) and runs the policy against a step budget.

Offline: start and goal are two frames of one recorded trajectory, j - i
bounded by max_gap, which makes every task feasible by replaying the
recorded actions. Pairs are drawn without replacement over all (episode, i,
j) triples, then with replacement once exhausted. Episodes too short to
yield a pair are skipped and counted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .datastore import dataset_open
from .variation import VariationRequest, normalize_assignment


@dataclass
class EvalConfig:
    episodes: int = 50
    seed: int = 0
    budget: int = 50
    options: object = None
    dataset: str | None = None
    max_gap: int = 50
    root: object = None

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.max_gap < 1:
            raise ValueError("max_gap must be >= 1")


@dataclass
class EvalReport:
    success_rate: float
    protocol: str
    budget: int
    episodes: list = field(default_factory=list)
    skipped: int = 0

    def __getitem__(self, key):
        return getattr(self, key)

    def to_json(self) -> str:
        payload = {
            "success_rate": self.success_rate,
            "protocol": self.protocol,
            "budget": self.budget,
            "skipped": self.skipped,
            "episodes": self.episodes,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json() + "\n")


def _run_batch(world, budget: int):
    """Step until budget or all envs ended; returns per-env success steps."""
    n = world.num_envs
    steps_used = np.full(n, budget, dtype=np.int64)
    done_at_start = world.infos["success"].copy()
    steps_used[done_at_start] = 0
    for t in range(budget):
        if all(e.ended for e in world.envs):
            break
        world.step()
        newly = world.infos["success"] & (steps_used == budget)
        steps_used[newly] = t + 1
    return steps_used


def evaluate(world, config: EvalConfig) -> EvalReport:
    if world._policy is None:
        raise RuntimeError("no policy attached; call set_policy() first")
    req = VariationRequest.from_options(config.options)
    space = world.single_variation_space
    selected = space.resolve(req.selectors) | set(world.envs[0].TASK_LEAVES)
    request = VariationRequest(selectors=tuple(sorted(selected)), fixed=req.fixed)
    n = world.num_envs
    rows = []
    for b in range(math.ceil(config.episodes / n)):
        base = config.seed + b * n
        world.reset(base, request)
        steps_used = _run_batch(world, config.budget)
        for i in range(n):
            e = b * n + i
            if e >= config.episodes:
                break
            rows.append({
                "success": bool(world.infos["success"][i]),
                "steps": int(steps_used[i]),
                "seed": base + i,
                "assignment": world.infos["variation"][i],
            })
    rate = 100.0 * sum(r["success"] for r in rows) / len(rows)
    return EvalReport(success_rate=rate, protocol="online", budget=config.budget,
                      episodes=rows)


def _enumerate_pairs(lengths, max_gap):
    triples = []
    skipped = 0
    for e, t_len in enumerate(lengths):
        if t_len < 2:
            skipped += 1
            continue
        for i in range(t_len - 1):
            for j in range(i + 1, min(i + max_gap, t_len - 1) + 1):
                triples.append((e, i, j))
    return triples, skipped


def evaluate_from_dataset(world, config: EvalConfig) -> EvalReport:
    if world._policy is None:
        raise RuntimeError("no policy attached; call set_policy() first")
    if config.dataset is None:
        raise ValueError("offline evaluation needs a source dataset name")
    ds = dataset_open(config.dataset, frameskip=1, num_steps=1, root=config.root)
    if ds.env_id != world.env_id:
        raise ValueError(
            f"dataset {config.dataset!r} was recorded on {ds.env_id}, "
            f"world runs {world.env_id}"
        )
    if "state" not in ds.keys or "action" not in ds.keys:
        raise ValueError(
            f"offline evaluation needs 'state' and 'action'; dataset has {sorted(ds.keys)}"
        )
    lengths = [ds.episode_length(e) for e in range(ds.episode_count)]
    triples, skipped = _enumerate_pairs(lengths, config.max_gap)
    if not triples:
        raise ValueError(f"dataset {config.dataset!r} has no usable (start, goal) pairs")
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(triples))
    chosen = [triples[k] for k in order[:config.episodes]]
    while len(chosen) < config.episodes:
        chosen.append(triples[int(rng.integers(len(triples)))])

    n = world.num_envs
    policy = world._policy
    rows = []
    for b in range(math.ceil(config.episodes / n)):
        batch = []
        for i in range(n):
            e = b * n + i
            batch.append(chosen[e] if e < config.episodes else chosen[-1])
        seeds = []
        replays = []
        for i, (src, si, sj) in enumerate(batch):
            meta = ds.episode_meta(src)
            env = world.envs[i]
            env.reset(meta["seed"], normalize_assignment(meta["assignment"]))
            ep = ds.load_episode(src, keys=["state", "action"])
            env.set_state(ep["state"][si])
            env.set_goal_from_state(ep["state"][sj])
            seeds.append(meta["seed"])
            replays.append(np.array(ep["action"][si + 1:sj + 1]))
        world._was_reset = True
        world.refresh_infos()
        if hasattr(policy, "reset"):
            policy.reset(seeds)
        if hasattr(policy, "on_offline_batch"):
            policy.on_offline_batch(replays)
        steps_used = _run_batch(world, config.budget)
        for i in range(n):
            e = b * n + i
            if e >= config.episodes:
                break
            src, si, sj = batch[i]
            rows.append({
                "success": bool(world.infos["success"][i]),
                "steps": int(steps_used[i]),
                "seed": int(ds.episode_meta(src)["seed"]),
                "assignment": world.infos["variation"][i],
                "source": {"episode": src, "start": si, "goal": sj},
            })
    rate = 100.0 * sum(r["success"] for r in rows) / len(rows)
    return EvalReport(success_rate=rate, protocol="offline", budget=config.budget,
                      episodes=rows, skipped=skipped)
