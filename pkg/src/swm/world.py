"""Batched simulation facade.

A World owns N env instances, one attached policy and the `infos` record.
`infos` is a single dict updated in place: policies may hold a reference to
it. Batched arrays always have leading dimension N. Envs that succeed or
truncate are frozen (their rows stop changing) until the next reset; only
`step_idx` keeps counting.

Per-env seeds derive as base_seed + env_index. Recording runs episode
batches with base seeds base + batch * N, so episode e always sees seed
base + e regardless of N.
"""

from __future__ import annotations

import math

import numpy as np

from . import envs as envs_mod
from .datastore import EpisodeDataset, store_create
from .variation import VariationRequest


class World:
    def __init__(self, env_id: str, num_envs: int = 1):
        if num_envs < 1:
            raise ValueError(f"num_envs must be >= 1, got {num_envs}")
        self.env_id = env_id
        self.num_envs = num_envs
        self.envs = [envs_mod.make(env_id) for _ in range(num_envs)]
        self.infos: dict = {}
        self._policy = None
        self._was_reset = False
        self._last_selected: tuple = ()

    @property
    def single_variation_space(self):
        return self.envs[0].variation_space

    @property
    def action_spec(self):
        return self.envs[0].action_spec

    def set_policy(self, policy):
        self._policy = policy
        if hasattr(policy, "bind"):
            policy.bind(self)

    def reset(self, seed: int = 0, options=None):
        req = VariationRequest.from_options(options)
        space = self.single_variation_space
        selected = space.resolve(req.selectors)
        self._last_selected = tuple(sorted(selected))
        results = []
        for i, env in enumerate(self.envs):
            rng = np.random.default_rng(seed + i)
            assignment = space.sample(selected, rng, req.fixed)
            results.append(env.reset(seed + i, assignment))
        self._seed = seed
        self._was_reset = True
        self._rebuild_infos(results)
        if self._policy is not None and hasattr(self._policy, "reset"):
            self._policy.reset([seed + i for i in range(self.num_envs)])
        return self.infos

    def _rebuild_infos(self, results):
        n = self.num_envs
        adim = self.envs[0].action_spec[0]
        self.infos.clear()
        self.infos.update({
            "pixels": np.stack([r[0]["pixels"] for r in results]),
            "state": np.stack([r[0]["state"] for r in results]),
            "action": np.zeros((n, adim), dtype=np.float32),
            "goal_pixels": np.stack([r[1]["pixels"] for r in results]),
            "goal_state": np.stack([r[1]["state"] for r in results]),
            "success": np.array([e.succeeded for e in self.envs], dtype=bool),
            "step_idx": np.zeros(n, dtype=np.int64),
            "variation": [dict(e.assignment) for e in self.envs],
        })

    def refresh_infos(self):
        """Rebuild infos from current env state (used after direct env surgery,
        e.g. offline evaluation restoring recorded states)."""
        results = [(e._obs(), e.goal_obs()) for e in self.envs]
        self._rebuild_infos(results)

    @property
    def ended(self) -> bool:
        """True once every environment has succeeded or run out."""
        return all(e.ended for e in self.envs)

    def step(self):
        if self._policy is None:
            raise RuntimeError("no policy attached; call set_policy() first")
        if not self._was_reset:
            raise RuntimeError("world must be reset before stepping")
        n, adim = self.num_envs, self.envs[0].action_spec[0]
        actions = np.asarray(self._policy.get_action(self.infos), dtype=np.float32)
        if actions.shape != (n, adim):
            raise ValueError(
                f"policy returned action shape {actions.shape}; expected ({n}, {adim})"
            )
        _, low, high = self.envs[0].action_spec
        clipped = np.clip(actions, np.float32(low), np.float32(high))
        for i, env in enumerate(self.envs):
            if env.ended:
                continue
            obs, success = env.step(clipped[i])
            self.infos["pixels"][i] = obs["pixels"]
            self.infos["state"][i] = obs["state"]
            self.infos["action"][i] = clipped[i]
            self.infos["success"][i] = success
        self.infos["step_idx"] += 1
        return self.infos

    def record_dataset(self, dataset_name: str, episodes: int, seed: int = 0,
                       options=None, max_steps=None, overwrite: bool = False,
                       root=None) -> EpisodeDataset:
        if self._policy is None:
            raise RuntimeError("no policy attached; call set_policy() first")
        if episodes < 1:
            raise ValueError("episodes must be >= 1")
        n = self.num_envs
        cap = min(max_steps or self.envs[0].MAX_STEPS, self.envs[0].MAX_STEPS)
        store = store_create(dataset_name, self.env_id, root=root, overwrite=overwrite)
        for b in range(math.ceil(episodes / n)):
            base = seed + b * n
            self.reset(base, options)
            bufs = [{"pixels": [self.infos["pixels"][i].copy()],
                     "state": [self.infos["state"][i].copy()],
                     "action": [self.infos["action"][i].copy()],
                     "success": [bool(self.infos["success"][i])]}
                    for i in range(n)]
            goals = [(self.infos["goal_pixels"][i].copy(),
                      self.infos["goal_state"][i].copy()) for i in range(n)]
            steps = 0
            while steps < cap and not self.ended:
                alive = [not e.ended for e in self.envs]
                self.step()
                steps += 1
                for i in range(n):
                    if alive[i]:
                        bufs[i]["pixels"].append(self.infos["pixels"][i].copy())
                        bufs[i]["state"].append(self.infos["state"][i].copy())
                        bufs[i]["action"].append(self.infos["action"][i].copy())
                        bufs[i]["success"].append(bool(self.infos["success"][i]))
            for i in range(n):
                e = b * n + i
                if e >= episodes:
                    break
                step_arrays = {
                    "pixels": np.stack(bufs[i]["pixels"]),
                    "state": np.stack(bufs[i]["state"]),
                    "action": np.stack(bufs[i]["action"]),
                    "success": np.array(bufs[i]["success"], dtype=np.uint8),
                }
                episode_arrays = {"goal_pixels": goals[i][0], "goal_state": goals[i][1]}
                store.append(step_arrays, episode_arrays, seed=base + i,
                             assignment=self.envs[i].assignment,
                             varied=self._last_selected)
        store.finalize()
        return EpisodeDataset(dataset_name, frameskip=1, num_steps=1, root=root)

    def evaluate(self, episodes: int = 50, seed: int = 0, options=None,
                 budget: int = 50):
        from .evaluation import EvalConfig, evaluate
        return evaluate(self, EvalConfig(episodes=episodes, seed=seed,
                                         options=options, budget=budget))

    def evaluate_from_dataset(self, dataset_name: str, episodes: int = 50,
                              seed: int = 0, budget: int = 50, max_gap: int = 50,
                              root=None):
        from .evaluation import EvalConfig, evaluate_from_dataset
        return evaluate_from_dataset(
            self, EvalConfig(episodes=episodes, seed=seed, budget=budget,
                             dataset=dataset_name, max_gap=max_gap, root=root))
