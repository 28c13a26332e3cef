"""Policies: random, recorded-action replay, and scripted experts.

A policy implements `get_action(infos) -> (N, A)`. Optional hooks the world
calls when present: `bind(world)` at attach time and `reset(env_seeds)` after
every world reset. Per-env rngs are seeded from (policy seed, env seed), so
trajectories do not depend on how episodes are batched.
"""

from __future__ import annotations

import math

import numpy as np


class RandomPolicy:
    """Uniform actions over the action box."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rngs = None
        self._spec = None

    def bind(self, world):
        self._spec = world.action_spec

    def reset(self, env_seeds):
        self._rngs = [np.random.default_rng((self.seed, int(s))) for s in env_seeds]

    def get_action(self, infos):
        if self._rngs is None or self._spec is None:
            raise RuntimeError("RandomPolicy must be attached and the world reset first")
        adim, low, high = self._spec
        out = np.empty((len(self._rngs), adim), dtype=np.float32)
        for i, rng in enumerate(self._rngs):
            out[i] = rng.uniform(low, high, size=adim)
        return out


class ReplayPolicy:
    """Replays per-env recorded action sequences, zeros when exhausted."""

    def __init__(self):
        self._queues = None
        self._t = 0

    def set_sequences(self, sequences):
        qs = []
        for q in sequences:
            a = np.asarray(q, dtype=np.float32)
            if a.ndim != 2:
                a = a.reshape(-1, 2)
            qs.append(a)
        self._queues = qs
        self._t = 0

    def on_offline_batch(self, sequences):
        self.set_sequences(sequences)

    def reset(self, env_seeds):
        self._queues = None
        self._t = 0

    def get_action(self, infos):
        n = infos["action"].shape[0]
        adim = infos["action"].shape[1]
        out = np.zeros((n, adim), dtype=np.float32)
        if self._queues is not None:
            for i, q in enumerate(self._queues[:n]):
                if self._t < len(q):
                    out[i] = q[self._t]
        self._t += 1
        return out


class TwoRoomExpert:
    """Scripted oracle: heads for the best door gate, then the goal.

    Reads wall geometry straight off the env instances, so it only works
    attached to a TwoRoom world. Deterministic, no rng.
    """

    def bind(self, world):
        self._envs = world.envs

    def get_action(self, infos):
        n = infos["state"].shape[0]
        out = np.zeros((n, 2), dtype=np.float32)
        for i, env in enumerate(self._envs):
            if bool(infos["success"][i]):
                continue
            px = float(infos["state"][i][0])
            py = float(infos["state"][i][1])
            tx, ty = env.route_waypoint(px, py)
            out[i] = (tx - px, ty - py)
        return out


class PushTExpert:
    """Scripted pusher: circles to the far side of the block, then drives it
    toward the goal anchor. Heuristic; useful for recording varied contact
    interactions, not guaranteed to solve every layout."""

    STANDOFF = 1.4

    def bind(self, world):
        self._envs = world.envs

    def get_action(self, infos):
        n = infos["state"].shape[0]
        out = np.zeros((n, 2), dtype=np.float32)
        for i, env in enumerate(self._envs):
            if bool(infos["success"][i]):
                continue
            s = infos["state"][i]
            g = infos["goal_state"][i]
            px, py = float(s[0]), float(s[1])
            bx, by = float(s[4]), float(s[5])
            gx, gy = float(g[0]), float(g[1])
            dgx, dgy = gx - bx, gy - by
            dg = math.hypot(dgx, dgy)
            if dg < 1.0e-9:
                continue
            ux, uy = dgx / dg, dgy / dg
            reach = env._r_a + 0.16 * env._bscale
            # behind-the-block staging point, opposite the goal
            sx = bx - ux * reach * self.STANDOFF
            sy = by - uy * reach * self.STANDOFF
            apx, apy = px - bx, py - by
            behind = (apx * ux + apy * uy) < -0.3 * reach
            near_line = abs(apx * uy - apy * ux) < reach
            if behind and near_line:
                tx, ty = bx + ux * 0.03, by + uy * 0.03
            else:
                tx, ty = sx, sy
                # detour sideways if the block sits between agent and staging point
                d_ap = math.hypot(apx, apy)
                if d_ap < reach * 1.2:
                    tx = px - uy * 0.05
                    ty = py + ux * 0.05
            out[i] = (tx - px, ty - py)
        return out
