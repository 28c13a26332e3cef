"""Two rooms divided by a wall with door gaps; the agent must reach the goal.

Dynamics are float32 throughout and live in the shared kernel backend, so
planner rollouts and env stepping are bit-identical. Movement is a velocity
command: per-component box clip, speed-norm clip, then axis-decomposed motion
with a strict-interior wall test (the agent slides along walls). Energy is a
distance budget; the episode truncates when it runs out.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Env, rgb
from .._backend import kernels
from ..variation import Domain

BORDER = 0.015
WALL_POS = 0.5
UNREACHABLE = 1.0e3


class TwoRoomEnv(Env):
    ID = "swm/TwoRoom-v1"
    MAX_STEPS = 200
    ACTION_MAX = 0.05
    STATE_DIM = 3
    TASK_LEAVES = ("agent.position", "goal.position")

    def _register_leaves(self, space):
        space.add("agent.color", Domain.rgb(), (220, 60, 50))
        space.add("agent.max_energy", Domain.box(0.5, 30.0), 20.0)
        space.add("agent.position", Domain.box((0.08, 0.08), (0.92, 0.92)), (0.25, 0.5))
        space.add("agent.radius", Domain.box(0.02, 0.05), 0.03)
        space.add("agent.speed", Domain.box(0.01, 0.05), 0.03)
        space.add("background.color", Domain.rgb(), (250, 250, 250))
        space.add("door.color", Domain.rgb(), (205, 170, 125))
        space.add("door.number", Domain.int_range(1, 3), 1)
        space.add("door.position", Domain.box(0.2, 0.8), 0.5)
        space.add("door.size", Domain.box(0.08, 0.24), 0.16)
        space.add("goal.color", Domain.rgb(), (80, 200, 120))
        space.add("goal.position", Domain.box((0.08, 0.08), (0.92, 0.92)), (0.75, 0.5))
        space.add("goal.radius", Domain.box(0.03, 0.08), 0.05)
        space.add("wall.axis", Domain.categorical("vertical", "horizontal"), "vertical")
        space.add("wall.border_color", Domain.rgb(), (40, 40, 40))
        space.add("wall.color", Domain.rgb(), (90, 90, 90))
        space.add("wall.thickness", Domain.box(0.02, 0.08), 0.04)

    def _setup(self, a):
        self._axis = a["wall.axis"]
        self._half = a["wall.thickness"] / 2.0
        self._radius = a["agent.radius"]
        self._speed = a["agent.speed"]
        self._goal_radius = a["goal.radius"]
        lo_span, hi_span = BORDER, 1.0 - BORDER

        n = a["door.number"]
        shift = a["door.position"] - 0.5
        size = a["door.size"]
        raw = []
        for i in range(n):
            c = (i + 1) / (n + 1) + shift
            d0, d1 = max(c - size / 2.0, lo_span), min(c + size / 2.0, hi_span)
            if d1 > d0:
                raw.append((d0, d1))
        raw.sort()
        doors = []
        for d0, d1 in raw:
            if doors and d0 <= doors[-1][1]:
                doors[-1] = (doors[-1][0], max(doors[-1][1], d1))
            else:
                doors.append((d0, d1))
        self._doors = doors

        segs = []
        cur = lo_span
        for d0, d1 in doors:
            if d0 > cur:
                segs.append((cur, d0))
            cur = max(cur, d1)
        if cur < hi_span:
            segs.append((cur, hi_span))
        rects = []
        for s0, s1 in segs:
            if self._axis == "vertical":
                rects.append((WALL_POS - self._half, s0, WALL_POS + self._half, s1))
            else:
                rects.append((s0, WALL_POS - self._half, s1, WALL_POS + self._half))
        self._rects = np.asarray(rects, dtype=np.float32).reshape(-1, 4)

        # gate intervals the agent center can actually route through
        clampable = (BORDER + self._radius, 1.0 - BORDER - self._radius)
        gates = []
        for d0, d1 in doors:
            m = min(0.01, (d1 - d0) / 4.0)
            g0 = max(d0 + m, clampable[0])
            g1 = min(d1 - m, clampable[1])
            if g1 > g0:
                gates.append((g0, g1))
        self._gates = gates

        self._lo = BORDER + self._radius
        self._hi = 1.0 - BORDER - self._radius
        self._gx, self._gy = a["goal.position"]
        self._goal_vis = None  # default goal depiction built on demand

        ax, ay = a["agent.position"]
        # start clamped into the reachable band; wall overlap is resolved by
        # nudging to the nearest free spot along the blocking axis
        ax = min(max(ax, self._lo), self._hi)
        ay = min(max(ay, self._lo), self._hi)
        ax, ay = self._free_spot(ax, ay)
        self._state = np.array([ax, ay, a["agent.max_energy"]], dtype=np.float32)

    def _free_spot(self, x, y):
        for x0, y0, x1, y1 in np.asarray(self._rects, dtype=np.float64):
            if x0 < x < x1 and y0 < y < y1:
                if self._axis == "vertical":
                    x = x0 if x - x0 <= x1 - x else x1
                else:
                    y = y0 if y - y0 <= y1 - y else y1
        return x, y

    def _step_state(self, action):
        p0 = self._state[:2].copy()
        acts = np.ascontiguousarray(action.reshape(1, 1, 2), dtype=np.float32)
        out = np.empty((1, 1, 2), dtype=np.float32)
        kernels.tworoom_rollout(p0, acts, float(self.ACTION_MAX), float(self._speed),
                                float(self._lo), float(self._hi), self._rects, out)
        nx = out[0, 0, 0]
        ny = out[0, 0, 1]
        dx = nx - p0[0]
        dy = ny - p0[1]
        dist = np.sqrt(dx * dx + dy * dy)
        e = self._state[2] - dist
        if e < np.float32(0.0):
            e = np.float32(0.0)  # the tank empties, it does not overdraw
        self._state[0] = nx
        self._state[1] = ny
        self._state[2] = e
        if e <= np.float32(0.0):
            self._truncated = True

    def rollout(self, start_state, actions) -> np.ndarray:
        """Batched true-dynamics rollout: (K, T, 2) actions -> positions."""
        p0 = np.ascontiguousarray(np.asarray(start_state, dtype=np.float32)[:2])
        acts = np.ascontiguousarray(actions, dtype=np.float32)
        out = np.empty_like(acts)
        kernels.tworoom_rollout(p0, acts, float(self.ACTION_MAX), float(self._speed),
                                float(self._lo), float(self._hi), self._rects, out)
        return out

    def is_success(self, state=None) -> bool:
        s = self._state if state is None else np.asarray(state)
        d = math.hypot(float(s[0]) - self._gx, float(s[1]) - self._gy)
        return d <= self._goal_radius

    def set_state(self, state):
        s = np.asarray(state, dtype=np.float32).reshape(self.STATE_DIM).copy()
        self._state = s
        self._truncated = bool(s[2] <= np.float32(0.0))
        self._succeeded = self.is_success()

    def set_goal_from_state(self, state):
        s = np.asarray(state, dtype=np.float32)
        self._gx = float(s[0])
        self._gy = float(s[1])
        self._goal_vis = s.reshape(self.STATE_DIM).copy()
        self._succeeded = self.is_success()

    def goal_state(self) -> np.ndarray:
        return np.array([self._gx, self._gy], dtype=np.float32)

    def _goal_render_state(self) -> np.ndarray:
        if self._goal_vis is not None:
            return self._goal_vis
        return np.array([self._gx, self._gy, self.assignment["agent.max_energy"]],
                        dtype=np.float32)

    # routing over the wall layout; used by the true-dynamics cost and experts
    def _split(self, x, y):
        if self._axis == "vertical":
            return x, y
        return y, x

    def path_distance(self, xs, ys, gx, gy) -> np.ndarray:
        """Shortest wall-respecting route length from (xs, ys) to the goal.

        Straight-line distance when no wall separates the points, else the
        best door detour; vectorized, float64, always finite.
        """
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        u, v = self._split(xs, ys)
        gu, gv = self._split(gx, gy)
        direct = np.hypot(xs - gx, ys - gy)
        # Classify by the wall centerline: a point pressed against the slab
        # edge still counts as being in its half, else it reads as same-side
        # and gets the through-wall direct distance.
        opposite = ((u < WALL_POS) & (gu > WALL_POS)) | ((u > WALL_POS) & (gu < WALL_POS))
        if not np.any(opposite) or not self._gates:
            if self._gates:
                return direct
            return np.where(opposite, UNREACHABLE + direct, direct)
        through = np.full(xs.shape, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (WALL_POS - u) / (gu - u)
        vcross = v + (gv - v) * np.where(np.isfinite(t), t, 0.5)
        for g0, g1 in self._gates:
            vc = np.clip(vcross, g0, g1)
            d = np.hypot(WALL_POS - u, vc - v) + np.hypot(gu - WALL_POS, gv - vc)
            through = np.minimum(through, d)
        return np.where(opposite, through, direct)

    def route_waypoint(self, px, py, gx=None, gy=None):
        """Next point to aim for from (px, py): the goal, or the best gate."""
        gx = self._gx if gx is None else gx
        gy = self._gy if gy is None else gy
        u, v = self._split(px, py)
        gu, gv = self._split(gx, gy)
        opposite = (u < WALL_POS < gu) or (gu < WALL_POS < u)
        if not opposite or not self._gates:
            if abs(gu - WALL_POS) < self._half and not any(d0 <= gv <= d1 for d0, d1 in self._doors):
                # Goal center embedded in the slab at a closed height: aim at
                # the near face, else a straight chase wedges in the doorway.
                face = WALL_POS + self._half if u >= WALL_POS else WALL_POS - self._half
                return (face, gv) if self._axis == "vertical" else (gv, face)
            return gx, gy
        t = (WALL_POS - u) / (gu - u)
        vcross = v + (gv - v) * t
        best, best_d = (gx, gy), np.inf
        for g0, g1 in self._gates:
            vc = min(max(vcross, g0), g1)
            gate = (WALL_POS, vc) if self._axis == "vertical" else (vc, WALL_POS)
            d = math.hypot(gate[0] - px, gate[1] - py) + math.hypot(gx - gate[0], gy - gate[1])
            if d < best_d:
                best, best_d = gate, d
        return best

    def cost_model(self):
        return TwoRoomPathCost(self)

    def _draw(self, img, state):
        a = self.assignment
        img[:, :] = rgb(a["background.color"])
        br, bgc, bb = rgb(a["wall.border_color"])
        kernels.fill_rect(img, 0.0, 0.0, BORDER, 1.0, br, bgc, bb)
        kernels.fill_rect(img, 1.0 - BORDER, 0.0, 1.0, 1.0, br, bgc, bb)
        kernels.fill_rect(img, 0.0, 0.0, 1.0, BORDER, br, bgc, bb)
        kernels.fill_rect(img, 0.0, 1.0 - BORDER, 1.0, 1.0, br, bgc, bb)
        wr, wg, wb = rgb(a["wall.color"])
        lo_s, hi_s = BORDER, 1.0 - BORDER
        if self._axis == "vertical":
            kernels.fill_rect(img, WALL_POS - self._half, lo_s, WALL_POS + self._half, hi_s, wr, wg, wb)
        else:
            kernels.fill_rect(img, lo_s, WALL_POS - self._half, hi_s, WALL_POS + self._half, wr, wg, wb)
        dr, dg, db = rgb(a["door.color"])
        for d0, d1 in self._doors:
            if self._axis == "vertical":
                kernels.fill_rect(img, WALL_POS - self._half, d0, WALL_POS + self._half, d1, dr, dg, db)
            else:
                kernels.fill_rect(img, d0, WALL_POS - self._half, d1, WALL_POS + self._half, dr, dg, db)
        gr, gg, gb = rgb(a["goal.color"])
        kernels.fill_circle(img, self._gx, self._gy, self._goal_radius, gr, gg, gb)
        ar, ag, ab = rgb(a["agent.color"])
        kernels.fill_circle(img, float(state[0]), float(state[1]), self._radius, ar, ag, ab)


class TwoRoomPathCost:
    """True-dynamics cost: roll candidates through the simulator, score the
    final position by its wall-respecting route distance to the goal."""

    def __init__(self, env: TwoRoomEnv | None = None):
        self.env = env

    def for_env(self, env):
        return TwoRoomPathCost(env)

    def get_cost(self, context, candidates, goal):
        env = self.env
        if env is None:
            raise RuntimeError("cost model not bound to an environment")
        out = env.rollout(np.asarray(context, dtype=np.float32), candidates)
        fx = out[:, -1, 0].astype(np.float64)
        fy = out[:, -1, 1].astype(np.float64)
        return env.path_distance(fx, fy, float(goal[0]), float(goal[1]))
