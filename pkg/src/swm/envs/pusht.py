"""Quasi-static block pushing: a circular agent shoves a tee-shaped block
onto a goal anchor.

The action is a desired displacement, box-clipped then speed-capped
(`agent.velocity` scales the cap). Contact resolution is positional: the
deepest agent/block penetration moves the block along the contact normal
(scaled by a friction constant) and torques it about its center; the agent is
then projected out of any residual overlap. No momentum is transferred.

The agent's collision footprint is always a circle of radius 0.04 x
`agent.scale`; `agent.shape` only changes the drawn sprite. Success is goal
coverage: intersection area over goal area >= 0.9.

State layout (f32, 7): agent x, y, last displacement dx, dy, block x, y,
block angle. State is quantized to f32 each step; dynamics read only the
quantized state, so recorded states replay exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Env, rgb
from .. import geometry
from .._backend import kernels
from ..variation import Domain

AGENT_R = 0.04
BASE_SPEED = 0.05
FRICTION = 0.7
ROT_REG = 0.01
COVERAGE_THRESHOLD = 0.9
PENETRATION_TOL = 1.0e-3
BLOCK_LO, BLOCK_HI = 0.05, 0.95

_TWO_PI = 2.0 * math.pi

_SQUARE = np.array([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)])
_TRIANGLE = np.array(
    [(math.cos(a), math.sin(a)) for a in (math.pi / 2, math.pi * 7 / 6, math.pi * 11 / 6)]
)


def _clamp(v, lo, hi):
    return min(max(v, lo), hi)


def _soft_clamp(v, prev, lo, hi):
    # clamp that never pushes outward past an already out-of-range position
    return _clamp(v, min(lo, prev), max(hi, prev))


def _wrap(theta):
    return (theta + math.pi) % _TWO_PI - math.pi


def push_step(state, action, r_a, vmax, shape, bscale):
    """One quasi-static step; pure function of the f32 state vector."""
    ax0, ay0 = float(state[0]), float(state[1])
    bx, by, bth = float(state[4]), float(state[5]), float(state[6])
    dx, dy = float(action[0]), float(action[1])
    n = math.hypot(dx, dy)
    if n > vmax:
        dx *= vmax / n
        dy *= vmax / n
    nx = _clamp(ax0 + dx, r_a, 1.0 - r_a)
    ny = _clamp(ay0 + dy, r_a, 1.0 - r_a)
    parts = geometry.block_parts(shape, bscale, bth, (bx, by))
    contact = geometry.deepest_contact(nx, ny, r_a, parts)
    if contact is not None:
        depth, ux, uy, qx, qy = contact
        push = FRICTION * depth
        rx, ry = qx - bx, qy - by
        tau = rx * (-uy) - ry * (-ux)
        dth = push * tau / (rx * rx + ry * ry + ROT_REG)
        bx = _soft_clamp(bx - ux * push, bx, BLOCK_LO, BLOCK_HI)
        by = _soft_clamp(by - uy * push, by, BLOCK_LO, BLOCK_HI)
        bth = _wrap(bth + dth)
        for _ in range(3):
            parts = geometry.block_parts(shape, bscale, bth, (bx, by))
            again = geometry.deepest_contact(nx, ny, r_a, parts)
            if again is None or again[0] <= 1.0e-9:
                break
            d2, ux2, uy2, _, _ = again
            nx += d2 * ux2
            ny += d2 * uy2
        nx = _clamp(nx, r_a, 1.0 - r_a)
        ny = _clamp(ny, r_a, 1.0 - r_a)
    return np.array([nx, ny, nx - ax0, ny - ay0, bx, by, bth], dtype=np.float32)


class PushTEnv(Env):
    ID = "swm/PushT-v1"
    MAX_STEPS = 300
    ACTION_MAX = 0.05
    STATE_DIM = 7
    TASK_LEAVES = ("agent.start_position", "block.start_position", "goal.position")

    def _register_leaves(self, space):
        space.add("agent.angle", Domain.box(0.0, _TWO_PI), 0.0)
        space.add("agent.color", Domain.rgb(), (66, 135, 245))
        space.add("agent.scale", Domain.box(0.5, 1.5), 1.0)
        space.add("agent.shape", Domain.categorical("circle", "square", "triangle"), "circle")
        space.add("agent.start_position", Domain.box((0.08, 0.08), (0.92, 0.92)), (0.2, 0.2))
        space.add("agent.velocity", Domain.box(0.5, 2.0), 1.0)
        space.add("background.color", Domain.rgb(), (255, 255, 255))
        space.add("block.angle", Domain.box(0.0, _TWO_PI), 0.0)
        space.add("block.color", Domain.rgb(), (120, 120, 120))
        space.add("block.scale", Domain.box(0.5, 1.5), 1.0)
        space.add("block.shape", Domain.categorical("tee", "ell", "plus"), "tee")
        space.add("block.start_position", Domain.box((0.15, 0.15), (0.85, 0.85)), (0.4, 0.55))
        space.add("goal.angle", Domain.box(0.0, _TWO_PI), 0.0)
        space.add("goal.color", Domain.rgb(), (80, 200, 120))
        space.add("goal.position", Domain.box((0.15, 0.15), (0.85, 0.85)), (0.68, 0.38))
        space.add("goal.scale", Domain.box(0.5, 1.5), 1.0)

    def _setup(self, a):
        self._r_a = AGENT_R * a["agent.scale"]
        self._vmax = BASE_SPEED * a["agent.velocity"]
        self._shape = a["block.shape"]
        self._bscale = a["block.scale"]
        ax, ay = a["agent.start_position"]
        ax = _clamp(ax, self._r_a, 1.0 - self._r_a)
        ay = _clamp(ay, self._r_a, 1.0 - self._r_a)
        bx, by = a["block.start_position"]
        bth = _wrap(a["block.angle"])
        # agent starting inside the block is backed off along the contact normal
        parts = geometry.block_parts(self._shape, self._bscale, bth, (bx, by))
        for _ in range(8):
            c = geometry.deepest_contact(ax, ay, self._r_a, parts)
            if c is None or c[0] <= 1.0e-9:
                break
            ax = _clamp(ax + c[0] * c[1], self._r_a, 1.0 - self._r_a)
            ay = _clamp(ay + c[0] * c[2], self._r_a, 1.0 - self._r_a)
        self._state = np.array([ax, ay, 0.0, 0.0, bx, by, bth], dtype=np.float32)
        gx, gy = a["goal.position"]
        self._set_goal_spec(self._shape, a["goal.scale"], _wrap(a["goal.angle"]), (gx, gy))
        self._goal_vis = np.array([ax, ay, 0.0, 0.0, gx, gy, self._goal_spec[2]],
                                  dtype=np.float32)

    def _set_goal_spec(self, shape, scale, angle, pos):
        self._goal_spec = (shape, scale, angle, (float(pos[0]), float(pos[1])))
        self._goal_parts = geometry.block_parts(shape, scale, angle, pos)
        self._goal_area = sum(geometry.poly_area(p) for p in self._goal_parts)

    def _step_state(self, action):
        self._state = push_step(self._state, action, self._r_a, self._vmax,
                                self._shape, self._bscale)

    def coverage(self, state=None) -> float:
        s = self._state if state is None else np.asarray(state)
        parts = geometry.block_parts(self._shape, self._bscale, float(s[6]),
                                     (float(s[4]), float(s[5])))
        inter = geometry.parts_intersection_area(parts, self._goal_parts)
        return inter / self._goal_area

    def is_success(self, state=None) -> bool:
        return self.coverage(state) >= COVERAGE_THRESHOLD

    def set_state(self, state):
        self._state = np.asarray(state, dtype=np.float32).reshape(self.STATE_DIM).copy()
        self._succeeded = self.is_success()

    def set_goal_from_state(self, state):
        s = np.asarray(state, dtype=np.float32).reshape(self.STATE_DIM)
        self._set_goal_spec(self._shape, self._bscale, float(s[6]),
                            (float(s[4]), float(s[5])))
        self._goal_vis = s.copy()
        self._succeeded = self.is_success()

    def goal_state(self) -> np.ndarray:
        _shape, _scale, angle, (gx, gy) = self._goal_spec
        return np.array([gx, gy, angle], dtype=np.float32)

    def _goal_render_state(self) -> np.ndarray:
        return self._goal_vis

    def cost_model(self):
        return PushTBlockCost(self)

    def _draw(self, img, state):
        a = self.assignment
        img[:, :] = rgb(a["background.color"])
        gr, gg, gb = rgb(a["goal.color"])
        for part in self._goal_parts:
            kernels.fill_convex_poly(img, np.ascontiguousarray(part), gr, gg, gb)
        br, bg_, bb = rgb(a["block.color"])
        parts = geometry.block_parts(self._shape, self._bscale, float(state[6]),
                                     (float(state[4]), float(state[5])))
        for part in parts:
            kernels.fill_convex_poly(img, np.ascontiguousarray(part), br, bg_, bb)
        ar, ag, ab = rgb(a["agent.color"])
        ax, ay = float(state[0]), float(state[1])
        shape = a["agent.shape"]
        r_draw = AGENT_R * a["agent.scale"]
        if shape == "circle":
            kernels.fill_circle(img, ax, ay, r_draw, ar, ag, ab)
        else:
            base = _SQUARE if shape == "square" else _TRIANGLE
            verts = geometry.transform_verts(base, r_draw, a["agent.angle"], (ax, ay))
            kernels.fill_convex_poly(img, np.ascontiguousarray(verts), ar, ag, ab)


class PushTBlockCost:
    """True-dynamics cost: roll candidates with the push simulator, score the
    final block pose against the goal pose (distance plus small angle term)."""

    def __init__(self, env: PushTEnv | None = None):
        self.env = env

    def for_env(self, env):
        return PushTBlockCost(env)

    def get_cost(self, context, candidates, goal):
        env = self.env
        if env is None:
            raise RuntimeError("cost model not bound to an environment")
        cands = np.asarray(candidates, dtype=np.float32)
        kn = cands.shape[0]
        gx, gy, gth = float(goal[0]), float(goal[1]), float(goal[2])
        costs = np.empty(kn, dtype=np.float64)
        for k in range(kn):
            s = np.asarray(context, dtype=np.float32).copy()
            for t in range(cands.shape[1]):
                s = push_step(s, cands[k, t], env._r_a, env._vmax, env._shape, env._bscale)
            d = math.hypot(float(s[4]) - gx, float(s[5]) - gy)
            costs[k] = d + 0.1 * (1.0 - math.cos(float(s[6]) - gth))
        return costs
