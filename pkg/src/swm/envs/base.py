"""Environment contract shared by the native 2D environments.

An Env owns a VariationSpace, deterministic f32 dynamics, a rasterizer and a
success predicate. Subclasses fill in the template methods; this base handles
reset/step bookkeeping, episode-end guards and observation assembly.

State is quantized to float32 after every step, and every step computes from
the quantized state, so restoring a recorded f32 state vector reproduces the
original continuation bit for bit.
"""

from __future__ import annotations

import numpy as np

from ..variation import VariationSpace, normalize_assignment


class Env:
    ID: str = ""
    MAX_STEPS: int = 0
    ACTION_MAX: float = 0.05
    RES: int = 224
    STATE_DIM: int = 0
    TASK_LEAVES: tuple = ()

    def __init__(self):
        self.variation_space = VariationSpace()
        self._register_leaves(self.variation_space)
        self.assignment = self.variation_space.defaults
        self.seed = 0
        self.steps = 0
        self._succeeded = False
        self._truncated = False
        self._was_reset = False

    # subclass template methods
    def _register_leaves(self, space: VariationSpace):
        raise NotImplementedError

    def _setup(self, assignment: dict):
        """Build geometry and initial state from a complete assignment."""
        raise NotImplementedError

    def _step_state(self, action: np.ndarray):
        """Advance dynamics by one step; action is box-clipped f32 (2,)."""
        raise NotImplementedError

    def _draw(self, img: np.ndarray, state: np.ndarray):
        raise NotImplementedError

    def is_success(self, state=None) -> bool:
        raise NotImplementedError

    def set_state(self, state):
        raise NotImplementedError

    def set_goal_from_state(self, state):
        """Re-target the goal at the configuration in a full state vector."""
        raise NotImplementedError

    def goal_state(self) -> np.ndarray:
        """Goal parameters as a flat f32 vector (env-specific slots)."""
        raise NotImplementedError

    def _goal_render_state(self) -> np.ndarray:
        """Full state vector depicting the solved configuration."""
        raise NotImplementedError

    # common machinery
    @property
    def action_spec(self):
        return (2, -self.ACTION_MAX, self.ACTION_MAX)

    @property
    def state(self) -> np.ndarray:
        return self._state

    @property
    def ended(self) -> bool:
        return self._succeeded or self._truncated or self.steps >= self.MAX_STEPS

    @property
    def succeeded(self) -> bool:
        return self._succeeded

    @property
    def truncated(self) -> bool:
        return self._truncated

    def reset(self, seed: int = 0, assignment=None):
        if assignment is None:
            assignment = self.variation_space.defaults
        else:
            assignment = normalize_assignment(assignment)
            violations = self.variation_space.validate(assignment)
            if violations:
                raise ValueError("invalid assignment: " + "; ".join(violations))
        self.assignment = dict(assignment)
        self.seed = int(seed)
        self._setup(self.assignment)
        self.steps = 0
        self._truncated = False
        self._succeeded = self.is_success()
        self._was_reset = True
        return self._obs(), self.goal_obs()

    def _guard(self):
        if not self._was_reset:
            raise RuntimeError(f"{self.ID}: reset() must be called before step()")
        if self.ended:
            raise RuntimeError(f"{self.ID}: episode ended; reset() before stepping again")

    def _advance(self, action) -> bool:
        self._guard()
        a = np.clip(np.asarray(action, dtype=np.float32).reshape(2),
                    np.float32(-self.ACTION_MAX), np.float32(self.ACTION_MAX))
        self._step_state(a)
        self.steps += 1
        if self.is_success():
            self._succeeded = True
        return self._succeeded

    def step(self, action):
        success = self._advance(action)
        return self._obs(), success

    def step_fast(self, action) -> bool:
        """step() without rendering; same dynamics and flags."""
        return self._advance(action)

    def render(self, state=None) -> np.ndarray:
        if state is None:
            state = self._state
        img = np.empty((self.RES, self.RES, 3), dtype=np.uint8)
        self._draw(img, np.asarray(state, dtype=np.float32))
        return img

    def _obs(self) -> dict:
        return {"pixels": self.render(), "state": self._state.copy()}

    def goal_obs(self) -> dict:
        return {"pixels": self.render(self._goal_render_state()),
                "state": self.goal_state().copy()}


def rgb(color) -> tuple:
    c = tuple(int(v) for v in color)
    if len(c) != 3:
        raise ValueError(f"expected RGB triplet, got {color!r}")
    return c
