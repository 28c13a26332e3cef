import math

import numpy as np
import pytest

import swm
from swm.envs.pusht import (
    AGENT_R,
    COVERAGE_THRESHOLD,
    FRICTION,
    PENETRATION_TOL,
    PushTEnv,
    push_step,
)
from swm.geometry import block_parts, deepest_contact, poly_area

PUSHT_LEAVES = [
    "agent.angle",
    "agent.color",
    "agent.scale",
    "agent.shape",
    "agent.start_position",
    "agent.velocity",
    "background.color",
    "block.angle",
    "block.color",
    "block.scale",
    "block.shape",
    "block.start_position",
    "goal.angle",
    "goal.color",
    "goal.position",
    "goal.scale",
]


def make_env(seed=0, **overrides):
    env = swm.make("swm/PushT-v1")
    asn = dict(env.variation_space.defaults)
    asn.update(overrides)
    env.reset(seed=seed, assignment=asn)
    return env


def test_leaf_catalog_exact():
    env = swm.make("swm/PushT-v1")
    assert env.variation_space.names() == PUSHT_LEAVES


def test_env_id_and_specs():
    env = swm.make("swm/PushT-v1")
    assert env.ID == "swm/PushT-v1"
    assert env.MAX_STEPS == 300
    assert env.STATE_DIM == 7


def test_state_layout():
    env = make_env()
    s = env.state
    assert s.shape == (7,) and s.dtype == np.float32
    ax, ay = s[0], s[1]
    assert (s[2], s[3]) == (0.0, 0.0)  # no velocity yet
    np.testing.assert_allclose(s[4:6], [0.4, 0.55], atol=1e-6)
    assert s[6] == 0.0


def test_free_motion_without_contact():
    env = make_env()
    s0 = env.state.copy()
    env.step_fast(np.array([-0.03, -0.03], dtype=np.float32))
    s1 = env.state
    # block untouched, agent moved, velocity slots record the delta
    np.testing.assert_array_equal(s0[4:7], s1[4:7])
    assert s1[0] < s0[0] and s1[1] < s0[1]
    assert s1[2] == pytest.approx(s1[0] - s0[0], abs=1e-7)
    assert s1[3] == pytest.approx(s1[1] - s0[1], abs=1e-7)


def test_push_moves_block_with_friction_ratio():
    # drive the agent straight into a face of the tee and check the block
    # yields a FRICTION fraction of the overlap
    state = np.array([0.30, 0.55, 0, 0, 0.4, 0.55, 0.0], dtype=np.float32)
    out = push_step(state, np.array([0.05, 0.0]), AGENT_R, 0.05, "tee", 1.0)
    assert out[4] > 0.4  # block pushed along +x
    assert abs(out[5] - 0.55) < 0.02


def test_push_torque_spins_block_off_center():
    # contact above the centroid should rotate the block
    state = np.array([0.33, 0.60, 0, 0, 0.4, 0.55, 0.0], dtype=np.float32)
    out = state
    for _ in range(6):
        out = push_step(out, np.array([0.05, 0.0]), AGENT_R, 0.05, "tee", 1.0)
    assert out[6] != 0.0


def test_push_resolves_overlap():
    env = make_env()
    rng = np.random.default_rng(3)
    for _ in range(200):
        if env.ended:
            break
        a = rng.uniform(-0.05, 0.05, 2).astype(np.float32)
        env.step_fast(a)
        s = env.state
        parts = block_parts("tee", float(env.assignment["block.scale"]),
                            float(s[6]), (float(s[4]), float(s[5])))
        got = deepest_contact(float(s[0]), float(s[1]), env._r_a, parts)
        if got is not None:
            assert got[0] <= PENETRATION_TOL + 1e-6


def test_reset_backs_agent_off_block():
    env = make_env(**{"agent.start_position": (0.4, 0.55)})  # dead center of the block
    s = env.state
    parts = block_parts("tee", 1.0, 0.0, (0.4, 0.55))
    got = deepest_contact(float(s[0]), float(s[1]), env._r_a, parts)
    assert got is None or got[0] <= PENETRATION_TOL + 1e-6


def test_block_stays_in_bounds_under_pushing():
    env = make_env(**{"agent.start_position": (0.2, 0.55),
                      "block.start_position": (0.15, 0.55)})
    for _ in range(60):
        if env.ended:
            break
        env.step_fast(np.array([-0.05, 0.0], dtype=np.float32))
    assert env.state[4] >= 0.05 - 1e-6


def test_coverage_zero_far_and_full_on_goal():
    env = make_env()
    assert env.coverage() < 0.1
    s = env.state.copy()
    s[4], s[5], s[6] = 0.68, 0.38, 0.0  # exact goal pose
    env.set_state(s)
    # goal parts come from the exact spec pose, the state is float32, so
    # full coverage holds only to float32 rounding here
    assert env.coverage() == pytest.approx(1.0, abs=1e-6)
    assert env.succeeded


def test_coverage_threshold_is_point_nine():
    assert COVERAGE_THRESHOLD == 0.9
    env = make_env()
    s = env.state.copy()
    # flipped pose overlaps well below threshold
    s[4], s[5], s[6] = 0.68, 0.38, math.pi
    env.set_state(s)
    assert 0.0 < env.coverage() < 0.9
    assert not env.succeeded


def test_success_latch():
    env = make_env()
    s = env.state.copy()
    s[4], s[5], s[6] = 0.68, 0.38, 0.0
    env.set_state(s)
    assert env.ended
    with pytest.raises(RuntimeError):
        env.step_fast(np.zeros(2, dtype=np.float32))


def test_goal_state_and_set_goal_round_trip():
    env = make_env()
    gs = env.goal_state()
    np.testing.assert_allclose(gs, [0.68, 0.38, 0.0], atol=1e-7)

    # a recorded future block pose becomes the goal; the same pose then
    # covers it exactly
    env2 = make_env()
    rng = np.random.default_rng(1)
    for _ in range(40):
        env2.step_fast(rng.uniform(-0.05, 0.05, 2).astype(np.float32))
    snap = env2.state.copy()
    env2.set_goal_from_state(snap)
    np.testing.assert_array_equal(env2.goal_state(), snap[4:7])
    env2.set_state(snap)
    assert env2.coverage() == pytest.approx(1.0, abs=1e-9)
    assert env2.succeeded


def test_agent_velocity_scales_speed():
    slow = make_env(**{"agent.velocity": 0.5, "agent.start_position": (0.2, 0.2)})
    fast = make_env(**{"agent.velocity": 2.0, "agent.start_position": (0.2, 0.2)})
    a = np.array([0.05, 0.0], dtype=np.float32)
    slow.step_fast(a)
    fast.step_fast(a)
    d_slow = slow.state[0] - 0.2
    d_fast = fast.state[0] - 0.2
    assert d_slow == pytest.approx(0.025, abs=1e-6)
    assert d_fast == pytest.approx(0.05, abs=1e-6)


def test_shapes_render_and_push():
    for shape in ("tee", "ell", "plus"):
        env = make_env(**{"block.shape": shape})
        img = env.render()
        assert (img == np.array([120, 120, 120], dtype=np.uint8)).all(axis=-1).any()
        for _ in range(30):
            if env.ended:
                break
            env.step_fast(np.array([0.05, 0.05], dtype=np.float32))


def test_triangle_square_agents():
    for shape in ("square", "triangle"):
        env = make_env(**{"agent.shape": shape})
        img = env.render()
        assert (img == np.array([66, 135, 245], dtype=np.uint8)).all(axis=-1).any()


def test_goal_render_uses_goal_pose():
    env = make_env()
    goal_img = env.goal_obs()["pixels"]
    # block drawn at the goal position in the goal render
    col = int(0.68 * 224)
    row = int((1 - 0.38) * 224)
    patch = goal_img[row - 12 : row + 12, col - 12 : col + 12]
    assert (patch == np.array([120, 120, 120], dtype=np.uint8)).all(axis=-1).any()


def test_reset_rejects_bad_assignment():
    env = swm.make("swm/PushT-v1")
    asn = dict(env.variation_space.defaults)
    asn["block.shape"] = "hexagon"
    with pytest.raises(ValueError) as ei:
        env.reset(seed=0, assignment=asn)
    assert "block.shape" in str(ei.value)


def test_block_cost_model_prefers_pushing_toward_goal():
    env = make_env(**{"agent.start_position": (0.30, 0.55)})
    model = env.cost_model()
    cands = np.zeros((2, 8, 2), dtype=np.float32)
    cands[0, :, 0] = 0.05   # push the block toward +x (goal is at 0.68)
    cands[1, :, 0] = -0.05  # walk away
    costs = model.get_cost(env.state, cands, env.goal_state())
    assert costs.shape == (2,)
    assert costs[0] < costs[1]
