import hashlib
import os
import subprocess
import sys

import numpy as np
import pytest

import swm
from swm import _kernels_py as kpy
from swm._backend import BACKEND

try:
    from swm import _kernels as kc
except ImportError:
    kc = None

needs_compiled = pytest.mark.skipif(kc is None, reason="compiled extension not built")


def test_backend_value():
    assert swm.BACKEND in ("compiled", "python")
    assert swm.BACKEND == BACKEND


@needs_compiled
def test_compiled_backend_active_by_default():
    # the build in this repo ships the extension; default import should use it
    assert swm.BACKEND == "compiled"


def test_pure_python_env_var_forces_fallback():
    env = dict(os.environ, SWM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import swm; print(swm.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_fill_rect_bit_equal():
    rng = np.random.default_rng(0)
    for _ in range(25):
        a = rng.integers(0, 256, size=(96, 96, 3), dtype=np.uint8)
        b = a.copy()
        x = np.sort(rng.uniform(-0.2, 1.2, size=2))
        y = np.sort(rng.uniform(-0.2, 1.2, size=2))
        col = rng.integers(0, 256, size=3)
        kc.fill_rect(a, x[0], y[0], x[1], y[1], *map(int, col))
        kpy.fill_rect(b, x[0], y[0], x[1], y[1], *map(int, col))
        assert a.tobytes() == b.tobytes()


@needs_compiled
def test_fill_circle_bit_equal():
    rng = np.random.default_rng(1)
    for _ in range(25):
        a = rng.integers(0, 256, size=(96, 96, 3), dtype=np.uint8)
        b = a.copy()
        cx, cy = rng.uniform(0, 1, size=2)
        rad = rng.uniform(0.0, 0.3)
        col = rng.integers(0, 256, size=3)
        kc.fill_circle(a, cx, cy, rad, *map(int, col))
        kpy.fill_circle(b, cx, cy, rad, *map(int, col))
        assert a.tobytes() == b.tobytes()


@needs_compiled
def test_fill_convex_poly_bit_equal():
    rng = np.random.default_rng(2)
    for _ in range(25):
        a = rng.integers(0, 256, size=(96, 96, 3), dtype=np.uint8)
        b = a.copy()
        # random convex polygon: point cloud angles sorted around its mean
        n = int(rng.integers(3, 7))
        ang = np.sort(rng.uniform(0, 2 * np.pi, size=n))
        rad = rng.uniform(0.05, 0.4)
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        verts = np.stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)], axis=1)
        col = rng.integers(0, 256, size=3)
        kc.fill_convex_poly(a, np.ascontiguousarray(verts), *map(int, col))
        kpy.fill_convex_poly(b, np.ascontiguousarray(verts), *map(int, col))
        assert a.tobytes() == b.tobytes()


@needs_compiled
def test_tworoom_rollout_bit_equal():
    rng = np.random.default_rng(3)
    for _ in range(10):
        k, t = int(rng.integers(1, 40)), int(rng.integers(1, 30))
        p0 = rng.uniform(0.1, 0.9, size=2).astype(np.float32)
        actions = rng.uniform(-0.12, 0.12, size=(k, t, 2)).astype(np.float32)
        nr = int(rng.integers(0, 4))
        rects = np.empty((nr, 4), dtype=np.float32)
        for i in range(nr):
            x0, y0 = rng.uniform(0, 0.8, size=2)
            rects[i] = (x0, y0, x0 + rng.uniform(0.02, 0.2), y0 + rng.uniform(0.02, 0.2))
        out_c = np.empty((k, t, 2), dtype=np.float32)
        out_p = np.empty((k, t, 2), dtype=np.float32)
        kc.tworoom_rollout(p0, actions, np.float32(0.1), np.float32(0.03),
                           np.float32(0.06), np.float32(0.94), rects, out_c)
        kpy.tworoom_rollout(p0, actions, np.float32(0.1), np.float32(0.03),
                            np.float32(0.06), np.float32(0.94), rects, out_p)
        assert out_c.tobytes() == out_p.tobytes()


def _hash_script():
    return (
        "import hashlib, swm\n"
        "from swm.policies import RandomPolicy\n"
        "h = hashlib.sha256()\n"
        "for env_id, seed in ((\"swm/TwoRoom-v1\", 0), (\"swm/TwoRoom-v1\", 7),\n"
        "                     (\"swm/PushT-v1\", 0), (\"swm/PushT-v1\", 7)):\n"
        "    w = swm.World(env_id, num_envs=1)\n"
        "    w.set_policy(RandomPolicy(seed=seed))\n"
        "    w.reset(seed=seed, options={\"variation\": [\"all\"]})\n"
        "    for _ in range(20):\n"
        "        if w.ended: break\n"
        "        w.step()\n"
        "        h.update(w.infos[\"pixels\"].tobytes())\n"
        "        h.update(w.infos[\"state\"].tobytes())\n"
        "print(swm.BACKEND, h.hexdigest())\n"
    )


@needs_compiled
def test_world_trajectories_identical_across_backends():
    runs = {}
    for forced in ("0", "1"):
        env = dict(os.environ, SWM_PURE_PYTHON=forced)
        out = subprocess.run([sys.executable, "-c", _hash_script()],
                             capture_output=True, text=True, env=env, check=True)
        backend, digest = out.stdout.split()
        runs[backend] = digest
    assert set(runs) == {"compiled", "python"}
    assert runs["compiled"] == runs["python"]
