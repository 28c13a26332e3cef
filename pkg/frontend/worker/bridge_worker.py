"""Subprocess half of the scripting bindings.

Speaks newline-delimited JSON over stdin/stdout. Requests carry an `id`
and an `op`; every request gets exactly one `{id, ok, ...}` reply. While
a solve or evaluation with a foreign cost model is in flight, the worker
emits `{cb, fn: "get_cost", ...}` lines and blocks until the matching
`{cb, costs|error}` reply arrives, so callbacks always run on the
caller's thread and strictly inside the originating request.

Arrays cross the boundary as {dtype, shape, b64} descriptors holding raw
little-endian C-order bytes. One operation is in flight at a time; the
client side enforces that.
"""

import base64
import json
import sys

import numpy as np

import swm


def nd_encode(arr):
    arr = np.ascontiguousarray(arr)
    return {"dtype": str(arr.dtype), "shape": list(arr.shape),
            "b64": base64.b64encode(arr.tobytes()).decode("ascii")}


def nd_decode(obj):
    raw = base64.b64decode(obj["b64"])
    arr = np.frombuffer(raw, dtype=np.dtype(obj["dtype"]))
    return arr.reshape(obj["shape"]).copy()


def _write(msg):
    sys.stdout.write(json.dumps(msg) + "\n")
    sys.stdout.flush()


def _read():
    line = sys.stdin.readline()
    if not line:
        raise EOFError("client closed the pipe")
    return json.loads(line)


_cb_counter = 0


class ForeignCost:
    """Planner cost model whose get_cost round-trips to the client."""

    def __init__(self, name: str):
        self.name = name

    def get_cost(self, context, candidates, goal):
        global _cb_counter
        _cb_counter += 1
        _write({
            "cb": _cb_counter,
            "fn": "get_cost",
            "model": self.name,
            "context": None if context is None else nd_encode(np.asarray(context)),
            "candidates": nd_encode(np.asarray(candidates, dtype=np.float64)),
            "goal": None if goal is None else nd_encode(np.asarray(goal)),
        })
        reply = _read()
        if reply.get("cb") != _cb_counter:
            raise RuntimeError("out-of-order callback reply")
        if reply.get("error"):
            raise ValueError(f"foreign cost model {self.name!r} failed: {reply['error']}")
        # shape/finiteness are validated by the solver itself, so a
        # wrong-length vector surfaces as its structured error naming K
        return nd_decode(reply["costs"]).reshape(-1).astype(np.float64)


class SequentialQuadratic:
    """Reference quadratic summed in plain (h, a) order.

    Accumulation order matches a scalar per-candidate loop, which makes
    costs bit-identical to a client-side implementation of the same
    function and lets parity tests compare solver outputs at 1e-6.
    """

    def __init__(self, target):
        self.target = np.asarray(target, dtype=np.float64)

    def get_cost(self, context, candidates, goal):
        c = np.asarray(candidates, dtype=np.float64)
        k, h, a = c.shape
        s = np.zeros(k, dtype=np.float64)
        for i in range(h):
            for j in range(a):
                d = c[:, i, j] - self.target[i, j]
                s += d * d
        return s


_worlds: dict = {}
_next_world = 0


def _variation_options(req):
    opts = {}
    if req.get("variation"):
        opts["variation"] = list(req["variation"])
    if req.get("variation_values"):
        opts["variation_values"] = req["variation_values"]
    return opts or None


def _build_policy(spec, env_id):
    spec = spec or {"kind": "random"}
    kind = spec.get("kind", "random")
    if kind == "random":
        return swm.RandomPolicy(seed=int(spec.get("seed", 0)))
    if kind == "replay":
        return swm.ReplayPolicy()
    if kind == "expert":
        if "TwoRoom" in env_id:
            return swm.TwoRoomExpert()
        return swm.PushTExpert()
    if kind == "mpc":
        cost = spec.get("cost", "env")
        if cost == "env":
            model = swm.make(env_id).cost_model()
        else:
            model = ForeignCost(str(cost))
        solver = swm.CEMSolver(model=model,
                               num_samples=int(spec.get("num_samples", 300)))
        config = swm.PlanConfig(horizon=int(spec.get("horizon", 10)),
                                receding_horizon=int(spec.get("receding_horizon", 5)))
        return swm.MPCPolicy(solver, config, seed=int(spec.get("seed", 0)))
    raise ValueError(f"unknown policy kind {kind!r}")


def _world_snapshot(world, include_pixels=False):
    infos = world.infos
    out = {
        "state": nd_encode(infos["state"]),
        "goal_state": nd_encode(infos["goal_state"]),
        "action": nd_encode(infos["action"]),
        "success": nd_encode(infos["success"].astype(np.uint8)),
        "step_idx": nd_encode(infos["step_idx"]),
        "variation": infos["variation"],
        "ended": bool(world.ended),
    }
    if include_pixels:
        out["pixels"] = nd_encode(infos["pixels"])
        out["goal_pixels"] = nd_encode(infos["goal_pixels"])
    return out


def op_ping(req):
    return {"pong": True}


def op_world_new(req):
    global _next_world
    world = swm.World(req["env_id"], num_envs=int(req.get("num_envs", 1)))
    _next_world += 1
    _worlds[_next_world] = world
    return {"world": _next_world,
            "num_envs": world.num_envs,
            "action_dim": int(world.action_spec[0])}


def _world(req):
    wid = req["world"]
    if wid not in _worlds:
        raise KeyError(f"unknown world handle {wid}")
    return _worlds[wid]


def op_world_set_policy(req):
    world = _world(req)
    world.set_policy(_build_policy(req.get("policy"), world.env_id))
    return {}


def op_world_reset(req):
    world = _world(req)
    world.reset(seed=int(req.get("seed", 0)), options=_variation_options(req))
    return _world_snapshot(world, bool(req.get("pixels", False)))


def op_world_step(req):
    world = _world(req)
    for _ in range(int(req.get("repeat", 1))):
        world.step()
    return _world_snapshot(world, bool(req.get("pixels", False)))


def op_world_close(req):
    _worlds.pop(req["world"], None)
    return {}


def op_record(req):
    world = swm.World(req["env_id"], num_envs=int(req.get("num_envs", 1)))
    world.set_policy(_build_policy(req.get("policy"), req["env_id"]))
    ds = world.record_dataset(
        req["name"], episodes=int(req["episodes"]), seed=int(req.get("seed", 0)),
        options=_variation_options(req), max_steps=req.get("max_steps"),
        overwrite=bool(req.get("overwrite", False)), root=req.get("root"))
    return {"path": str(ds.path), "episode_count": ds.episode_count}


def op_evaluate(req):
    world = swm.World(req["env_id"], num_envs=int(req.get("num_envs", 1)))
    world.set_policy(_build_policy(req.get("policy"), req["env_id"]))
    report = world.evaluate(episodes=int(req["episodes"]), seed=int(req.get("seed", 0)),
                            budget=int(req.get("budget", 50)),
                            options=_variation_options(req))
    return {"report": json.loads(report.to_json())}


def op_evaluate_from_dataset(req):
    world = swm.World(req["env_id"], num_envs=int(req.get("num_envs", 1)))
    world.set_policy(_build_policy(req.get("policy"), req["env_id"]))
    report = world.evaluate_from_dataset(
        req["name"], episodes=int(req["episodes"]), seed=int(req.get("seed", 0)),
        budget=int(req.get("budget", 50)), max_gap=int(req.get("max_gap", 50)),
        root=req.get("root"))
    return {"report": json.loads(report.to_json())}


def op_solve(req):
    model_spec = req.get("model", {})
    kind = model_spec.get("kind", "foreign")
    if kind == "foreign":
        model = ForeignCost(str(model_spec.get("name", "default")))
    elif kind == "quadratic":
        model = SequentialQuadratic(nd_decode(model_spec["target"]))
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    config = swm.PlanConfig(horizon=int(req.get("horizon", 10)),
                            receding_horizon=int(req.get("receding_horizon", 5)))
    params = req.get("params", {})
    context = nd_decode(req["context"]) if req.get("context") else None
    goal = nd_decode(req["goal"]) if req.get("goal") else None
    bounds = tuple(req.get("bounds", (-1.0, 1.0)))
    plan = swm.cem_solve(
        model, context, goal, config,
        swm.CEMParams(num_samples=int(params.get("num_samples", 300)),
                      elite_fraction=float(params.get("elite_fraction", 0.1)),
                      iterations=int(params.get("iterations", 10)),
                      init_std=params.get("init_std"),
                      min_std=float(params.get("min_std", 1.0e-3))),
        np.random.default_rng(int(req.get("seed", 0))),
        bounds=bounds, adim=int(req.get("adim", 2)))
    return {"actions": nd_encode(plan.actions), "cost_trace": plan.cost_trace}


OPS = {
    "ping": op_ping,
    "world_new": op_world_new,
    "world_set_policy": op_world_set_policy,
    "world_reset": op_world_reset,
    "world_step": op_world_step,
    "world_close": op_world_close,
    "record": op_record,
    "evaluate": op_evaluate,
    "evaluate_from_dataset": op_evaluate_from_dataset,
    "solve": op_solve,
}


def main():
    while True:
        line = sys.stdin.readline()
        if not line:
            return
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            _write({"id": None, "ok": False,
                    "error": {"type": "ProtocolError", "message": str(exc)}})
            continue
        rid = req.get("id")
        op = req.get("op")
        try:
            handler = OPS[op]
        except KeyError:
            _write({"id": rid, "ok": False,
                    "error": {"type": "ProtocolError", "message": f"unknown op {op!r}"}})
            continue
        try:
            result = handler(req)
            _write({"id": rid, "ok": True, "result": result})
        except Exception as exc:
            _write({"id": rid, "ok": False,
                    "error": {"type": type(exc).__name__, "message": str(exc)}})


if __name__ == "__main__":
    main()
