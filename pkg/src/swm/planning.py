"""Action-sequence optimizers and the receding-horizon MPC policy.

A cost model implements `get_cost(context, candidates, goal) -> (K,) costs`
(lower is better) and optionally `get_cost_gradient` with the same signature
returning (K, H, A). Solvers are pure functions of (params, rng); the classes
are thin wrappers holding a model plus parameters.

CEM carries the elite set of each iteration into the next population, which
makes the elite-mean cost non-increasing for deterministic models. MPPI
subtracts the minimum cost before exponentiating, so weights are invariant
to constant cost shifts. The gradient solver falls back to central finite
differences (step h = params.fd_step) when the model has no analytic
gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1.0e-8


@dataclass
class PlanConfig:
    horizon: int = 10
    receding_horizon: int = 5
    warm_start: bool = True

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 1 <= self.receding_horizon <= self.horizon:
            raise ValueError("receding_horizon must satisfy 1 <= R <= horizon")


@dataclass
class CEMParams:
    num_samples: int = 300
    elite_fraction: float = 0.1
    iterations: int = 10
    init_std: float | None = None  # default: (high - low) / 4
    min_std: float = 1.0e-3

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("CEM needs num_samples >= 2")
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ValueError("elite_fraction must be in (0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class MPPIParams:
    num_samples: int = 300
    temperature: float = 1.0
    noise_sigma: float = 0.02

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("MPPI needs num_samples >= 2")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")


@dataclass
class GradParams:
    steps: int = 100
    lr: float = 0.1
    variant: str = "plain"  # or "adaptive-moments"
    fd_step: float = 1.0e-4

    def __post_init__(self):
        if self.variant not in ("plain", "adaptive-moments"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class Plan:
    actions: np.ndarray
    cost_trace: list = field(default_factory=list)
    rng_state: dict | None = None
    meta: dict = field(default_factory=dict)


def _bounds_arrays(bounds, adim):
    low, high = bounds
    return (np.broadcast_to(np.asarray(low, dtype=np.float64), (adim,)),
            np.broadcast_to(np.asarray(high, dtype=np.float64), (adim,)))


def _init_mean(init, horizon, adim):
    if init is None:
        return np.zeros((horizon, adim))
    init = np.asarray(init, dtype=np.float64)
    if init.shape != (horizon, adim):
        raise ValueError(f"init has shape {init.shape}; expected {(horizon, adim)}")
    return init.copy()


def _eval_costs(model, context, candidates, goal):
    costs = np.asarray(model.get_cost(context, candidates, goal), dtype=np.float64)
    if costs.shape != (candidates.shape[0],):
        raise ValueError(
            f"cost model returned shape {costs.shape}; expected ({candidates.shape[0]},)"
        )
    bad = ~np.isfinite(costs)
    if bad.any():
        raise ValueError(f"model returned non-finite cost at candidate {int(np.argmax(bad))}")
    return costs


def cem_solve(model, context, goal, config: PlanConfig, params: CEMParams,
              rng, init=None, bounds=(-1.0, 1.0), adim: int = 2) -> Plan:
    low, high = _bounds_arrays(bounds, adim)
    h = config.horizon
    mean = _init_mean(init, h, adim)
    std0 = params.init_std if params.init_std is not None else float((high - low).max() / 4.0)
    std = np.full((h, adim), std0, dtype=np.float64)
    n_elite = math.ceil(params.elite_fraction * params.num_samples)
    carried = None
    trace: list = []
    elite_mean_trace: list = []
    for _ in range(params.iterations):
        n_fresh = params.num_samples - (0 if carried is None else carried.shape[0])
        fresh = mean + std * rng.standard_normal((n_fresh, h, adim))
        fresh = np.clip(fresh, low, high)
        population = fresh if carried is None else np.concatenate([carried, fresh])
        costs = _eval_costs(model, context, population, goal)
        order = np.argsort(costs, kind="stable")
        elites = population[order[:n_elite]]
        mean = elites.mean(axis=0)
        std = np.maximum(elites.std(axis=0), params.min_std)
        carried = elites.copy()
        trace.append(float(costs[order[0]]))
        elite_mean_trace.append(float(costs[order[:n_elite]].mean()))
    return Plan(actions=np.clip(mean, low, high), cost_trace=trace,
                rng_state=rng.bit_generator.state,
                meta={"solver": "cem", "elite_mean_trace": elite_mean_trace})


def mppi_solve(model, context, goal, config: PlanConfig, params: MPPIParams,
               rng, init=None, bounds=(-1.0, 1.0), adim: int = 2) -> Plan:
    low, high = _bounds_arrays(bounds, adim)
    h = config.horizon
    nominal = _init_mean(init, h, adim)
    noise = params.noise_sigma * rng.standard_normal((params.num_samples, h, adim))
    candidates = np.clip(nominal + noise, low, high)
    costs = _eval_costs(model, context, candidates, goal)
    beta = costs.min()
    weights = np.exp(-(costs - beta) / params.temperature)
    weights = weights / weights.sum()
    actions = (weights[:, None, None] * candidates).sum(axis=0)
    return Plan(actions=np.clip(actions, low, high), cost_trace=[float(beta)],
                rng_state=rng.bit_generator.state,
                meta={"solver": "mppi", "weights": weights})


def finite_difference_gradient(model, context, x, goal, h_step: float) -> np.ndarray:
    hh, adim = x.shape
    batch = np.repeat(x[None], 2 * hh * adim, axis=0)
    idx = 0
    for i in range(hh):
        for j in range(adim):
            batch[idx, i, j] += h_step
            batch[idx + 1, i, j] -= h_step
            idx += 2
    costs = _eval_costs(model, context, batch, goal)
    return ((costs[0::2] - costs[1::2]) / (2.0 * h_step)).reshape(hh, adim)


def grad_solve(model, context, goal, config: PlanConfig, params: GradParams,
               rng=None, init=None, bounds=(-1.0, 1.0), adim: int = 2) -> Plan:
    low, high = _bounds_arrays(bounds, adim)
    x = np.clip(_init_mean(init, config.horizon, adim), low, high)
    has_grad = hasattr(model, "get_cost_gradient")
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    trace: list = []
    for step in range(params.steps):
        if has_grad:
            g = np.asarray(model.get_cost_gradient(context, x[None], goal),
                           dtype=np.float64)
            if g.shape != (1,) + x.shape:
                raise ValueError(
                    f"gradient has shape {g.shape}; expected {(1,) + x.shape}"
                )
            g = g[0]
        else:
            g = finite_difference_gradient(model, context, x, goal, params.fd_step)
        if params.variant == "plain":
            x = x - params.lr * g
        else:
            t = step + 1
            m = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g
            v = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g
            m_hat = m / (1.0 - ADAM_BETA1 ** t)
            v_hat = v / (1.0 - ADAM_BETA2 ** t)
            x = x - params.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        x = np.clip(x, low, high)
        trace.append(float(_eval_costs(model, context, x[None], goal)[0]))
    return Plan(actions=x, cost_trace=trace, rng_state=None,
                meta={"solver": "grad", "variant": params.variant})


class _SolverBase:
    _fn = None
    _params_cls = None

    def __init__(self, model=None, **params):
        self.model = model
        self.params = self._params_cls(**params)

    def solve(self, context, goal, config, rng=None, init=None,
              bounds=(-1.0, 1.0), adim: int = 2, model=None) -> Plan:
        use = model if model is not None else self.model
        if use is None:
            raise ValueError("no cost model provided")
        return type(self)._fn(use, context, goal, config, self.params, rng,
                              init=init, bounds=bounds, adim=adim)


class CEMSolver(_SolverBase):
    _fn = staticmethod(cem_solve)
    _params_cls = CEMParams


class MPPISolver(_SolverBase):
    _fn = staticmethod(mppi_solve)
    _params_cls = MPPIParams


class GradSolver(_SolverBase):
    _fn = staticmethod(grad_solve)
    _params_cls = GradParams


class MPCPolicy:
    """Receding-horizon wrapper around a solver.

    Keeps one plan per env; emits cached actions until `receding_horizon`
    of them have run, then replans (warm started from the shifted previous
    plan, tail zero-filled). Envs already successful get zero actions and
    their cache is left alone. Exactly ceil(L / R) solver calls happen over
    an L-step episode.
    """

    def __init__(self, solver, config: PlanConfig | None = None, seed: int = 0):
        self.solver = solver
        self.config = config if config is not None else PlanConfig()
        self.seed = seed
        self._world = None
        self._models = None
        self._rngs = None
        self._plans: list = []
        self._consumed: list = []
        self.solver_calls = 0

    def bind(self, world):
        self._world = world
        adim, low, high = world.action_spec
        self._adim = adim
        self._bounds = (low, high)
        base = self.solver.model
        if base is not None and hasattr(base, "for_env"):
            self._models = [base.for_env(env) for env in world.envs]
        else:
            self._models = [base for _ in world.envs]

    def reset(self, env_seeds):
        self._rngs = [np.random.default_rng((self.seed, int(s))) for s in env_seeds]
        n = len(env_seeds)
        self._plans = [None] * n
        self._consumed = [0] * n

    def get_action(self, infos):
        if self._world is None or self._rngs is None:
            raise RuntimeError("MPCPolicy must be attached via world.set_policy() "
                               "and the world reset before use")
        n = len(self._rngs)
        out = np.zeros((n, self._adim), dtype=np.float32)
        r = self.config.receding_horizon
        for i in range(n):
            if bool(infos["success"][i]):
                continue
            if self._plans[i] is None or self._consumed[i] >= r:
                init = None
                if self.config.warm_start and self._plans[i] is not None:
                    prev = self._plans[i].actions
                    init = np.concatenate([prev[r:], np.zeros((r, self._adim))])
                plan = self.solver.solve(
                    infos["state"][i], infos["goal_state"][i], self.config,
                    rng=self._rngs[i], init=init, bounds=self._bounds,
                    adim=self._adim, model=self._models[i])
                self._plans[i] = plan
                self._consumed[i] = 0
                self.solver_calls += 1
            out[i] = self._plans[i].actions[self._consumed[i]]
            self._consumed[i] += 1
        return out
