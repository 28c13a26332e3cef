/**
 * Scripting bindings for the simulation worlds package.
 *
 * A Bridge owns one Python worker process and exposes the native surface:
 * world construction, dataset recording, online/offline evaluation, and
 * cost-model registration so a function written here can serve as the
 * planner's cost model. All calls are serialized; results are byte-wise
 * identical to the equivalent native calls with equal arguments.
 *
 * @example
 * const bridge = new Bridge();
 * const world = await bridge.world("swm/TwoRoom-v1", 4);
 * await world.setPolicy({ kind: "random", seed: 0 });
 * await world.reset(0, { variation: ["all"] });
 * await world.step();
 * bridge.registerCostModel("quad", ({ candidates }) => myCosts(candidates));
 * const plan = await bridge.solve({ model: "quad", seed: 0 });
 * bridge.close();
 */

import { NdArray, NdDescriptor, decode, encode, fromFloat64 } from "./ndarray";
import { CostQuery, PyWorker } from "./worker";

export interface VariationOptions {
  variation?: string[];
  variationValues?: Record<string, unknown>;
}

export interface PolicySpec {
  kind: "random" | "expert" | "replay" | "mpc";
  seed?: number;
  /** mpc only: "env" for true dynamics, or a registered cost-model name. */
  cost?: string;
  numSamples?: number;
  horizon?: number;
  recedingHorizon?: number;
}

export interface WorldSnapshot {
  state: NdArray;
  goalState: NdArray;
  action: NdArray;
  success: NdArray;
  stepIdx: NdArray;
  variation: Array<Record<string, unknown>>;
  ended: boolean;
  pixels?: NdArray;
  goalPixels?: NdArray;
}

export interface EvalRow {
  success: boolean;
  steps: number;
  seed: number;
  assignment: Record<string, unknown>;
  source?: { episode: number; start: number; goal: number };
}

export interface EvalReport {
  successRate: number;
  protocol: "online" | "offline";
  budget: number;
  skipped: number;
  episodes: EvalRow[];
}

export interface SolveRequest {
  /** Registered cost-model name. */
  model: string;
  horizon?: number;
  recedingHorizon?: number;
  seed?: number;
  adim?: number;
  bounds?: [number, number];
  numSamples?: number;
  iterations?: number;
  eliteFraction?: number;
  minStd?: number;
  initStd?: number;
  context?: NdArray;
  goal?: NdArray;
}

export interface Plan {
  actions: NdArray;
  costTrace: number[];
}

/** Cost callback: receives decoded arrays, returns K costs. */
export type CostModel = (q: {
  model: string;
  context: NdArray | null;
  candidates: NdArray;
  goal: NdArray | null;
}) => Float64Array | number[];

function variationParams(opts?: VariationOptions): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  if (opts?.variation) out.variation = opts.variation;
  if (opts?.variationValues) out.variation_values = opts.variationValues;
  return out;
}

function policyParams(spec?: PolicySpec): Record<string, unknown> {
  if (!spec) return {};
  return {
    policy: {
      kind: spec.kind,
      seed: spec.seed ?? 0,
      cost: spec.cost,
      num_samples: spec.numSamples,
      horizon: spec.horizon,
      receding_horizon: spec.recedingHorizon,
    },
  };
}

function toSnapshot(raw: any): WorldSnapshot {
  const snap: WorldSnapshot = {
    state: decode(raw.state),
    goalState: decode(raw.goal_state),
    action: decode(raw.action),
    success: decode(raw.success),
    stepIdx: decode(raw.step_idx),
    variation: raw.variation,
    ended: raw.ended,
  };
  if (raw.pixels) snap.pixels = decode(raw.pixels);
  if (raw.goal_pixels) snap.goalPixels = decode(raw.goal_pixels);
  return snap;
}

function toReport(raw: any): EvalReport {
  return {
    successRate: raw.success_rate,
    protocol: raw.protocol,
    budget: raw.budget,
    skipped: raw.skipped,
    episodes: raw.episodes,
  };
}

export class World {
  constructor(
    private readonly worker: PyWorker,
    private readonly handle: number,
    readonly numEnvs: number,
    readonly actionDim: number,
  ) {}

  async setPolicy(spec: PolicySpec): Promise<void> {
    await this.worker.request("world_set_policy", {
      world: this.handle,
      ...policyParams(spec),
    });
  }

  async reset(seed = 0, opts?: VariationOptions & { pixels?: boolean }): Promise<WorldSnapshot> {
    const raw = await this.worker.request("world_reset", {
      world: this.handle,
      seed,
      pixels: opts?.pixels ?? false,
      ...variationParams(opts),
    });
    return toSnapshot(raw);
  }

  async step(repeat = 1, opts?: { pixels?: boolean }): Promise<WorldSnapshot> {
    const raw = await this.worker.request("world_step", {
      world: this.handle,
      repeat,
      pixels: opts?.pixels ?? false,
    });
    return toSnapshot(raw);
  }

  async close(): Promise<void> {
    await this.worker.request("world_close", { world: this.handle });
  }
}

export class Bridge {
  private readonly worker: PyWorker;
  private readonly models = new Map<string, CostModel>();

  constructor(python: string = "python3") {
    this.worker = new PyWorker(python);
    this.worker.onCost = (q) => this.dispatchCost(q);
  }

  /** Register a cost function the planner can use by name. */
  registerCostModel(name: string, fn: CostModel): void {
    this.models.set(name, fn);
  }

  async ping(): Promise<boolean> {
    const r = await this.worker.request("ping");
    return r.pong === true;
  }

  async world(envId: string, numEnvs = 1): Promise<World> {
    const r = await this.worker.request("world_new", {
      env_id: envId,
      num_envs: numEnvs,
    });
    return new World(this.worker, r.world, r.num_envs, r.action_dim);
  }

  async recordDataset(opts: {
    envId: string;
    name: string;
    episodes: number;
    seed?: number;
    numEnvs?: number;
    policy?: PolicySpec;
    maxSteps?: number;
    root?: string;
    overwrite?: boolean;
  } & VariationOptions): Promise<{ path: string; episodeCount: number }> {
    const r = await this.worker.request("record", {
      env_id: opts.envId,
      name: opts.name,
      episodes: opts.episodes,
      seed: opts.seed ?? 0,
      num_envs: opts.numEnvs ?? 1,
      max_steps: opts.maxSteps,
      root: opts.root,
      overwrite: opts.overwrite ?? false,
      ...policyParams(opts.policy),
      ...variationParams(opts),
    });
    return { path: r.path, episodeCount: r.episode_count };
  }

  async evaluate(opts: {
    envId: string;
    episodes: number;
    seed?: number;
    budget?: number;
    numEnvs?: number;
    policy?: PolicySpec;
  } & VariationOptions): Promise<EvalReport> {
    const r = await this.worker.request("evaluate", {
      env_id: opts.envId,
      episodes: opts.episodes,
      seed: opts.seed ?? 0,
      budget: opts.budget ?? 50,
      num_envs: opts.numEnvs ?? 1,
      ...policyParams(opts.policy),
      ...variationParams(opts),
    });
    return toReport(r.report);
  }

  async evaluateFromDataset(opts: {
    envId: string;
    name: string;
    episodes: number;
    seed?: number;
    budget?: number;
    maxGap?: number;
    numEnvs?: number;
    policy?: PolicySpec;
    root?: string;
  }): Promise<EvalReport> {
    const r = await this.worker.request("evaluate_from_dataset", {
      env_id: opts.envId,
      name: opts.name,
      episodes: opts.episodes,
      seed: opts.seed ?? 0,
      budget: opts.budget ?? 50,
      max_gap: opts.maxGap ?? 50,
      num_envs: opts.numEnvs ?? 1,
      root: opts.root,
      ...policyParams(opts.policy),
    });
    return toReport(r.report);
  }

  /** Run the sampling solver against a registered cost model. */
  async solve(opts: SolveRequest): Promise<Plan> {
    if (!this.models.has(opts.model)) {
      throw new Error(`no cost model registered under ${JSON.stringify(opts.model)}`);
    }
    const r = await this.worker.request("solve", {
      model: { kind: "foreign", name: opts.model },
      horizon: opts.horizon ?? 10,
      receding_horizon: opts.recedingHorizon ?? 5,
      seed: opts.seed ?? 0,
      adim: opts.adim ?? 2,
      bounds: opts.bounds ?? [-1, 1],
      params: {
        num_samples: opts.numSamples ?? 300,
        iterations: opts.iterations ?? 10,
        elite_fraction: opts.eliteFraction ?? 0.1,
        min_std: opts.minStd ?? 1e-3,
        init_std: opts.initStd,
      },
      context: opts.context ? encode(opts.context) : undefined,
      goal: opts.goal ? encode(opts.goal) : undefined,
    });
    return { actions: decode(r.actions), costTrace: r.cost_trace };
  }

  /** Worker-side reference solve on the same quadratic, for parity checks. */
  async solveQuadratic(target: NdArray, opts: Omit<SolveRequest, "model">): Promise<Plan> {
    const r = await this.worker.request("solve", {
      model: { kind: "quadratic", target: encode(target) },
      horizon: opts.horizon ?? 10,
      receding_horizon: opts.recedingHorizon ?? 5,
      seed: opts.seed ?? 0,
      adim: opts.adim ?? 2,
      bounds: opts.bounds ?? [-1, 1],
      params: {
        num_samples: opts.numSamples ?? 300,
        iterations: opts.iterations ?? 10,
        elite_fraction: opts.eliteFraction ?? 0.1,
        min_std: opts.minStd ?? 1e-3,
        init_std: opts.initStd,
      },
    });
    return { actions: decode(r.actions), costTrace: r.cost_trace };
  }

  close(): void {
    this.worker.close();
  }

  private dispatchCost(q: CostQuery): NdDescriptor {
    const fn = this.models.get(q.model);
    if (!fn) {
      throw new Error(`no cost model registered under ${JSON.stringify(q.model)}`);
    }
    const candidates = decode(q.candidates);
    const costs = fn({
      model: q.model,
      context: q.context ? decode(q.context) : null,
      candidates,
      goal: q.goal ? decode(q.goal) : null,
    });
    const arr = costs instanceof Float64Array ? costs : Float64Array.from(costs);
    return encode(fromFloat64([arr.length], arr));
  }
}
