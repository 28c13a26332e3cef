/**
 * Process plumbing for the Python worker: spawn, newline-delimited JSON
 * framing, one-request-at-a-time serialization, and dispatch of get_cost
 * callbacks that arrive while a request is in flight.
 */

import { spawn, ChildProcessWithoutNullStreams } from "node:child_process";
import { fileURLToPath } from "node:url";
import * as path from "node:path";

import { NdDescriptor } from "./ndarray";

export interface WorkerError {
  type: string;
  message: string;
}

/** Native failure re-raised on the scripting side, message preserved. */
export class BridgeError extends Error {
  readonly nativeType: string;

  constructor(err: WorkerError) {
    super(err.message);
    this.name = "BridgeError";
    this.nativeType = err.type;
  }
}

export interface CostQuery {
  model: string;
  context: NdDescriptor | null;
  candidates: NdDescriptor;
  goal: NdDescriptor | null;
}

export type CostHandler = (q: CostQuery) => NdDescriptor;

interface Pending {
  resolve: (v: any) => void;
  reject: (e: Error) => void;
}

const WORKER_PATH = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
  "worker",
  "bridge_worker.py",
);

export class PyWorker {
  private proc: ChildProcessWithoutNullStreams;
  private nextId = 0;
  private pending = new Map<number, Pending>();
  private queue: Promise<unknown> = Promise.resolve();
  private buffer = "";
  private closed = false;
  private stderrTail = "";

  /** Invoked for get_cost callbacks; set by the bridge. */
  onCost: CostHandler | null = null;

  constructor(python: string = "python3") {
    this.proc = spawn(python, [WORKER_PATH], { stdio: ["pipe", "pipe", "pipe"] });
    this.proc.stdout.on("data", (chunk: Buffer) => this.onData(chunk));
    this.proc.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-4000);
    });
    this.proc.on("exit", () => {
      this.closed = true;
      const err = new Error(`worker exited unexpectedly\n${this.stderrTail}`);
      for (const p of this.pending.values()) p.reject(err);
      this.pending.clear();
    });
  }

  /** Serialized request; resolves with the op result or rejects with BridgeError. */
  request<T = any>(op: string, params: Record<string, unknown> = {}): Promise<T> {
    const run = () =>
      new Promise<T>((resolve, reject) => {
        if (this.closed) {
          reject(new Error("worker is closed"));
          return;
        }
        const id = ++this.nextId;
        this.pending.set(id, { resolve, reject });
        this.proc.stdin.write(JSON.stringify({ id, op, ...params }) + "\n");
      });
    const result = this.queue.then(run, run);
    this.queue = result.catch(() => undefined);
    return result;
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.proc.removeAllListeners("exit");
    this.proc.stdin.end();
    this.proc.kill();
  }

  private onData(chunk: Buffer): void {
    this.buffer += chunk.toString("utf-8");
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line) this.onLine(line);
    }
  }

  private onLine(line: string): void {
    let msg: any;
    try {
      msg = JSON.parse(line);
    } catch {
      return; // stray non-protocol output
    }
    if (typeof msg.cb === "number") {
      this.onCallback(msg);
      return;
    }
    const waiter = this.pending.get(msg.id);
    if (!waiter) return;
    this.pending.delete(msg.id);
    if (msg.ok) waiter.resolve(msg.result ?? {});
    else waiter.reject(new BridgeError(msg.error as WorkerError));
  }

  private onCallback(msg: any): void {
    // Callbacks are only legal while a request is pending; anything else
    // is answered with an error instead of invoking user code.
    if (this.pending.size === 0 || this.onCost === null) {
      this.proc.stdin.write(
        JSON.stringify({ cb: msg.cb, error: "no callback handler active" }) + "\n",
      );
      return;
    }
    let reply: Record<string, unknown>;
    try {
      const costs = this.onCost({
        model: msg.model,
        context: msg.context ?? null,
        candidates: msg.candidates,
        goal: msg.goal ?? null,
      });
      reply = { cb: msg.cb, costs };
    } catch (e) {
      reply = { cb: msg.cb, error: e instanceof Error ? e.message : String(e) };
    }
    this.proc.stdin.write(JSON.stringify(reply) + "\n");
  }
}
