/**
 * TypeScript bindings for the tubekit kernels.
 *
 * The primary library is reached purely through its external interface:
 * the `tubekit kernel` subcommand, which takes a JSON request holding a
 * batch of cases and writes a JSON response with one result per case.
 * Every number crosses the boundary as JSON text, which round-trips
 * float64 values exactly, so results here are bit-identical to calling
 * the library in-process.
 *
 * Each kernel has a batch form (one process call for many cases — use
 * this in hot paths) and a single-case convenience wrapper.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Axis-aligned rectangle as [x1, y1, x2, y2], right/bottom exclusive. */
export type Box = [number, number, number, number];

/** Linear space-time tube: first- and last-frame boxes over `length` frames. */
export interface Tube {
  t0?: number;
  length: number;
  start: Box;
  end: Box;
}

export interface ScoredTube extends Tube {
  score: number;
}

export interface ScoredBox {
  box: Box;
  frame?: number;
  score: number;
}

export type TemporalMode = "max" | "average";

export interface PoolCase {
  /** Feature volume as nested arrays with shape (T, C, H, W). */
  volume: number[][][][];
  stride?: number;
  tube: Tube;
  /** Pooled side length P; output is (C, P, P). */
  size: number;
  mode?: TemporalMode;
}

export interface PoolBackwardCase extends PoolCase {
  /** Upstream gradient with shape (C, P, P). */
  grad: number[][][];
}

export interface PoolResult {
  values: number[][][];
  /** (C, P, P, 3) winning (t, y, x) per bin; present in "max" mode only. */
  argmax?: number[][][][];
}

export interface AnchorSpec {
  stride?: number;
  scales: number[];
  aspect_ratios: number[];
}

export interface ProposeCase {
  anchor: AnchorSpec;
  /** Score map with shape (H', W', K). */
  scores: number[][][];
  /** Regression map with shape (H', W', K, 8). */
  regressions: number[][][][];
  length?: number;
  top_n: number;
  threshold: number;
}

export type KernelOp =
  | "iou"
  | "tube_overlap"
  | "nms_tubes"
  | "nms_boxes"
  | "toi_pool_forward"
  | "toi_pool_backward"
  | "propose_from_maps";

/** Raised when the primary reports a failure; carries its error message. */
export class KernelError extends Error {
  constructor(readonly op: KernelOp, message: string) {
    super(`kernel '${op}' failed: ${message}`);
    this.name = "KernelError";
  }
}

export interface KernelOptions {
  /** Executable to spawn; defaults to $TUBEKIT_BIN or "tubekit". */
  command?: string;
}

function kernelCommand(opts?: KernelOptions): string {
  return opts?.command ?? process.env.TUBEKIT_BIN ?? "tubekit";
}

/**
 * Run one batched kernel call: write the request file, spawn the CLI,
 * parse the response. Throws KernelError with the primary's message when
 * the process exits non-zero.
 */
export function runKernel(op: KernelOp, cases: unknown[], opts?: KernelOptions): unknown[] {
  const dir = mkdtempSync(join(tmpdir(), "tubekit-"));
  try {
    const reqPath = join(dir, "request.json");
    const resPath = join(dir, "response.json");
    writeFileSync(reqPath, JSON.stringify({ cases }));
    const proc = spawnSync(
      kernelCommand(opts),
      ["kernel", "--op", op, "--in", reqPath, "--out", resPath],
      { encoding: "utf8" },
    );
    if (proc.error) {
      throw new KernelError(op, proc.error.message);
    }
    if (proc.status !== 0) {
      let message = proc.stderr.trim() || `exit status ${proc.status}`;
      try {
        const body = JSON.parse(readFileSync(resPath, "utf8"));
        if (typeof body.error === "string") message = body.error;
      } catch {
        // no structured error file; fall back to stderr
      }
      throw new KernelError(op, message);
    }
    const response = JSON.parse(readFileSync(resPath, "utf8"));
    return response.results as unknown[];
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

// ── Geometry ────────────────────────────────────────────────────────────────

export function iouBatch(cases: { a: Box; b: Box }[], opts?: KernelOptions): number[] {
  return runKernel("iou", cases, opts) as number[];
}

/** Intersection-over-union of two boxes. */
export function iou(a: Box, b: Box, opts?: KernelOptions): number {
  return iouBatch([{ a, b }], opts)[0];
}

export function tubeOverlapBatch(cases: { a: Tube; b: Tube }[], opts?: KernelOptions): number[] {
  return runKernel("tube_overlap", cases, opts) as number[];
}

/** Tube overlap: the smaller of the start-box and end-box IoUs. */
export function tubeOverlap(a: Tube, b: Tube, opts?: KernelOptions): number {
  return tubeOverlapBatch([{ a, b }], opts)[0];
}

// ── Suppression ─────────────────────────────────────────────────────────────

export function nmsTubesBatch(
  cases: { items: ScoredTube[]; threshold: number }[],
  opts?: KernelOptions,
): number[][] {
  return runKernel("nms_tubes", cases, opts) as number[][];
}

/** Greedy tube-NMS; returns kept indices in descending score order. */
export function nmsTubes(items: ScoredTube[], threshold: number, opts?: KernelOptions): number[] {
  return nmsTubesBatch([{ items, threshold }], opts)[0];
}

export function nmsBoxesBatch(
  cases: { items: ScoredBox[]; threshold: number }[],
  opts?: KernelOptions,
): number[][] {
  return runKernel("nms_boxes", cases, opts) as number[][];
}

/** Greedy box-NMS; returns kept indices in descending score order. */
export function nmsBoxes(items: ScoredBox[], threshold: number, opts?: KernelOptions): number[] {
  return nmsBoxesBatch([{ items, threshold }], opts)[0];
}

// ── Pooling ─────────────────────────────────────────────────────────────────

export function toiPoolForwardBatch(cases: PoolCase[], opts?: KernelOptions): PoolResult[] {
  return runKernel("toi_pool_forward", cases, opts) as PoolResult[];
}

/** Pool a tube's region of a feature volume down to (C, size, size). */
export function toiPoolForward(c: PoolCase, opts?: KernelOptions): PoolResult {
  return toiPoolForwardBatch([c], opts)[0];
}

export function toiPoolBackwardBatch(
  cases: PoolBackwardCase[],
  opts?: KernelOptions,
): { grad: number[][][][] }[] {
  return runKernel("toi_pool_backward", cases, opts) as { grad: number[][][][] }[];
}

/** Route an upstream (C, P, P) gradient back to the (T, C, H, W) volume. */
export function toiPoolBackward(c: PoolBackwardCase, opts?: KernelOptions): number[][][][] {
  return toiPoolBackwardBatch([c], opts)[0].grad;
}

// ── Proposals ───────────────────────────────────────────────────────────────

export function proposeFromMapsBatch(cases: ProposeCase[], opts?: KernelOptions): ScoredTube[][] {
  return runKernel("propose_from_maps", cases, opts) as ScoredTube[][];
}

/** Decode anchors against score/regression maps and prune by tube-NMS. */
export function proposeFromMaps(c: ProposeCase, opts?: KernelOptions): ScoredTube[] {
  return proposeFromMapsBatch([c], opts)[0];
}
