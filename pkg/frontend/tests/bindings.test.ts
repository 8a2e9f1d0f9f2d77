/**
 * Equivalence and error-path tests for the bindings.
 *
 * Fixtures pair randomized inputs with expected outputs computed by the
 * primary library in-process (see scripts/make_fixtures.py). Replaying
 * the same inputs through the CLI boundary must reproduce every number
 * bit-for-bit: toEqual compares the parsed float64 values exactly.
 */

import { spawnSync } from "node:child_process";
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeAll, describe, expect, it } from "vitest";

import {
  Box,
  KernelError,
  KernelOp,
  iou,
  nmsBoxes,
  nmsTubes,
  runKernel,
  toiPoolForward,
  tubeOverlap,
} from "../src/index.js";

const root = join(fileURLToPath(new URL(".", import.meta.url)), "..");
const fixturesDir = join(root, "fixtures");

const OPS: KernelOp[] = [
  "iou",
  "tube_overlap",
  "nms_tubes",
  "nms_boxes",
  "toi_pool_forward",
  "toi_pool_backward",
  "propose_from_maps",
];

interface Fixture {
  op: KernelOp;
  cases: unknown[];
  expected: unknown[];
}

beforeAll(() => {
  if (OPS.every((op) => existsSync(join(fixturesDir, `${op}.json`)))) return;
  const proc = spawnSync("python3", [join(root, "scripts", "make_fixtures.py")], {
    encoding: "utf8",
  });
  if (proc.status !== 0) {
    throw new Error(`fixture generation failed: ${proc.stderr}`);
  }
});

describe("kernel equivalence", () => {
  it.each(OPS)("%s matches the primary bit-for-bit on 1000 random cases", (op) => {
    const fixture: Fixture = JSON.parse(
      readFileSync(join(fixturesDir, `${op}.json`), "utf8"),
    );
    expect(fixture.cases.length).toBe(1000);
    const actual = runKernel(op, fixture.cases);
    expect(actual).toEqual(fixture.expected);
  });
});

describe("single-call wrappers", () => {
  it("computes IoU of half-overlapping boxes", () => {
    expect(iou([0, 0, 2, 2], [1, 0, 3, 2])).toBe(1 / 3);
  });

  it("tube overlap is the min of the end IoUs", () => {
    const a = { length: 5, start: [0, 0, 2, 2] as Box, end: [0, 0, 2, 2] as Box };
    const b = { length: 5, start: [0, 0, 2, 2] as Box, end: [1, 0, 3, 2] as Box };
    expect(tubeOverlap(a, b)).toBe(1 / 3);
  });

  it("NMS keeps the higher-scoring duplicate and orders by score", () => {
    const box: Box = [0, 0, 10, 10];
    const kept = nmsBoxes(
      [
        { box, score: 0.5 },
        { box, score: 0.9 },
        { box: [50, 50, 60, 60], score: 0.7 },
      ],
      0.5,
    );
    expect(kept).toEqual([1, 2]);
  });

  it("tube-NMS breaks score ties toward the lower index", () => {
    const tube = { length: 3, start: [0, 0, 5, 5] as Box, end: [0, 0, 5, 5] as Box };
    expect(nmsTubes([{ ...tube, score: 0.4 }, { ...tube, score: 0.4 }], 0.5)).toEqual([0]);
  });
});

describe("error paths", () => {
  it("raises KernelError carrying the primary's message for a degenerate box", () => {
    expect(() => iou([0, 0, 0, 0], [0, 0, 1, 1])).toThrowError(KernelError);
    expect(() => iou([0, 0, 0, 0], [0, 0, 1, 1])).toThrowError(/GeometryError/);
  });

  it("raises for a pooling request whose region misses the volume", () => {
    const volume = [[[[1, 2], [3, 4]]]];
    expect(() =>
      toiPoolForward({
        volume,
        stride: 1,
        tube: { length: 1, start: [10, 10, 12, 12], end: [10, 10, 12, 12] },
        size: 1,
      }),
    ).toThrowError(KernelError);
  });

  it("raises when the executable cannot be found", () => {
    expect(() => iou([0, 0, 1, 1], [0, 0, 1, 1], { command: "tubekit-nonexistent" }))
      .toThrowError(KernelError);
  });
});
