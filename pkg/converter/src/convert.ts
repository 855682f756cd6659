/**
 * Session archive to interchange-CSV conversion.
 *
 * Input is an .npz archive holding three arrays:
 *   times      (T,)   sample timestamps in seconds
 *   positions  (T, 2) x/y coordinates
 *   spikes     (T, M) per-channel event counts
 *
 * Samples are grouped into fixed-width time bins: positions are averaged
 * within a bin, counts are summed, and bins that received no samples are
 * dropped so the output rows stay contiguous.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join, resolve } from "node:path";
import { readNpz } from "./npz.js";
import { NpyArray } from "./npy.js";
import { positionsCsv, spikesCsv } from "./csv.js";

export const DEFAULT_BIN_WIDTH_S = 0.2;

export type Session = {
  times: Float64Array;
  /** row-major (T, 2) */
  positions: Float64Array;
  /** row-major (T, M) */
  spikes: Float64Array;
  m: number;
};

export type Binned = {
  x: Float64Array;
  y: Float64Array;
  /** row-major (K, M) */
  counts: Float64Array;
  k: number;
  m: number;
};

export type Manifest = {
  source: string;
  outputs: { positions: string; spikes: string };
  k: number;
  m: number;
  bin_width_s: number;
  sha256: { positions: string; spikes: string };
};

function describeLayout(arrays: Map<string, NpyArray>): string {
  const parts: string[] = [];
  for (const [name, arr] of arrays) parts.push(`${name} (${arr.shape.join(", ")})`);
  return parts.sort().join("; ");
}

export function loadSession(buf: Buffer): Session {
  const arrays = readNpz(buf);
  const times = arrays.get("times");
  const positions = arrays.get("positions");
  const spikes = arrays.get("spikes");
  if (!times || !positions || !spikes) {
    throw new Error(
      "expected arrays times (T,), positions (T, 2), spikes (T, M); " +
        `archive holds: ${describeLayout(arrays)}`
    );
  }
  const t = times.shape.length === 1 ? times.shape[0] : -1;
  const okPos = positions.shape.length === 2 && positions.shape[0] === t && positions.shape[1] === 2;
  const okSpk = spikes.shape.length === 2 && spikes.shape[0] === t && spikes.shape[1] >= 1;
  if (t < 1 || !okPos || !okSpk) {
    throw new Error(
      "expected arrays times (T,), positions (T, 2), spikes (T, M); " +
        `archive holds: ${describeLayout(arrays)}`
    );
  }
  return { times: times.data, positions: positions.data, spikes: spikes.data, m: spikes.shape[1] };
}

export function binSession(session: Session, binWidth: number): Binned {
  if (!(binWidth > 0) || !Number.isFinite(binWidth)) {
    throw new Error(`bin width must be a positive number of seconds, got ${binWidth}`);
  }
  const { times, positions, spikes, m } = session;
  const t = times.length;

  const index = new Array<number>(t);
  for (let i = 0; i < t; i++) {
    if (!Number.isFinite(times[i])) throw new Error(`non-finite timestamp at sample ${i}`);
    index[i] = Math.floor(times[i] / binWidth);
  }

  // occupied bins only, in time order
  const order = [...new Set(index)].sort((a, b) => a - b);
  const slot = new Map<number, number>();
  order.forEach((bin, row) => slot.set(bin, row));

  const k = order.length;
  const sumX = new Float64Array(k);
  const sumY = new Float64Array(k);
  const n = new Float64Array(k);
  const counts = new Float64Array(k * m);
  for (let i = 0; i < t; i++) {
    const row = slot.get(index[i])!;
    sumX[row] += positions[i * 2];
    sumY[row] += positions[i * 2 + 1];
    n[row] += 1;
    for (let j = 0; j < m; j++) counts[row * m + j] += spikes[i * m + j];
  }
  const x = new Float64Array(k);
  const y = new Float64Array(k);
  for (let row = 0; row < k; row++) {
    x[row] = sumX[row] / n[row];
    y[row] = sumY[row] / n[row];
  }
  return { x, y, counts, k, m };
}

export function convertDataset(sourcePath: string, outDir: string, binWidth: number = DEFAULT_BIN_WIDTH_S): Manifest {
  const session = loadSession(readFileSync(sourcePath));
  const binned = binSession(session, binWidth);

  mkdirSync(outDir, { recursive: true });
  const posPath = join(outDir, "positions.csv");
  const spkPath = join(outDir, "spikes.csv");
  const posText = positionsCsv(binned.x, binned.y);
  const spkText = spikesCsv(binned.counts, binned.k, binned.m);
  writeFileSync(posPath, posText);
  writeFileSync(spkPath, spkText);

  const manifest: Manifest = {
    source: resolve(sourcePath),
    outputs: { positions: resolve(posPath), spikes: resolve(spkPath) },
    k: binned.k,
    m: binned.m,
    bin_width_s: binWidth,
    sha256: {
      positions: createHash("sha256").update(posText).digest("hex"),
      spikes: createHash("sha256").update(spkText).digest("hex"),
    },
  };
  writeFileSync(join(outDir, "manifest.json"), JSON.stringify(manifest, null, 2) + "\n");
  return manifest;
}
