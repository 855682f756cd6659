import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import { binSession, convertDataset, loadSession } from "../src/convert.js";

const fixture = (name: string) => new URL(`../fixtures/${name}`, import.meta.url).pathname;

const dirs: string[] = [];
function scratch(): string {
  const d = mkdtempSync(join(tmpdir(), "convert-"));
  dirs.push(d);
  return d;
}
afterAll(() => {
  for (const d of dirs) rmSync(d, { recursive: true, force: true });
});

function dataRows(path: string): string[] {
  const lines = readFileSync(path, "utf8").split("\n");
  expect(lines[lines.length - 1]).toBe("");
  return lines.slice(1, -1);
}

describe("loadSession", () => {
  it("rejects archives with the wrong arrays, listing what it found", () => {
    const buf = readFileSync(fixture("badkeys.npz"));
    expect(() => loadSession(buf)).toThrow(/lfp \(3, 2\); velocity \(3,?\)/);
    expect(() => loadSession(buf)).toThrow(/times \(T,\), positions \(T, 2\), spikes \(T, M\)/);
  });
});

describe("binSession", () => {
  it("averages positions and sums counts within a bin", () => {
    const session = loadSession(readFileSync(fixture("tiny.npz")));
    // 0.5 s bins pair up the 0.25 s-spaced samples
    const binned = binSession(session, 0.5);
    expect(binned.k).toBe(2);
    expect(Array.from(binned.x)).toEqual([(10.5 + 30.125) / 2, (55.75 + 70.0) / 2]);
    expect(Array.from(binned.y)).toEqual([(20.25 + 40.0) / 2, (60.5 + 80.875) / 2]);
    expect(Array.from(binned.counts)).toEqual([1, 5, 6, 1]);
  });

  it("drops empty bins so rows stay contiguous", () => {
    const session = loadSession(readFileSync(fixture("tiny.npz")));
    const binned = binSession(session, 0.01);
    expect(binned.k).toBe(4);
    expect(Array.from(binned.x)).toEqual([10.5, 30.125, 55.75, 70.0]);
  });

  it("rejects a non-positive bin width", () => {
    const session = loadSession(readFileSync(fixture("tiny.npz")));
    expect(() => binSession(session, 0)).toThrow(/positive/);
    expect(() => binSession(session, -1)).toThrow(/positive/);
  });
});

describe("convertDataset", () => {
  it("emits one data row per occupied bin for the tiny session", () => {
    const out = scratch();
    const manifest = convertDataset(fixture("tiny.npz"), out);
    expect(manifest.k).toBe(4);
    expect(manifest.m).toBe(2);
    expect(dataRows(join(out, "positions.csv")).length).toBe(4);
    expect(dataRows(join(out, "spikes.csv")).length).toBe(4);
    expect(readFileSync(join(out, "positions.csv"), "utf8").split("\n")[0]).toBe("t,x,y");
    expect(readFileSync(join(out, "spikes.csv"), "utf8").split("\n")[0]).toBe("t,n0,n1");
  });

  it("keeps position values to at least 9 significant digits", () => {
    const out = scratch();
    convertDataset(fixture("tiny.npz"), out);
    const rows = dataRows(join(out, "positions.csv")).map((r) => r.split(",").map(Number));
    const expected = [
      [10.5, 20.25],
      [30.125, 40.0],
      [55.75, 60.5],
      [70.0, 80.875],
    ];
    rows.forEach(([, x, y], i) => {
      expect(Math.abs(x - expected[i][0])).toBeLessThan(1e-9);
      expect(Math.abs(y - expected[i][1])).toBeLessThan(1e-9);
    });
  });

  it("manifest row and channel counts match the emitted CSVs", () => {
    const out = scratch();
    const manifest = convertDataset(fixture("wide.npz"), out);
    expect(manifest.k).toBe(600);
    expect(manifest.m).toBe(46);
    expect(manifest.bin_width_s).toBe(0.2);
    const spikeRows = dataRows(join(out, "spikes.csv"));
    expect(spikeRows.length).toBe(manifest.k);
    expect(spikeRows[0].split(",").length).toBe(manifest.m + 1);
    expect(dataRows(join(out, "positions.csv")).length).toBe(manifest.k);
  });

  it("binning conserves the total event count", () => {
    const out = scratch();
    convertDataset(fixture("wide.npz"), out);
    let total = 0;
    for (const row of dataRows(join(out, "spikes.csv"))) {
      const cells = row.split(",");
      for (let j = 1; j < cells.length; j++) total += Number(cells[j]);
    }
    expect(total).toBe(43227);
  });

  it("checksums are deterministic across runs and match the files", async () => {
    const a = convertDataset(fixture("wide.npz"), scratch());
    const b = convertDataset(fixture("wide.npz"), scratch());
    expect(a.sha256).toEqual(b.sha256);
    const { createHash } = await import("node:crypto");
    const onDisk = createHash("sha256").update(readFileSync(a.outputs.positions)).digest("hex");
    expect(onDisk).toBe(a.sha256.positions);
  });

  it("writes the manifest alongside the CSVs", () => {
    const out = scratch();
    const manifest = convertDataset(fixture("tiny.npz"), out, 0.5);
    const onDisk = JSON.parse(readFileSync(join(out, "manifest.json"), "utf8"));
    expect(onDisk).toEqual(manifest);
    expect(onDisk.bin_width_s).toBe(0.5);
    expect(onDisk.k).toBe(2);
  });
});
