import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import { convertDataset } from "../src/convert.js";

// The converter's whole purpose is producing CSVs the decoder ingests, so
// drive the real decoder CLI over a converted session end to end.

const dirs: string[] = [];
function scratch(): string {
  const d = mkdtempSync(join(tmpdir(), "roundtrip-"));
  dirs.push(d);
  return d;
}
afterAll(() => {
  for (const d of dirs) rmSync(d, { recursive: true, force: true });
});

describe("decoder round trip", () => {
  it("converted output passes decoder ingestion and a short fit", () => {
    const out = scratch();
    const manifest = convertDataset(
      new URL("../fixtures/wide.npz", import.meta.url).pathname,
      out
    );
    const runDir = scratch();
    execFileSync(
      "python3",
      [
        "-m",
        "symdecode.cli",
        "decode",
        "--positions",
        manifest.outputs.positions,
        "--spikes",
        manifest.outputs.spikes,
        "--out-dir",
        runDir,
        "--max-iters",
        "2",
      ],
      { stdio: "pipe", timeout: 120_000 }
    );
    const summaryPath = join(runDir, "decode_summary.json");
    expect(existsSync(summaryPath)).toBe(true);
    const summary = JSON.parse(readFileSync(summaryPath, "utf8"));
    expect(summary.iters_used).toBeGreaterThanOrEqual(1);
  }, 150_000);
});
