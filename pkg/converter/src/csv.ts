/**
 * Interchange CSV writers.
 *
 * Positions: header t,x,y then one row per bin.
 * Spike counts: header t,n0..n{M-1}.
 * LF line endings, trailing newline, values at 12 significant digits.
 */

export function formatValue(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite value ${x} in output`);
  if (Number.isInteger(x) && Math.abs(x) < 1e15) return String(x);
  let s = x.toPrecision(12);
  if (s.includes("e")) return s;
  if (s.includes(".")) s = s.replace(/0+$/, "").replace(/\.$/, "");
  return s;
}

export function positionsCsv(xs: Float64Array, ys: Float64Array): string {
  if (xs.length !== ys.length) throw new Error("axis length mismatch");
  const lines = ["t,x,y"];
  for (let i = 0; i < xs.length; i++) {
    lines.push(`${i},${formatValue(xs[i])},${formatValue(ys[i])}`);
  }
  return lines.join("\n") + "\n";
}

export function spikesCsv(counts: Float64Array, k: number, m: number): string {
  if (counts.length !== k * m) throw new Error("count matrix shape mismatch");
  const header = ["t"];
  for (let j = 0; j < m; j++) header.push(`n${j}`);
  const lines = [header.join(",")];
  for (let i = 0; i < k; i++) {
    const row: string[] = [String(i)];
    for (let j = 0; j < m; j++) row.push(formatValue(counts[i * m + j]));
    lines.push(row.join(","));
  }
  return lines.join("\n") + "\n";
}
