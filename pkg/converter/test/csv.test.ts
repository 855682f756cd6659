import { describe, expect, it } from "vitest";
import { formatValue, positionsCsv, spikesCsv } from "../src/csv.js";

describe("formatValue", () => {
  it("writes integers without a decimal point", () => {
    expect(formatValue(3)).toBe("3");
    expect(formatValue(-120)).toBe("-120");
    expect(formatValue(0)).toBe("0");
  });

  it("keeps 12 significant digits and trims trailing zeros", () => {
    expect(formatValue(10.5)).toBe("10.5");
    expect(formatValue(1 / 3)).toBe("0.333333333333");
    expect(formatValue(123.456000000001)).toBe("123.456");
    expect(formatValue(1.00000000000049)).toBe("1");
  });

  it("round-trips to at least 9 significant digits", () => {
    const values = [0.123456789123, 199.999999949, 3.1415926535897, 1e-4 * 7.77777777771];
    for (const v of values) {
      const back = Number(formatValue(v));
      expect(Math.abs(back - v) / Math.abs(v)).toBeLessThan(1e-9);
    }
  });

  it("rejects non-finite values", () => {
    expect(() => formatValue(Number.NaN)).toThrow(/non-finite/);
    expect(() => formatValue(Infinity)).toThrow(/non-finite/);
  });
});

describe("writers", () => {
  it("positionsCsv uses the t,x,y header, LF endings, trailing newline", () => {
    const text = positionsCsv(new Float64Array([1.5, 2.5]), new Float64Array([3, 4]));
    expect(text).toBe("t,x,y\n0,1.5,3\n1,2.5,4\n");
    expect(text.includes("\r")).toBe(false);
  });

  it("spikesCsv numbers channels from n0", () => {
    const text = spikesCsv(new Float64Array([1, 2, 3, 4, 5, 6]), 2, 3);
    expect(text).toBe("t,n0,n1,n2\n0,1,2,3\n1,4,5,6\n");
  });

  it("writers reject shape mismatches", () => {
    expect(() => positionsCsv(new Float64Array(2), new Float64Array(3))).toThrow(/mismatch/);
    expect(() => spikesCsv(new Float64Array(5), 2, 3)).toThrow(/shape/);
  });
});
