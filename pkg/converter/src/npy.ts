/**
 * Minimal .npy reader: header dict + raw buffer into a flat Float64Array.
 *
 * Supports the little-endian numeric dtypes that recording sessions actually
 * use (f8, f4, i8, i4, i2, u1, u2, u4). Fortran-ordered 2-D arrays are
 * transposed into row-major order on load.
 */

export type NpyArray = {
  shape: number[];
  /** row-major values, normalized to float64 */
  data: Float64Array;
};

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

function aligned(buf: Buffer, offset: number, length: number): ArrayBuffer {
  // TypedArray views need dtype-aligned offsets; a fresh copy is always at 0
  const out = new ArrayBuffer(length);
  new Uint8Array(out).set(buf.subarray(offset, offset + length));
  return out;
}

function decodeValues(descr: string, buf: Buffer, offset: number, count: number): Float64Array {
  switch (descr) {
    case "<f8": {
      return new Float64Array(aligned(buf, offset, count * 8));
    }
    case "<f4":
      return Float64Array.from(new Float32Array(aligned(buf, offset, count * 4)));
    case "<i8": {
      const big = new BigInt64Array(aligned(buf, offset, count * 8));
      const out = new Float64Array(count);
      for (let i = 0; i < count; i++) out[i] = Number(big[i]);
      return out;
    }
    case "<i4":
      return Float64Array.from(new Int32Array(aligned(buf, offset, count * 4)));
    case "<i2":
      return Float64Array.from(new Int16Array(aligned(buf, offset, count * 2)));
    case "<u4":
      return Float64Array.from(new Uint32Array(aligned(buf, offset, count * 4)));
    case "<u2":
      return Float64Array.from(new Uint16Array(aligned(buf, offset, count * 2)));
    case "|u1":
      return Float64Array.from(buf.subarray(offset, offset + count));
    default:
      throw new Error(`unsupported npy dtype ${JSON.stringify(descr)}`);
  }
}

export function parseNpy(buf: Buffer): NpyArray {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an npy array (bad magic)");
  }
  const major = buf[6];
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = buf.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = buf.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new Error(`unsupported npy version ${major}`);
  }
  const header = buf.subarray(headerStart, headerStart + headerLen).toString("latin1");

  const descrMatch = header.match(/'descr':\s*'([^']+)'/);
  const orderMatch = header.match(/'fortran_order':\s*(True|False)/);
  const shapeMatch = header.match(/'shape':\s*\(([^)]*)\)/);
  if (!descrMatch || !orderMatch || !shapeMatch) {
    throw new Error(`malformed npy header: ${header.trim()}`);
  }
  const descr = descrMatch[1];
  const fortran = orderMatch[1] === "True";
  const shape = shapeMatch[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => parseInt(s, 10));
  const count = shape.reduce((a, b) => a * b, 1);

  let data = decodeValues(descr, buf, headerStart + headerLen, count);

  if (fortran && shape.length === 2) {
    const [rows, cols] = shape;
    const t = new Float64Array(count);
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) t[r * cols + c] = data[c * rows + r];
    }
    data = t;
  } else if (fortran && shape.length > 2) {
    throw new Error("fortran-ordered arrays above 2-D are not supported");
  }
  return { shape, data };
}
