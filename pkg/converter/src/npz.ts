/**
 * Just enough of the zip format to read .npz archives: end-of-central-directory
 * record, central directory walk, stored (0) and deflated (8) members.
 */

import { inflateRawSync } from "node:zlib";
import { parseNpy, NpyArray } from "./npy.js";

const EOCD_SIG = 0x06054b50;
const CENTRAL_SIG = 0x02014b50;
const LOCAL_SIG = 0x04034b50;

function findEocd(buf: Buffer): number {
  // EOCD is 22 bytes plus a comment of up to 64 KiB; scan backwards
  const lo = Math.max(0, buf.length - 22 - 0xffff);
  for (let i = buf.length - 22; i >= lo; i--) {
    if (buf.readUInt32LE(i) === EOCD_SIG) return i;
  }
  throw new Error("not a zip archive (no end-of-central-directory record)");
}

function memberData(buf: Buffer, localOffset: number, method: number, compSize: number): Buffer {
  if (buf.readUInt32LE(localOffset) !== LOCAL_SIG) {
    throw new Error("corrupt zip archive (bad local header)");
  }
  // the local extra field can differ in length from the central one
  const nameLen = buf.readUInt16LE(localOffset + 26);
  const extraLen = buf.readUInt16LE(localOffset + 28);
  const start = localOffset + 30 + nameLen + extraLen;
  const raw = buf.subarray(start, start + compSize);
  if (method === 0) return Buffer.from(raw);
  if (method === 8) return inflateRawSync(raw);
  throw new Error(`unsupported zip compression method ${method}`);
}

/** Read every member of an .npz archive into a name -> array map. */
export function readNpz(buf: Buffer): Map<string, NpyArray> {
  const eocd = findEocd(buf);
  const entryCount = buf.readUInt16LE(eocd + 10);
  const centralOffset = buf.readUInt32LE(eocd + 16);
  if (entryCount === 0xffff || centralOffset === 0xffffffff) {
    throw new Error("zip64 archives are not supported");
  }

  const out = new Map<string, NpyArray>();
  let pos = centralOffset;
  for (let i = 0; i < entryCount; i++) {
    if (buf.readUInt32LE(pos) !== CENTRAL_SIG) {
      throw new Error("corrupt zip archive (bad central directory)");
    }
    const method = buf.readUInt16LE(pos + 10);
    const compSize = buf.readUInt32LE(pos + 20);
    const nameLen = buf.readUInt16LE(pos + 28);
    const extraLen = buf.readUInt16LE(pos + 30);
    const commentLen = buf.readUInt16LE(pos + 32);
    const localOffset = buf.readUInt32LE(pos + 42);
    const name = buf.subarray(pos + 46, pos + 46 + nameLen).toString("utf8");

    const data = memberData(buf, localOffset, method, compSize);
    const key = name.endsWith(".npy") ? name.slice(0, -4) : name;
    out.set(key, parseNpy(data));

    pos += 46 + nameLen + extraLen + commentLen;
  }
  return out;
}
