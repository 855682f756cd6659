#!/usr/bin/env node
import { convertDataset, DEFAULT_BIN_WIDTH_S } from "./convert.js";

const USAGE = "usage: convert --source <session.npz> --out <dir> [--bin-width <seconds>]";

function main(argv: string[]): number {
  let source: string | undefined;
  let out: string | undefined;
  let binWidth = DEFAULT_BIN_WIDTH_S;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--source" || arg === "--out" || arg === "--bin-width") {
      const value = argv[++i];
      if (value === undefined) {
        process.stderr.write(`${arg} needs a value\n${USAGE}\n`);
        return 2;
      }
      if (arg === "--source") source = value;
      else if (arg === "--out") out = value;
      else {
        binWidth = Number(value);
        if (!(binWidth > 0)) {
          process.stderr.write(`--bin-width must be a positive number, got ${value}\n`);
          return 2;
        }
      }
    } else if (arg === "--help" || arg === "-h") {
      process.stdout.write(`${USAGE}\n`);
      return 0;
    } else {
      process.stderr.write(`unknown argument ${arg}\n${USAGE}\n`);
      return 2;
    }
  }
  if (!source || !out) {
    process.stderr.write(`${USAGE}\n`);
    return 2;
  }

  try {
    const manifest = convertDataset(source, out, binWidth);
    process.stdout.write(JSON.stringify(manifest, null, 2) + "\n");
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
