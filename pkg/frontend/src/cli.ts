#!/usr/bin/env node
/** render --kind scaling|violin|clt-hist --in results.csv --out figure.svg
 *
 * The output format follows the --out extension (.svg or .png).  Rendering is
 * pure in the CSV: the same input produces byte-identical files.  A header
 * that does not match the declared schema exits non-zero naming the offending
 * column.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { SchemaError, parseCsv } from "./csv";
import { FigureKind, buildFigure } from "./figures";
import { encodePng } from "./png";
import { rasterize } from "./raster";
import { renderSvg } from "./svg";

interface Args {
  kind: FigureKind;
  input: string;
  output: string;
}

function parseArgs(argv: string[]): Args {
  const args: Record<string, string> = {};
  let i = 0;
  if (argv[0] === "render") i = 1;
  for (; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${flag}`);
    }
    args[flag.slice(2)] = value;
  }
  const kind = args["kind"] as FigureKind;
  if (!["scaling", "violin", "clt-hist"].includes(kind)) {
    throw new Error(`--kind must be scaling, violin or clt-hist (got ${kind})`);
  }
  if (!args["in"] || !args["out"]) {
    throw new Error("--in and --out are required");
  }
  return { kind, input: args["in"], output: args["out"] };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const table = parseCsv(readFileSync(args.input, "utf8"));
    const scene = buildFigure(args.kind, table);
    if (args.output.endsWith(".png")) {
      writeFileSync(args.output, encodePng(rasterize(scene)));
    } else if (args.output.endsWith(".svg")) {
      writeFileSync(args.output, renderSvg(scene));
    } else {
      console.error("--out must end in .svg or .png");
      return 2;
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema mismatch in column ${JSON.stringify(err.column)}: ${err.message}`);
      return 3;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  console.log(`${args.kind}: ${args.input} -> ${args.output}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
