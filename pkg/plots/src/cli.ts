import * as fs from "node:fs";

import { figureSpecSchema, parseKind } from "./figure";
import { renderToFile } from "./render";
import { SchemaError } from "./schema";

const USAGE = `usage:
  render --spec <spec.json>
  render <input.csv> <kind> [-o <output.svg>]

kinds: cumulants-vs-ns | sigma-vs-nm | flash-vs-t
The JSON spec carries {input, kind, output, xScale?, yScale?}.`;

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    renderToFile(spec);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(error.message);
      console.error(USAGE);
      return 2;
    }
    const message = error instanceof Error ? error.message : String(error);
    console.error(`error: ${message}`);
    return 1;
  }
}

class UsageError extends Error {}

function parseArgs(argv: string[]) {
  if (argv.length === 0) {
    throw new UsageError("missing arguments");
  }
  if (argv[0] === "--spec") {
    if (argv.length !== 2) {
      throw new UsageError("--spec takes exactly one JSON file");
    }
    let raw: unknown;
    try {
      raw = JSON.parse(fs.readFileSync(argv[1], "utf-8"));
    } catch (error) {
      throw new SchemaError(`cannot read spec ${argv[1]}: ${(error as Error).message}`);
    }
    const parsed = figureSpecSchema.safeParse(raw);
    if (!parsed.success) {
      throw new UsageError(`bad figure spec: ${parsed.error.issues[0].message}`);
    }
    return parsed.data;
  }
  const positional: string[] = [];
  let output: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "-o" || arg === "--output") {
      output = argv[++i];
      if (!output) {
        throw new UsageError(`${arg} needs a path`);
      }
    } else if (arg.startsWith("-")) {
      throw new UsageError(`unknown option ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    throw new UsageError("expected <input.csv> <kind>");
  }
  const kind = (() => {
    try {
      return parseKind(positional[1]);
    } catch (error) {
      throw new UsageError((error as Error).message);
    }
  })();
  return { input: positional[0], kind, output: output ?? `${positional[0]}.svg` };
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
