/**
 * Typed client over the graphdist CLI.
 *
 * BoundGraph wraps an immutable graph in the text exchange format;
 * distance/validate/enumerate calls marshal arguments to the CLI and
 * return plain records identical to what the CLI itself prints.
 */

import {
  BudgetError,
  GraphdistError,
  InvalidInputError,
  UsageError,
  runCli,
  runCliChecked,
} from "./runner.js";

export { BudgetError, GraphdistError, InvalidInputError, UsageError, runCli };

export type GraphClass = "ug" | "dag" | "cpdag" | "mpdag";

export type DistanceMethod =
  | "auto"
  | "astar"
  | "downup"
  | "updown"
  | "pseudo"
  | "bruteforce"
  | "shd1"
  | "shd2"
  | "lowerbound";

export interface ClassOptions {
  graphClass: GraphClass;
  polytree?: boolean;
}

export interface DistanceRecord {
  value: number;
  method: string;
  expansions: number;
  bounds?: { lower: number | null; upper: number | null };
  path?: string[];
}

export interface ValidationRecord {
  valid: boolean;
  reason?: string;
}

function classFlags(opts: ClassOptions): string[] {
  const flags = ["--class", opts.graphClass];
  if (opts.polytree) flags.push("--polytree");
  return flags;
}

/** Immutable handle to a graph in the text exchange format. */
export class BoundGraph {
  readonly text: string;

  private constructor(text: string) {
    this.text = text;
  }

  /**
   * Parse a text-format graph; when a class is given, membership is
   * validated eagerly through the CLI and invalid graphs are rejected.
   */
  static fromText(text: string, opts?: ClassOptions): BoundGraph {
    const g = new BoundGraph(normalize(text));
    if (opts) {
      const check = g.validate(opts);
      if (!check.valid) {
        throw new InvalidInputError(check.reason ?? "invalid graph");
      }
    }
    return g;
  }

  /** Build from a 0/1 adjacency matrix (entry [i][j] = 1 iff i-j or i->j). */
  static fromAdjacencyMatrix(rows: number[][], opts?: ClassOptions): BoundGraph {
    const n = rows.length;
    const lines = [`n=${n}`];
    for (let i = 0; i < n; i++) {
      if (rows[i].length !== n) {
        throw new UsageError("adjacency matrix is not square");
      }
      for (let j = i + 1; j < n; j++) {
        const a = rows[i][j];
        const b = rows[j][i];
        if (a && b) lines.push(`${i + 1} -- ${j + 1}`);
        else if (a) lines.push(`${i + 1} -> ${j + 1}`);
        else if (b) lines.push(`${j + 1} -> ${i + 1}`);
      }
    }
    return BoundGraph.fromText(lines.join("\n") + "\n", opts);
  }

  validate(opts: ClassOptions): ValidationRecord {
    const res = runCliChecked(
      ["validate", ...classFlags(opts), "-"],
      this.text,
      [0, 1],
    );
    if (res.code === 0) return { valid: true };
    return { valid: false, reason: res.stdout.trim() };
  }
}

export function validate(g: BoundGraph, opts: ClassOptions): ValidationRecord {
  return g.validate(opts);
}

export interface DistanceOptions extends ClassOptions {
  method?: DistanceMethod;
  wantPath?: boolean;
}

/** Raw CLI JSON bytes for a distance query on graph files. */
export function distanceFiles(
  fileA: string,
  fileB: string,
  opts: DistanceOptions,
): string {
  const args = [
    "distance",
    ...classFlags(opts),
    "--method",
    opts.method ?? "auto",
    "--json",
  ];
  if (opts.wantPath) args.push("--path");
  args.push(fileA, fileB);
  return runCliChecked(args).stdout;
}

export function distance(
  a: BoundGraph,
  b: BoundGraph,
  opts: DistanceOptions,
): DistanceRecord {
  const { paths, cleanup } = materialize([a, b]);
  try {
    const raw = distanceFiles(paths[0], paths[1], opts);
    const parsed = JSON.parse(raw);
    const record: DistanceRecord = {
      value: parsed.value,
      method: parsed.method,
      expansions: parsed.expansions,
    };
    if (parsed.lower_bound !== null || parsed.upper_bound !== null) {
      record.bounds = { lower: parsed.lower_bound, upper: parsed.upper_bound };
    }
    if (parsed.path) record.path = parsed.path;
    return record;
  } finally {
    cleanup();
  }
}

export function shd(
  a: BoundGraph,
  b: BoundGraph,
  variant: 1 | 2,
  opts: ClassOptions,
): number {
  const rec = distance(a, b, {
    ...opts,
    method: variant === 1 ? "shd1" : "shd2",
  });
  return rec.value;
}

export function enumerateCount(opts: ClassOptions, n: number): number {
  const res = runCliChecked([
    "enumerate",
    ...classFlags(opts),
    "-n",
    String(n),
    "--count-only",
  ]);
  return parseInt(res.stdout.trim(), 10);
}

/** All class members as text-format graphs, in canonical catalog order. */
export function enumerateMembers(opts: ClassOptions, n: number): BoundGraph[] {
  const res = runCliChecked([
    "enumerate",
    ...classFlags(opts),
    "-n",
    String(n),
  ]);
  return res.stdout
    .split(/\n\s*\n/)
    .map((block) => block.trim())
    .filter((block) => block.length > 0)
    .map((block) => BoundGraph.fromText(block + "\n"));
}

export interface NeighborRecord {
  up: string[];
  down: string[];
}

export function neighbors(
  g: BoundGraph,
  opts: ClassOptions & { pseudo?: boolean },
): NeighborRecord {
  const args = ["neighbors", ...classFlags(opts)];
  if (opts.pseudo) args.push("--pseudo");
  args.push("-");
  const res = runCliChecked(args, g.text);
  const lines = res.stdout.split("\n");
  const header = lines[0];
  const match = /^# (\d+) up, (\d+) down$/.exec(header);
  if (!match) throw new GraphdistError(`unexpected neighbors header: ${header}`);
  const nUp = parseInt(match[1], 10);
  const blocks = lines
    .slice(1)
    .join("\n")
    .split(/\n\s*\n/)
    .map((b) => b.trim())
    .filter((b) => b.length > 0);
  return {
    up: blocks.slice(0, nUp),
    down: blocks.slice(nUp),
  };
}

function normalize(text: string): string {
  return text.endsWith("\n") ? text : text + "\n";
}

import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

function materialize(graphs: BoundGraph[]): {
  paths: string[];
  cleanup: () => void;
} {
  const dir = mkdtempSync(join(tmpdir(), "graphdist-"));
  const paths = graphs.map((g, i) => {
    const p = join(dir, `g${i}.graph`);
    writeFileSync(p, g.text);
    return p;
  });
  return {
    paths,
    cleanup: () => rmSync(dir, { recursive: true, force: true }),
  };
}
