/**
 * Low-level bridge to the graphdist command-line tool.
 *
 * The client never re-implements any graph logic: every call shells out
 * to the CLI, passing graphs in the text format on stdin or as files and
 * parsing the plain or JSON output.
 */

import { spawnSync } from "node:child_process";

export class GraphdistError extends Error {}
export class InvalidInputError extends GraphdistError {}
export class UsageError extends GraphdistError {}
export class BudgetError extends GraphdistError {}

export interface CliResult {
  stdout: string;
  stderr: string;
  code: number;
}

/** Command used to launch the CLI; override with GRAPHDIST_CLI. */
export function cliCommand(): string[] {
  const env = process.env.GRAPHDIST_CLI;
  if (env && env.length > 0) {
    return env.split(" ");
  }
  return ["python3", "-m", "graphdist.cli"];
}

export function runCli(args: string[], stdin?: string): CliResult {
  const [cmd, ...prefix] = cliCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], {
    input: stdin,
    encoding: "utf8",
    maxBuffer: 512 * 1024 * 1024,
  });
  if (proc.error) {
    throw new GraphdistError(`failed to launch CLI: ${proc.error.message}`);
  }
  return { stdout: proc.stdout, stderr: proc.stderr, code: proc.status ?? -1 };
}

/** Run and raise a typed error for non-zero exits outside `allowed`. */
export function runCliChecked(
  args: string[],
  stdin?: string,
  allowed: number[] = [0],
): CliResult {
  const res = runCli(args, stdin);
  if (!allowed.includes(res.code)) {
    const msg = res.stderr.trim() || res.stdout.trim() || `exit ${res.code}`;
    if (res.code === 2) throw new UsageError(msg);
    if (res.code === 3) throw new BudgetError(msg);
    throw new InvalidInputError(msg);
  }
  return res;
}
