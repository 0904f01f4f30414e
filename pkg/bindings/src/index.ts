/**
 * Bindings to the llmon CLI for the JS data ecosystem.
 *
 * Every function shells out to the `llmon` executable and returns its
 * stdout unchanged, so outputs are byte-identical to the CLI by
 * construction and no object graph ever crosses the process boundary.
 * Failures surface as LlmonCliError carrying the library's stable error
 * code and, when the CLI reports one, the byte offset.
 */

import { execFileSync } from "node:child_process";

export type Format = "llmon" | "mrllmon" | "json";

/** CLI spelling for each public format name. */
const CLI_FORMAT: Record<Format, string> = {
  llmon: "surface",
  mrllmon: "machine",
  json: "json",
};

const MAX_OUTPUT = 64 * 1024 * 1024;

export interface RunOptions {
  /** Path to the llmon executable; defaults to `llmon` on PATH. */
  cli?: string;
  /** JSON file overriding the special-token registry. */
  registryPath?: string;
}

export interface ParseOptions extends RunOptions {
  format?: "auto" | "llmon" | "mrllmon";
  strictLiterals?: boolean;
  permissiveClose?: boolean;
}

export interface ConvertOptions extends RunOptions {
  style?: "indented" | "compact";
}

export interface MaskPolicy {
  mode?: "instruction_selection" | "prompt_rejection" | "combined";
  scope?: "transitive" | "generation_only";
  maskUnboundData?: boolean;
  maskFreeText?: boolean;
  /** Node ids to mask outright (prompt_rejection / combined modes). */
  reject?: number[];
  /** When set, emit the expanded matrix with this many generated rows. */
  matrix?: number;
}

export class LlmonCliError extends Error {
  /** Stable SHOUTY_SNAKE code from the library, when one was reported. */
  readonly code: string | null;
  /** Byte offset into the UTF-8 input, when the CLI reported one. */
  readonly byteOffset: number | null;
  readonly exitCode: number;
  readonly stderr: string;

  constructor(
    message: string,
    code: string | null,
    byteOffset: number | null,
    exitCode: number,
    stderr: string,
  ) {
    super(message);
    this.name = "LlmonCliError";
    this.code = code;
    this.byteOffset = byteOffset;
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

// The CLI prints "error: CODE: message" or "error: CODE at byte N: message".
const ERROR_LINE = /^error:\s+([A-Z][A-Z0-9_]*)(?:\s+at byte\s+(\d+))?:\s*(.*)$/m;

function toCliError(err: unknown): LlmonCliError {
  const e = err as {
    status?: number | null;
    stderr?: string | Buffer;
    message?: string;
  };
  const stderr =
    typeof e.stderr === "string" ? e.stderr : (e.stderr?.toString("utf8") ?? "");
  const match = ERROR_LINE.exec(stderr);
  if (match) {
    const offset = match[2] !== undefined ? Number(match[2]) : null;
    return new LlmonCliError(
      match[3] ?? "",
      match[1] ?? null,
      offset,
      e.status ?? -1,
      stderr,
    );
  }
  return new LlmonCliError(
    e.message ?? "llmon CLI failed",
    null,
    null,
    e.status ?? -1,
    stderr,
  );
}

interface RunResult {
  stdout: string;
  stderr: string;
  exitCode: number;
}

function run(args: string[], input: string, opts: RunOptions): RunResult {
  const cli = opts.cli ?? process.env["LLMON_CLI"] ?? "llmon";
  const argv = [...args];
  if (opts.registryPath !== undefined) {
    argv.push("--registry", opts.registryPath);
  }
  try {
    const stdout = execFileSync(cli, argv, {
      input,
      encoding: "utf8",
      maxBuffer: MAX_OUTPUT,
    });
    return { stdout, stderr: "", exitCode: 0 };
  } catch (err) {
    const e = err as { status?: number | null; stdout?: string | Buffer };
    const cliError = toCliError(err);
    // lint exits 1 when the report contains errors; the report itself is
    // still the data, not a failure. Only an "error:" line is a failure.
    if (e.status === 1 && cliError.code === null && cliError.stderr === "") {
      const stdout =
        typeof e.stdout === "string"
          ? e.stdout
          : (e.stdout?.toString("utf8") ?? "");
      return { stdout, stderr: "", exitCode: 1 };
    }
    throw cliError;
  }
}

/** Parse llmon or mrllmon text; returns the CLI's JSON tree unchanged. */
export function parseTreeJson(text: string, opts: ParseOptions = {}): string {
  const args = ["parse", "-"];
  if (opts.format !== undefined && opts.format !== "auto") {
    args.push("--format", CLI_FORMAT[opts.format]);
  }
  if (opts.strictLiterals) args.push("--strict-literals");
  if (opts.permissiveClose) args.push("--permissive-close");
  return run(args, text, opts).stdout;
}

/** Convert between llmon, mrllmon, and JSON; byte-identical to the CLI. */
export function convert(
  text: string,
  fromFormat: Format,
  toFormat: Format,
  opts: ConvertOptions = {},
): string {
  const args = [
    "convert",
    "-",
    "--from",
    CLI_FORMAT[fromFormat],
    "--to",
    CLI_FORMAT[toFormat],
  ];
  if (opts.style !== undefined) args.push("--style", opts.style);
  return run(args, text, opts).stdout;
}

/**
 * Lint a document; returns the CLI's JSON-lines report (empty string when
 * clean). Findings with error severity are report content, not exceptions.
 */
export function lintJson(text: string, opts: ParseOptions = {}): string {
  const args = ["lint", "-", "--json"];
  if (opts.format !== undefined && opts.format !== "auto") {
    args.push("--format", CLI_FORMAT[opts.format]);
  }
  return run(args, text, opts).stdout;
}

/** Tokenize mrllmon text; returns the CLI's JSON token array. */
export function tokenizeJson(text: string, opts: RunOptions = {}): string {
  return run(["tokenize", "-"], text, opts).stdout;
}

function collectTags(node: unknown, into: Set<string>): void {
  if (typeof node !== "object" || node === null) return;
  const n = node as Record<string, unknown>;
  if (typeof n["tag"] === "string") into.add(n["tag"]);
  for (const key of ["children", "elements"]) {
    const kids = n[key];
    if (Array.isArray(kids)) for (const k of kids) collectTags(k, into);
  }
  const items = n["items"];
  if (Array.isArray(items)) {
    for (const item of items) {
      collectTags((item as Record<string, unknown>)["value"], into);
    }
  }
}

/**
 * Compute the attention mask for mrllmon (or llmon) text; identical JSON
 * to `llmon mask`. When execRef is given, the document must contain that
 * exec span; a missing one raises DANGLING_REF before any mask runs.
 */
export function maskJson(
  text: string,
  execRef: string | null = null,
  policy: MaskPolicy | null = null,
  opts: RunOptions = {},
): string {
  if (execRef !== null) {
    const tree = JSON.parse(parseTreeJson(text, opts)) as { roots: unknown[] };
    const tags = new Set<string>();
    for (const root of tree.roots) collectTags(root, tags);
    if (!tags.has(execRef)) {
      throw new LlmonCliError(
        `no span ${execRef} in the document`,
        "DANGLING_REF",
        null,
        -1,
        "",
      );
    }
  }
  const args = ["mask", "-"];
  const p = policy ?? {};
  if (p.mode !== undefined) args.push("--mode", p.mode);
  if (p.scope !== undefined) args.push("--scope", p.scope);
  if (p.maskUnboundData) args.push("--mask-unbound-data");
  if (p.maskFreeText) args.push("--mask-free-text");
  for (const id of p.reject ?? []) args.push("--reject", String(id));
  if (p.matrix !== undefined) args.push("--matrix", String(p.matrix));
  return run(args, text, opts).stdout;
}
