import { readFileSync } from "node:fs";

/** Raised when an input file is missing or does not match its documented schema. */
export class SchemaMismatch extends Error {}

export interface Table {
  columns: string[];
  rows: number[][];
}

/**
 * Read one zetachain CSV artifact.  Leading `#` comment lines are skipped;
 * the first remaining line must equal the expected header exactly and every
 * cell of the required columns must parse as a finite number (empty cells
 * are allowed only outside the required columns, e.g. unmatched rows in
 * compare.csv).
 */
export function readCsv(path: string, expectedColumns: string[]): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SchemaMismatch(`cannot read ${path}`);
  }
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.length > 0 && !line.startsWith("#"));
  if (lines.length === 0) {
    throw new SchemaMismatch(`${path} has no header line`);
  }
  const header = lines[0].split(",");
  if (
    header.length !== expectedColumns.length ||
    header.some((h, i) => h !== expectedColumns[i])
  ) {
    throw new SchemaMismatch(
      `${path}: header "${lines[0]}" does not match "${expectedColumns.join(",")}"`,
    );
  }
  const rows: number[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== expectedColumns.length) {
      throw new SchemaMismatch(`${path}: row "${line}" has ${cells.length} cells`);
    }
    const parsed = cells.map((c) => (c === "" ? NaN : Number(c)));
    if (parsed.slice(0, 2).some((v) => !Number.isFinite(v))) {
      throw new SchemaMismatch(`${path}: non-numeric coordinates in "${line}"`);
    }
    rows.push(parsed);
  }
  return { columns: expectedColumns, rows };
}

export const RESONANCE_COLUMNS = ["re", "im", "residual", "newton_iters", "verified"];
export const CHAIN_COLUMNS = ["re", "im", "multiplicity", "k"];
export const ROOT_COLUMNS = ["re", "im", "multiplicity"];

/** Tiny argv reader: `--key value` pairs, repeatable keys collect. */
export function parseArgs(argv: string[]): Map<string, string[]> {
  const out = new Map<string, string[]>();
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new SchemaMismatch(`unexpected argument ${arg}`);
    }
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined) {
      throw new SchemaMismatch(`flag --${key} needs a value`);
    }
    i += 1;
    const bucket = out.get(key) ?? [];
    bucket.push(value);
    out.set(key, bucket);
  }
  return out;
}

export function requireOne(args: Map<string, string[]>, key: string): string {
  const vals = args.get(key);
  if (!vals || vals.length !== 1) {
    throw new SchemaMismatch(`expected exactly one --${key}`);
  }
  return vals[0];
}
