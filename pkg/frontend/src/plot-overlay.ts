import { basename } from "node:path";
import {
  CHAIN_COLUMNS,
  parseArgs,
  readCsv,
  requireOne,
  RESONANCE_COLUMNS,
  SchemaMismatch,
} from "./csv.js";
import { Series, SERIES_COLORS, SERIES_MARKERS, writeSvg } from "./svg.js";

/**
 * Rescaled resonances overlaid with chain lattice points (hollow circles).
 *
 *   node dist/plot-overlay.js --input res.csv --ell 12 --chains chains.csv --output out.svg
 *
 * One --ell per --input (or a single --ell applied to all); chain points are
 * already in rescaled coordinates.
 */
export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const inputs = args.get("input") ?? [];
  if (inputs.length === 0) {
    throw new SchemaMismatch("need at least one --input resonances.csv");
  }
  const ells = (args.get("ell") ?? []).map(Number);
  if (ells.some((v) => !Number.isFinite(v) || v <= 0)) {
    throw new SchemaMismatch("--ell values must be positive numbers");
  }
  if (ells.length !== 1 && ells.length !== inputs.length) {
    throw new SchemaMismatch("give one --ell per --input, or a single --ell");
  }
  const chainsPath = requireOne(args, "chains");
  const output = requireOne(args, "output");

  const series: Series[] = inputs.map((path, i) => {
    const ell = ells.length === 1 ? ells[0] : ells[i];
    const table = readCsv(path, RESONANCE_COLUMNS);
    return {
      label: `${basename(path, ".csv")} (ell=${ell})`,
      marker: SERIES_MARKERS[i % SERIES_MARKERS.length],
      color: SERIES_COLORS[i % SERIES_COLORS.length],
      points: table.rows.map((r) => ({ x: r[0] * ell, y: r[1] * ell })),
    };
  });
  const chainTable = readCsv(chainsPath, CHAIN_COLUMNS);
  series.push({
    label: "chain lattice",
    marker: "ring",
    color: "#2a8a2a",
    points: chainTable.rows.map((r) => ({ x: r[0], y: r[1] })),
  });

  writeSvg(output, {
    title: "Rescaled resonances against the chain lattice",
    xLabel: "Re(s) * ell",
    yLabel: "Im(s) * ell",
    series,
  });
  return 0;
}

process.exit(run());

function run(): number {
  try {
    return main(process.argv.slice(2));
  } catch (err) {
    if (err instanceof SchemaMismatch) {
      console.error(`SchemaMismatch: ${err.message}`);
      return 2;
    }
    throw err;
  }
}
