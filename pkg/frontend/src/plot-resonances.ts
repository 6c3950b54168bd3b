import { basename } from "node:path";
import { parseArgs, readCsv, requireOne, RESONANCE_COLUMNS, SchemaMismatch } from "./csv.js";
import { Series, SERIES_COLORS, SERIES_MARKERS, writeSvg } from "./svg.js";

/**
 * Scatter of resonance positions, one marker style per input CSV.
 *
 *   node dist/plot-resonances.js --input a/resonances.csv [--input b/...] --output out.svg
 */
export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const inputs = args.get("input") ?? [];
  if (inputs.length === 0) {
    throw new SchemaMismatch("need at least one --input resonances.csv");
  }
  const output = requireOne(args, "output");

  const series: Series[] = inputs.map((path, i) => {
    const table = readCsv(path, RESONANCE_COLUMNS);
    return {
      label: basename(path, ".csv") + (inputs.length > 1 ? ` [${i}]` : ""),
      marker: SERIES_MARKERS[i % SERIES_MARKERS.length],
      color: SERIES_COLORS[i % SERIES_COLORS.length],
      points: table.rows.map((r) => ({ x: r[0], y: r[1] })),
    };
  });

  writeSvg(output, {
    title: "Resonance spectrum",
    xLabel: "Re(s)",
    yLabel: "Im(s)",
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
