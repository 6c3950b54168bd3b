import { parseArgs, readCsv, requireOne, ROOT_COLUMNS, SchemaMismatch } from "./csv.js";
import { writeSvg } from "./svg.js";

/** Raised when a polynomial root sits at the origin, where -log(z) blows up. */
export class RootAtZero extends Error {}

/**
 * Polynomial roots on a negative logarithmic scale: each root z is plotted
 * at -log(z) = (-ln|z|, -arg(z)); multiple roots carry a "xM" annotation.
 *
 *   node dist/plot-roots-log.js --input roots.csv --output out.svg
 */
export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const input = requireOne(args, "input");
  const output = requireOne(args, "output");

  const table = readCsv(input, ROOT_COLUMNS);
  const points = table.rows.map((r) => {
    const mag = Math.hypot(r[0], r[1]);
    if (mag === 0) {
      throw new RootAtZero("polynomial root at z = 0 has no logarithm");
    }
    const mult = r[2];
    return {
      x: -Math.log(mag),
      y: -Math.atan2(r[1], r[0]),
      note: mult > 1 ? `x${mult}` : undefined,
    };
  });

  writeSvg(output, {
    title: "Polynomial roots, negative logarithmic scale",
    xLabel: "-ln|z|",
    yLabel: "-arg(z)",
    series: [{ label: "-log(z)", marker: "dot", color: "#1464c8", points }],
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
    if (err instanceof RootAtZero) {
      console.error(`RootAtZero: ${err.message}`);
      return 2;
    }
    throw err;
  }
}
