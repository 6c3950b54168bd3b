import { writeFileSync } from "node:fs";

export type Marker = "cross" | "plus" | "dot" | "ring";

export interface Series {
  label: string;
  marker: Marker;
  color: string;
  points: Array<{ x: number; y: number; note?: string }>;
}

export interface PlotSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  width?: number;
  height?: number;
}

const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const raw = span / n;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 1) ?? mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(t);
  }
  return ticks;
}

function fmtTick(v: number): string {
  const rounded = Math.abs(v) < 1e-12 ? 0 : v;
  return Number(rounded.toPrecision(6)).toString();
}

function markerElement(marker: Marker, x: number, y: number, color: string): string {
  const cx = x.toFixed(2);
  const cy = y.toFixed(2);
  switch (marker) {
    case "cross":
      return (
        `<path class="datapoint" stroke="${color}" fill="none" ` +
        `d="M ${(x - 3.5).toFixed(2)} ${(y - 3.5).toFixed(2)} L ${(x + 3.5).toFixed(2)} ${(y + 3.5).toFixed(2)} ` +
        `M ${(x - 3.5).toFixed(2)} ${(y + 3.5).toFixed(2)} L ${(x + 3.5).toFixed(2)} ${(y - 3.5).toFixed(2)}"/>`
      );
    case "plus":
      return (
        `<path class="datapoint" stroke="${color}" fill="none" ` +
        `d="M ${(x - 4).toFixed(2)} ${cy} L ${(x + 4).toFixed(2)} ${cy} ` +
        `M ${cx} ${(y - 4).toFixed(2)} L ${cx} ${(y + 4).toFixed(2)}"/>`
      );
    case "ring":
      return `<circle class="datapoint" cx="${cx}" cy="${cy}" r="5" stroke="${color}" fill="none"/>`;
    case "dot":
      return `<circle class="datapoint" cx="${cx}" cy="${cy}" r="2.8" fill="${color}"/>`;
  }
}

/** Render a scatter plot; every input point emits one class="datapoint" node. */
export function renderScatter(spec: PlotSpec): string {
  const width = spec.width ?? 760;
  const height = spec.height ?? 520;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = spec.series.flatMap((s) => s.points.map((p) => p.y));
  let xLo = xs.length ? Math.min(...xs) : -1;
  let xHi = xs.length ? Math.max(...xs) : 1;
  let yLo = ys.length ? Math.min(...ys) : -1;
  let yHi = ys.length ? Math.max(...ys) : 1;
  if (xHi - xLo < 1e-12) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  if (yHi - yLo < 1e-12) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const padX = 0.05 * (xHi - xLo);
  const padY = 0.05 * (yHi - yLo);
  xLo -= padX;
  xHi += padX;
  yLo -= padY;
  yHi += padY;

  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) => MARGIN.top + ((yHi - v) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${spec.title}</text>`,
  );

  const axisColor = "#222";
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="${axisColor}"/>`,
  );
  parts.push(
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="${axisColor}"/>`,
  );
  for (const t of niceTicks(xLo, xHi)) {
    const px = sx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 5}" stroke="${axisColor}"/>`);
    parts.push(
      `<text x="${px.toFixed(2)}" y="${y0 + 18}" text-anchor="middle">${fmtTick(t)}</text>`,
    );
  }
  for (const t of niceTicks(yLo, yHi)) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 5}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="${axisColor}"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${height - 10}" text-anchor="middle">${spec.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`,
  );

  let legendY = MARGIN.top + 6;
  for (const series of spec.series) {
    for (const pt of series.points) {
      const px = sx(pt.x);
      const py = sy(pt.y);
      parts.push(markerElement(series.marker, px, py, series.color));
      if (pt.note) {
        parts.push(
          `<text class="annotation" x="${(px + 7).toFixed(2)}" y="${(py - 6).toFixed(2)}" ` +
          `fill="${series.color}">${pt.note}</text>`,
        );
      }
    }
    parts.push(
      `<g class="legend">${markerElement(series.marker, x0 + plotW - 110, legendY, series.color).replace('class="datapoint"', 'class="legend-marker"')}` +
      `<text x="${x0 + plotW - 100}" y="${legendY + 4}">${series.label}</text></g>`,
    );
    legendY += 18;
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function writeSvg(path: string, spec: PlotSpec): void {
  writeFileSync(path, renderScatter(spec) + "\n");
}

export const SERIES_COLORS = ["#1464c8", "#c83232", "#2a8a2a", "#8a2aa0"];
export const SERIES_MARKERS: Marker[] = ["cross", "plus", "dot"];
