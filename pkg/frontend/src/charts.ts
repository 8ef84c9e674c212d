/** Hand-built SVG charts as plain strings.

Every number plotted comes straight from an API payload; these functions
only map values to pixels. String output keeps rendering testable without
a browser: tests assert on coordinates computed with the same scales.
*/

import type { ReportRow, SeriesBand } from "./types.js";

export const CHART_WIDTH = 560;
export const CHART_HEIGHT = 220;

const MARGIN = { left: 48, right: 12, top: 22, bottom: 28 };

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Linear domain->range map; a degenerate domain pins to the range midpoint. */
export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): (v: number) => number {
  const span = d1 - d0;
  if (span === 0) {
    const mid = (r0 + r1) / 2;
    return () => mid;
  }
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

function fmtTick(v: number): string {
  if (Math.abs(v) >= 1000) return v.toFixed(0);
  if (Number.isInteger(v)) return String(v);
  return v.toPrecision(3);
}

function frame(title: string, xLabel: string, yTicks: { y: number; v: number }[]): string {
  const innerRight = CHART_WIDTH - MARGIN.right;
  const innerBottom = CHART_HEIGHT - MARGIN.bottom;
  const ticks = yTicks
    .map(
      (t) =>
        `<line x1="${MARGIN.left - 4}" y1="${t.y}" x2="${innerRight}" y2="${t.y}" class="grid"/>` +
        `<text x="${MARGIN.left - 7}" y="${t.y + 3}" class="tick" text-anchor="end">${fmtTick(t.v)}</text>`,
    )
    .join("");
  return (
    `<text x="${MARGIN.left}" y="13" class="chart-title">${escapeXml(title)}</text>` +
    ticks +
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${innerBottom}" class="axis"/>` +
    `<line x1="${MARGIN.left}" y1="${innerBottom}" x2="${innerRight}" y2="${innerBottom}" class="axis"/>` +
    `<text x="${innerRight}" y="${CHART_HEIGHT - 8}" class="tick" text-anchor="end">${escapeXml(xLabel)}</text>`
  );
}

function svg(body: string): string {
  return (
    `<svg viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}" ` +
    `preserveAspectRatio="xMidYMid meet" role="img">` +
    body +
    `</svg>`
  );
}

export interface BandChartOptions {
  days: number[];
  band: SeriesBand;
  title: string;
  xLabel?: string;
}

/** Mean line inside its lower/upper band. A flat-zero series still renders:
the y-domain is forced to at least [0, 1]. */
export function bandChart(options: BandChartOptions): string {
  const { days, band, title } = options;
  if (days.length === 0) {
    return svg(`<text x="12" y="20" class="chart-title">${escapeXml(title)}: no days</text>`);
  }
  const yMax = Math.max(1, ...band.upper) * 1.05;
  const x = linearScale(days[0], days[days.length - 1], MARGIN.left, CHART_WIDTH - MARGIN.right);
  const y = linearScale(0, yMax, CHART_HEIGHT - MARGIN.bottom, MARGIN.top);

  const point = (d: number, v: number) => `${x(d).toFixed(2)},${y(v).toFixed(2)}`;
  const upperPts = days.map((d, i) => point(d, band.upper[i]));
  const lowerPts = days
    .slice()
    .reverse()
    .map((d, i) => point(d, band.lower[days.length - 1 - i]));
  const meanPts = days.map((d, i) => point(d, band.mean[i])).join(" ");

  const yTicks = [0, yMax / 2, yMax].map((v) => ({ y: y(v), v }));
  return svg(
    frame(title, "day", yTicks) +
      `<polygon class="series-band" points="${upperPts.concat(lowerPts).join(" ")}"/>` +
      `<polyline class="series-mean" fill="none" points="${meanPts}"/>`,
  );
}

export interface OverlayChartOptions {
  times: number[];
  observed: number[];
  simulated: number[];
  /** Annotation value straight from the API; only its position is derived. */
  maxGap: number;
  title: string;
}

function stepPath(
  times: number[],
  values: number[],
  x: (v: number) => number,
  y: (v: number) => number,
): string {
  let path = `M ${x(0).toFixed(2)} ${y(1).toFixed(2)}`;
  for (let i = 0; i < times.length; i++) {
    path += ` H ${x(times[i]).toFixed(2)} V ${y(values[i]).toFixed(2)}`;
  }
  return path;
}

/** Two right-continuous survival step curves on one grid, with the API's
max vertical gap annotated at the step where it occurs. */
export function survivalOverlay(options: OverlayChartOptions): string {
  const { times, observed, simulated, maxGap, title } = options;
  if (times.length === 0) {
    return svg(`<text x="12" y="20" class="chart-title">${escapeXml(title)}: no events</text>`);
  }
  const tMax = times[times.length - 1] * 1.02;
  const x = linearScale(0, tMax, MARGIN.left, CHART_WIDTH - MARGIN.right);
  const y = linearScale(0, 1, CHART_HEIGHT - MARGIN.bottom, MARGIN.top);

  let gapIndex = 0;
  for (let i = 1; i < times.length; i++) {
    if (
      Math.abs(observed[i] - simulated[i]) > Math.abs(observed[gapIndex] - simulated[gapIndex])
    ) {
      gapIndex = i;
    }
  }
  const gapX = x(times[gapIndex]).toFixed(2);
  const gapTop = y(Math.max(observed[gapIndex], simulated[gapIndex])).toFixed(2);
  const gapBottom = y(Math.min(observed[gapIndex], simulated[gapIndex])).toFixed(2);

  const yTicks = [0, 0.5, 1].map((v) => ({ y: y(v), v }));
  return svg(
    frame(title, "days", yTicks) +
      `<path class="km-observed" fill="none" d="${stepPath(times, observed, x, y)}"/>` +
      `<path class="km-simulated" fill="none" d="${stepPath(times, simulated, x, y)}"/>` +
      `<line class="km-gap" x1="${gapX}" y1="${gapTop}" x2="${gapX}" y2="${gapBottom}"/>` +
      `<text x="${CHART_WIDTH - MARGIN.right}" y="${MARGIN.top - 6}" class="annotation" ` +
      `text-anchor="end">max gap ${maxGap}</text>`,
  );
}

export interface HistogramOptions {
  binEdges: number[];
  observedDensity: number[];
  simulatedDensity: number[];
  title: string;
}

/** Two translucent density histograms on shared bins. */
export function densityHistogram(options: HistogramOptions): string {
  const { binEdges, observedDensity, simulatedDensity, title } = options;
  if (binEdges.length < 2) {
    return svg(`<text x="12" y="20" class="chart-title">${escapeXml(title)}: no bins</text>`);
  }
  const dMax = Math.max(1e-12, ...observedDensity, ...simulatedDensity) * 1.05;
  const x = linearScale(
    binEdges[0],
    binEdges[binEdges.length - 1],
    MARGIN.left,
    CHART_WIDTH - MARGIN.right,
  );
  const y = linearScale(0, dMax, CHART_HEIGHT - MARGIN.bottom, MARGIN.top);
  const baseline = CHART_HEIGHT - MARGIN.bottom;

  const bars = (densities: number[], cls: string): string =>
    densities
      .map((d, i) => {
        const x0 = x(binEdges[i]);
        const x1 = x(binEdges[i + 1]);
        const top = y(d);
        return (
          `<rect class="${cls}" x="${x0.toFixed(2)}" y="${top.toFixed(2)}" ` +
          `width="${(x1 - x0).toFixed(2)}" height="${(baseline - top).toFixed(2)}"/>`
        );
      })
      .join("");

  const yTicks = [0, dMax].map((v) => ({ y: y(v), v }));
  return svg(
    frame(title, "days", yTicks) +
      bars(observedDensity, "hist-observed") +
      bars(simulatedDensity, "hist-simulated"),
  );
}

/** Horizontal total-cost bars with CI whiskers, suggested row highlighted. */
export function costBars(rows: ReportRow[], suggestedLabel: string | null): string {
  if (rows.length === 0) {
    return svg(`<text x="12" y="20" class="chart-title">costs: no strategies</text>`);
  }
  const height = MARGIN.top + rows.length * 26 + MARGIN.bottom;
  const vMax = Math.max(1e-12, ...rows.map((r) => r.total_cost_ci_upper)) * 1.05;
  const x = linearScale(0, vMax, MARGIN.left + 70, CHART_WIDTH - MARGIN.right);

  const body = rows
    .map((row, i) => {
      const yMid = MARGIN.top + i * 26 + 13;
      const cls = row.label === suggestedLabel ? "cost-bar suggested" : "cost-bar";
      return (
        `<text x="${MARGIN.left + 62}" y="${yMid + 4}" class="tick" text-anchor="end">` +
        `${escapeXml(row.label)}</text>` +
        `<rect class="${cls}" x="${x(0).toFixed(2)}" y="${yMid - 8}" ` +
        `width="${(x(row.total_cost_mean) - x(0)).toFixed(2)}" height="16"/>` +
        `<line class="cost-ci" x1="${x(row.total_cost_ci_lower).toFixed(2)}" y1="${yMid}" ` +
        `x2="${x(row.total_cost_ci_upper).toFixed(2)}" y2="${yMid}"/>`
      );
    })
    .join("");

  return (
    `<svg viewBox="0 0 ${CHART_WIDTH} ${height}" preserveAspectRatio="xMidYMid meet" role="img">` +
    `<text x="${MARGIN.left}" y="13" class="chart-title">total cost by strategy</text>` +
    body +
    `</svg>`
  );
}
