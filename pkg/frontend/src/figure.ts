/**
 * Bubble-chart rendering of sweep aggregates as standalone SVG.
 *
 * Encoding contract:
 *   x      timestep, labeled "expected important interactions per agent"
 *   y      surviving fraction, clamped to [0, 1]
 *   color  one series per density, on an orange-to-blue ramp ordered by d
 *   area   bubble AREA proportional to mean active group size, with a
 *          fixed reference bubble for size 100 in the legend
 * The legend shows cost values whenever more than one cost is present.
 */

import { AggregateRow } from "./csv.js";

export interface FigureSpec {
  /** Already-loaded rows, one array per input file (one panel each). */
  panels: AggregateRow[][];
  /** Panel titles, parallel to panels (defaults to preset names). */
  titles?: string[];
  /** Keep only rows whose preset column equals this (empty = keep all). */
  preset?: string;
  /** Pixels of bubble radius for the reference group size. */
  bubbleScale?: number;
  /** Group size drawn as the legend's reference bubble. */
  referenceSize?: number;
}

export class SelectionError extends Error {}

const PANEL_W = 560;
const PANEL_H = 420;
const MARGIN = { top: 44, right: 168, bottom: 56, left: 64 };
const MAX_BUBBLES_PER_SERIES = 25;
const X_LABEL = "expected important interactions per agent";
const Y_LABEL = "surviving fraction";

/** Orange-to-blue ramp; t in [0, 1] maps low density to orange, high to blue. */
export function densityColor(t: number): string {
  const lo = [230, 97, 1]; // orange
  const hi = [5, 113, 176]; // blue
  const mix = lo.map((a, i) => Math.round(a + (hi[i] - a) * t));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

export function bubbleRadius(
  meanSize: number,
  referenceSize: number,
  bubbleScale: number,
): number {
  // Area, not radius, carries the magnitude.
  return bubbleScale * Math.sqrt(Math.max(meanSize, 0) / referenceSize);
}

const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const fmt = (v: number) => (Math.abs(v) >= 1000 ? v.toPrecision(4) : `${+v.toPrecision(4)}`);

interface Series {
  d: number;
  c: number;
  color: string;
  rows: AggregateRow[];
}

function buildSeries(rows: AggregateRow[]): Series[] {
  const keyed = new Map<string, AggregateRow[]>();
  for (const r of rows) {
    const key = `${r.d}|${r.c}`;
    (keyed.get(key) ?? keyed.set(key, []).get(key)!).push(r);
  }
  const densities = [...new Set(rows.map((r) => r.d))].sort((a, b) => a - b);
  const span = Math.max(densities[densities.length - 1] - densities[0], 1e-12);
  return [...keyed.values()]
    .map((group) => {
      group.sort((a, b) => a.timestep - b.timestep);
      const { d, c } = group[0];
      return { d, c, color: densityColor((d - densities[0]) / span), rows: group };
    })
    .sort((a, b) => a.d - b.d || a.c - b.c);
}

function renderPanel(
  rows: AggregateRow[],
  title: string,
  x0: number,
  bubbleScale: number,
  referenceSize: number,
): string {
  const series = buildSeries(rows);
  const multiCost = new Set(rows.map((r) => r.c)).size > 1;
  const tMax = Math.max(...rows.map((r) => r.timestep), 1);

  const left = x0 + MARGIN.left;
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const sx = (t: number) => left + (t / tMax) * plotW;
  const sy = (f: number) => MARGIN.top + (1 - clamp01(f)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<text x="${left + plotW / 2}" y="${MARGIN.top - 18}" text-anchor="middle" font-size="15" font-weight="bold">${esc(title)}</text>`,
  );

  // Axes, gridlines, ticks.
  for (const f of [0, 0.25, 0.5, 0.75, 1]) {
    const y = sy(f);
    parts.push(
      `<line x1="${left}" y1="${y}" x2="${left + plotW}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${left - 8}" y="${y + 4}" text-anchor="end" font-size="11">${f}</text>`,
    );
  }
  const xTicks = 5;
  for (let i = 0; i <= xTicks; i++) {
    const t = (tMax * i) / xTicks;
    parts.push(
      `<line x1="${sx(t)}" y1="${sy(0)}" x2="${sx(t)}" y2="${sy(0) + 5}" stroke="#333"/>`,
      `<text x="${sx(t)}" y="${sy(0) + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${left}" y1="${sy(1)}" x2="${left}" y2="${sy(0)}" stroke="#333"/>`,
    `<line x1="${left}" y1="${sy(0)}" x2="${left + plotW}" y2="${sy(0)}" stroke="#333"/>`,
    `<text x="${left + plotW / 2}" y="${PANEL_H - 14}" text-anchor="middle" font-size="12">${esc(X_LABEL)}</text>`,
    `<text x="${x0 + 16}" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 ${x0 + 16} ${MARGIN.top + plotH / 2})">${esc(Y_LABEL)}</text>`,
  );

  for (const s of series) {
    const pts = s.rows.map((r) => `${sx(r.timestep)},${sy(r.surviving_fraction)}`);
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`,
    );
    const stride = Math.max(1, Math.ceil(s.rows.length / MAX_BUBBLES_PER_SERIES));
    for (let i = 0; i < s.rows.length; i += stride) {
      const r = s.rows[i];
      const radius = bubbleRadius(r.mean_active_size, referenceSize, bubbleScale);
      parts.push(
        `<circle cx="${sx(r.timestep)}" cy="${sy(r.surviving_fraction)}" r="${radius.toFixed(2)}" fill="${s.color}" fill-opacity="0.35" stroke="${s.color}"/>`,
      );
    }
  }

  // Legend: one swatch per series, plus the reference bubble.
  const lx = left + plotW + 18;
  let ly = MARGIN.top + 6;
  parts.push(
    `<text x="${lx}" y="${ly - 12}" font-size="11" font-weight="bold">density${multiCost ? " / cost" : ""}</text>`,
  );
  for (const s of series) {
    const label = multiCost ? `d=${fmt(s.d)}, c=${fmt(s.c)}` : `d=${fmt(s.d)}`;
    parts.push(
      `<circle cx="${lx + 6}" cy="${ly}" r="5" fill="${s.color}"/>`,
      `<text x="${lx + 16}" y="${ly + 4}" font-size="11">${esc(label)}</text>`,
    );
    ly += 18;
  }
  const refR = bubbleRadius(referenceSize, referenceSize, bubbleScale);
  ly += refR + 10;
  parts.push(
    `<circle cx="${lx + 6}" cy="${ly}" r="${refR.toFixed(2)}" fill="none" stroke="#333"/>`,
    `<text x="${lx + 6 + refR + 6}" y="${ly + 4}" font-size="11">size ${referenceSize}</text>`,
  );
  return parts.join("\n");
}

/** Render the figure as a complete standalone SVG document. */
export function renderSvg(spec: FigureSpec): string {
  const preset = spec.preset ?? "";
  const panels = spec.panels.map((rows) =>
    preset ? rows.filter((r) => r.preset === preset) : rows,
  );
  panels.forEach((rows, i) => {
    if (rows.length === 0) {
      const cause = preset
        ? `no rows with preset "${preset}"`
        : "no data rows";
      throw new SelectionError(`input ${i + 1}: ${cause}`);
    }
  });
  const titles = panels.map(
    (rows, i) => spec.titles?.[i] ?? rows[0].preset ?? `panel ${i + 1}`,
  );
  const bubbleScale = spec.bubbleScale ?? 9;
  const referenceSize = spec.referenceSize ?? 100;
  const width = PANEL_W * panels.length;
  const body = panels
    .map((rows, i) => renderPanel(rows, titles[i], PANEL_W * i, bubbleScale, referenceSize))
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_H}" viewBox="0 0 ${width} ${PANEL_H}" font-family="sans-serif">`,
    `<rect width="${width}" height="${PANEL_H}" fill="white"/>`,
    body,
    `</svg>`,
  ].join("\n");
}
