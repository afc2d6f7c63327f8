import type { TrajectoryPayload } from "./types.js";
import { escapeHtml } from "./render.js";

/** SVG line chart of glucose trajectories with an optional shaded band. */

export interface ChartOptions {
  width?: number;
  height?: number;
  band?: [number, number]; // e.g. the time-in-range band
  title?: string;
}

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const PAD = { left: 46, right: 12, top: 10, bottom: 30 };

export interface ChartModel {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  /** per-series pixel-space points, same order as the input */
  points: { label: string; color: string; path: [number, number][] }[];
}

export function chartModel(
  series: TrajectoryPayload[],
  width: number,
  height: number,
  band?: [number, number],
): ChartModel {
  if (series.length === 0) throw new Error("no trajectories to chart");
  const xs = series.flatMap((s) => s.t_min);
  const ys = series.flatMap((s) => s.glucose);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys, band ? band[0] : Infinity);
  let yMax = Math.max(...ys, band ? band[1] : -Infinity);
  const margin = Math.max(5, 0.05 * (yMax - yMin));
  yMin -= margin;
  yMax += margin;
  const sx = (x: number) =>
    PAD.left + ((x - xMin) / Math.max(xMax - xMin, 1e-9)) * (width - PAD.left - PAD.right);
  const sy = (y: number) =>
    height - PAD.bottom - ((y - yMin) / Math.max(yMax - yMin, 1e-9)) * (height - PAD.top - PAD.bottom);
  return {
    xMin,
    xMax,
    yMin,
    yMax,
    points: series.map((s, i) => ({
      label: s.label,
      color: COLORS[i % COLORS.length],
      path: s.t_min.map((t, k) => [sx(t), sy(s.glucose[k])] as [number, number]),
    })),
  };
}

export function lineChartSvg(series: TrajectoryPayload[], opts: ChartOptions = {}): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 360;
  const model = chartModel(series, width, height, opts.band);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" role="img">`,
  );
  if (opts.band) {
    const sy = (y: number) =>
      height - PAD.bottom -
      ((y - model.yMin) / (model.yMax - model.yMin)) * (height - PAD.top - PAD.bottom);
    const top = sy(opts.band[1]);
    parts.push(
      `<rect class="tir-band" x="${PAD.left}" y="${top.toFixed(1)}" ` +
        `width="${width - PAD.left - PAD.right}" height="${(sy(opts.band[0]) - top).toFixed(1)}" ` +
        `fill="#2ca02c" opacity="0.12"/>`,
    );
  }
  for (const s of model.points) {
    const pts = s.path.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
    parts.push(
      `<polyline data-label="${escapeHtml(s.label)}" points="${pts}" ` +
        `fill="none" stroke="${s.color}" stroke-width="2"/>`,
    );
  }
  // axes
  parts.push(
    `<line x1="${PAD.left}" y1="${height - PAD.bottom}" x2="${width - PAD.right}" ` +
      `y2="${height - PAD.bottom}" stroke="#888"/>`,
    `<line x1="${PAD.left}" y1="${PAD.top}" x2="${PAD.left}" y2="${height - PAD.bottom}" stroke="#888"/>`,
    `<text x="${width / 2}" y="${height - 6}" text-anchor="middle" font-size="11">minutes</text>`,
    `<text x="12" y="${height / 2}" font-size="11" transform="rotate(-90 12 ${height / 2})" ` +
      `text-anchor="middle">mg/dL</text>`,
  );
  // y-axis extremes
  parts.push(
    `<text x="${PAD.left - 4}" y="${PAD.top + 8}" text-anchor="end" font-size="10">${model.yMax.toFixed(0)}</text>`,
    `<text x="${PAD.left - 4}" y="${height - PAD.bottom}" text-anchor="end" font-size="10">${model.yMin.toFixed(0)}</text>`,
  );
  parts.push("</svg>");
  return parts.join("");
}

export function legendHtml(series: TrajectoryPayload[]): string {
  const items = series
    .map(
      (s, i) =>
        `<span class="legend-item"><span class="swatch" style="background:${COLORS[i % COLORS.length]}"></span>${escapeHtml(s.label)}</span>`,
    )
    .join(" ");
  return `<div class="legend">${items}</div>`;
}
