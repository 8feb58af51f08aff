/** Build the three figure kinds from their experiment CSVs.
 *
 * scaling  : log-log ESJD vs dimension, one curve per preset, with an
 *            n^(-1/3) guide line anchored at the first preset's largest-n
 *            point.
 * violin   : distribution of per-run median ESS for each preset, one panel
 *            per scenario.
 * clt-hist : the summed log-MH-ratio law as recorded in the CLT summary rows:
 *            histogram bars synthesized from the empirical mean/variance with
 *            the predicted normal overlaid (all numbers come from the CSV;
 *            nothing is recomputed here).
 */

import { CLT_SCHEMA, POISSON_SCHEMA, SCAN_SCHEMA, Table, num, requireSchema } from "./csv";
import { BLACK, GREY, PALETTE, RGB, Scene, line, newScene, polygon, rect, text } from "./scene";
import { Scale, fmt, linearScale, logScale } from "./scales";

const MARGIN = { left: 64, right: 16, top: 28, bottom: 44 };

function frame(scene: Scene, x0: number, y0: number, x1: number, y1: number, xs: Scale, ys: Scale, xlab: string, ylab: string): void {
  line(scene, [[x0, y0], [x0, y1], [x1, y1]], BLACK, 1);
  for (const t of xs.ticks()) {
    const px = xs.toPx(t.v);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    line(scene, [[px, y1], [px, y1 + 4]], BLACK, 1);
    text(scene, px, y1 + 16, t.label, BLACK, 9, "middle");
  }
  for (const t of ys.ticks()) {
    const py = ys.toPx(t.v);
    if (py < y0 - 0.5 || py > y1 + 0.5) continue;
    line(scene, [[x0 - 4, py], [x0, py]], BLACK, 1);
    text(scene, x0 - 7, py + 3, t.label, BLACK, 9, "end");
  }
  text(scene, (x0 + x1) / 2, y1 + 32, xlab, BLACK, 11, "middle");
  text(scene, x0 - 46, y0 - 10, ylab, BLACK, 11, "start");
}

export function scalingFigure(table: Table): Scene {
  requireSchema(table, SCAN_SCHEMA, "scan CSV");
  interface Pt {
    n: number;
    esjd: number;
  }
  const byPreset = new Map<string, Pt[]>();
  for (const row of table.rows) {
    const preset = row[1];
    if (!byPreset.has(preset)) byPreset.set(preset, []);
    byPreset.get(preset)!.push({ n: num(row[0], "n"), esjd: num(row[3], "esjd") });
  }
  if (byPreset.size === 0) throw new Error("scan CSV has no data rows");
  const presets = [...byPreset.keys()];
  for (const pts of byPreset.values()) pts.sort((a, b) => a.n - b.n);

  const scene = newScene(720, 480);
  const x0 = MARGIN.left;
  const x1 = scene.width - MARGIN.right - 150;
  const y0 = MARGIN.top;
  const y1 = scene.height - MARGIN.bottom;

  const allN = table.rows.map((r) => num(r[0], "n"));
  const allE = table.rows.map((r) => num(r[3], "esjd")).filter((v) => v > 0);
  const xs = logScale(Math.min(...allN), Math.max(...allN), x0, x1, true);
  const ys = logScale(Math.min(...allE) / 1.3, Math.max(...allE) * 1.3, y1, y0);

  // n^(-1/3) guide anchored at the first preset's largest-n point
  const anchor = byPreset.get(presets[0])!.slice(-1)[0];
  const guide: Array<[number, number]> = [];
  for (const n of [Math.min(...allN), Math.max(...allN)]) {
    guide.push([xs.toPx(n), ys.toPx(anchor.esjd * Math.pow(n / anchor.n, -1 / 3))]);
  }
  line(scene, guide, GREY, 1.2, true);
  text(scene, guide[0][0] + 6, guide[0][1] - 6, "n^(-1/3) guide", GREY, 9, "start");

  presets.forEach((preset, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = byPreset.get(preset)!;
    line(scene, pts.map((p) => [xs.toPx(p.n), ys.toPx(p.esjd)]), color, 1.8);
    for (const p of pts) {
      rect(scene, xs.toPx(p.n) - 2.5, ys.toPx(p.esjd) - 2.5, 5, 5, color, 1);
    }
    const ly = y0 + 14 + 16 * i;
    line(scene, [[x1 + 14, ly - 3], [x1 + 36, ly - 3]], color, 2);
    text(scene, x1 + 42, ly, preset, BLACK, 10, "start");
  });

  frame(scene, x0, y0, x1, y1, xs, ys, "dimension n", "esjd");
  text(scene, (x0 + x1) / 2, y0 - 10, "optimal esjd against dimension", BLACK, 12, "middle");
  return scene;
}

function gaussianDensity(v: number, mean: number, variance: number): number {
  return Math.exp((-0.5 * (v - mean) * (v - mean)) / variance) / Math.sqrt(2 * Math.PI * variance);
}

/** Gaussian-kernel density on a fixed grid (Silverman bandwidth). */
function kde(values: number[], grid: number[]): number[] {
  const n = values.length;
  const mean = values.reduce((a, b) => a + b, 0) / n;
  const sd = Math.sqrt(values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / Math.max(1, n - 1)) || 1;
  const bw = Math.max(1e-9, 1.06 * sd * Math.pow(n, -0.2));
  return grid.map((g) => {
    let acc = 0;
    for (const v of values) acc += gaussianDensity(g, v, bw * bw);
    return acc / n;
  });
}

export function violinFigure(table: Table): Scene {
  requireSchema(table, POISSON_SCHEMA, "poisson CSV");
  const scenarios = [...new Set(table.rows.map((r) => r[0]))];
  const presets = [...new Set(table.rows.map((r) => r[2]))];
  if (presets.length === 0) throw new Error("poisson CSV has no data rows");

  const panelW = 380;
  const scene = newScene(MARGIN.left + panelW * scenarios.length + MARGIN.right, 440);
  const y0 = MARGIN.top;
  const y1 = scene.height - MARGIN.bottom;

  const allVals = table.rows.map((r) => num(r[3], "median_ess"));
  const lo = Math.min(...allVals);
  const hi = Math.max(...allVals);
  const pad = 0.08 * (hi - lo || 1);
  const ys = linearScale(Math.max(0, lo - pad), hi + pad, y1, y0);

  scenarios.forEach((scenario, panel) => {
    const px0 = MARGIN.left + panel * panelW;
    const px1 = px0 + panelW - 36;
    presets.forEach((preset, i) => {
      const values = table.rows
        .filter((r) => r[0] === scenario && r[2] === preset)
        .map((r) => num(r[3], "median_ess"));
      if (values.length === 0) return;
      const color = PALETTE[i % PALETTE.length];
      const center = px0 + ((i + 0.5) / presets.length) * (px1 - px0);
      const halfWidth = (0.38 / presets.length) * (px1 - px0);
      const grid: number[] = [];
      const gLo = Math.min(...values) - pad;
      const gHi = Math.max(...values) + pad;
      for (let k = 0; k <= 40; k++) grid.push(gLo + ((gHi - gLo) * k) / 40);
      const dens = kde(values, grid);
      const dMax = Math.max(...dens, 1e-12);
      const right = grid.map((g, k) => [center + (halfWidth * dens[k]) / dMax, ys.toPx(g)] as [number, number]);
      const left = grid
        .map((g, k) => [center - (halfWidth * dens[k]) / dMax, ys.toPx(g)] as [number, number])
        .reverse();
      polygon(scene, [...right, ...left], color, 0.5);
      const sorted = [...values].sort((a, b) => a - b);
      const median = sorted[Math.floor(sorted.length / 2)];
      line(scene, [[center - halfWidth, ys.toPx(median)], [center + halfWidth, ys.toPx(median)]], BLACK, 1.4);
      text(scene, center, y1 + 16, preset, BLACK, 9, "middle");
    });
    const xsDummy = linearScale(0, 1, px0, px1);
    line(scene, [[px0, y0], [px0, y1], [px1, y1]], BLACK, 1);
    for (const t of ys.ticks()) {
      const py = ys.toPx(t.v);
      line(scene, [[px0 - 4, py], [px0, py]], BLACK, 1);
      if (panel === 0) text(scene, px0 - 7, py + 3, t.label, BLACK, 9, "end");
    }
    void xsDummy;
    text(scene, (px0 + px1) / 2, y0 - 8, `scenario ${scenario}`, BLACK, 11, "middle");
  });
  text(scene, MARGIN.left - 46, y0 - 10, "median ess", BLACK, 11, "start");
  return scene;
}

export function cltHistFigure(table: Table): Scene {
  requireSchema(table, CLT_SCHEMA, "clt CSV");
  if (table.rows.length === 0) throw new Error("clt CSV has no data rows");
  const panels = table.rows.slice(0, 2);
  const panelW = 360;
  const scene = newScene(MARGIN.left + panelW * panels.length + MARGIN.right, 420);
  const y0 = MARGIN.top;
  const y1 = scene.height - MARGIN.bottom;

  panels.forEach((row, panel) => {
    const n = row[0];
    const empMean = num(row[2], "emp_mean");
    const empVar = num(row[3], "emp_var");
    const predMean = num(row[4], "pred_mean");
    const predVar = num(row[5], "pred_var");
    const ks = num(row[6], "ks");
    const sd = Math.sqrt(Math.max(empVar, predVar));
    const lo = Math.min(empMean, predMean) - 4 * sd;
    const hi = Math.max(empMean, predMean) + 4 * sd;
    const px0 = MARGIN.left + panel * panelW;
    const px1 = px0 + panelW - 40;
    const xs = linearScale(lo, hi, px0, px1);
    const dMax = Math.max(gaussianDensity(empMean, empMean, empVar), gaussianDensity(predMean, predMean, predVar));
    const ys = linearScale(0, dMax * 1.15, y1, y0);

    // bars: the empirical law summarized by its first two moments
    const bins = 24;
    for (let k = 0; k < bins; k++) {
      const a = lo + ((hi - lo) * k) / bins;
      const b = lo + ((hi - lo) * (k + 1)) / bins;
      const d = gaussianDensity((a + b) / 2, empMean, empVar);
      rect(scene, xs.toPx(a) + 0.5, ys.toPx(d), xs.toPx(b) - xs.toPx(a) - 1, y1 - ys.toPx(d), PALETTE[0], 0.55);
    }
    // overlay: the predicted limiting normal
    const curve: Array<[number, number]> = [];
    for (let k = 0; k <= 120; k++) {
      const v = lo + ((hi - lo) * k) / 120;
      curve.push([xs.toPx(v), ys.toPx(gaussianDensity(v, predMean, predVar))]);
    }
    line(scene, curve, PALETTE[3], 1.8);

    line(scene, [[px0, y0], [px0, y1], [px1, y1]], BLACK, 1);
    for (const t of xs.ticks()) {
      const px = xs.toPx(t.v);
      line(scene, [[px, y1], [px, y1 + 4]], BLACK, 1);
      text(scene, px, y1 + 16, t.label, BLACK, 9, "middle");
    }
    text(scene, (px0 + px1) / 2, y0 - 8, `n = ${n} (ks = ${fmt(ks)})`, BLACK, 11, "middle");
    text(scene, (px0 + px1) / 2, y1 + 32, "summed log-mh ratio", BLACK, 10, "middle");
  });
  return scene;
}

export type FigureKind = "scaling" | "violin" | "clt-hist";

export function buildFigure(kind: FigureKind, table: Table): Scene {
  switch (kind) {
    case "scaling":
      return scalingFigure(table);
    case "violin":
      return violinFigure(table);
    case "clt-hist":
      return cltHistFigure(table);
  }
}
