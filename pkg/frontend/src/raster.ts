/** Scene -> RGBA raster.  Deliberately simple software drawing (thick
 * Bresenham lines, scanline polygons, bitmap glyphs); everything integer or
 * fixed arithmetic so output bytes never depend on the environment. */

import { GLYPH_H, GLYPH_W, glyph, textWidth } from "./font";
import { Primitive, RGB, Scene } from "./scene";

export class Raster {
  data: Uint8ClampedArray;

  constructor(public width: number, public height: number, background: RGB) {
    this.data = new Uint8ClampedArray(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data[4 * i] = background[0];
      this.data[4 * i + 1] = background[1];
      this.data[4 * i + 2] = background[2];
      this.data[4 * i + 3] = 255;
    }
  }

  blend(x: number, y: number, c: RGB, alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 4 * (y * this.width + x);
    this.data[i] = this.data[i] * (1 - alpha) + c[0] * alpha;
    this.data[i + 1] = this.data[i + 1] * (1 - alpha) + c[1] * alpha;
    this.data[i + 2] = this.data[i + 2] * (1 - alpha) + c[2] * alpha;
  }

  disc(cx: number, cy: number, r: number, c: RGB, alpha: number): void {
    const ir = Math.ceil(r);
    for (let dy = -ir; dy <= ir; dy++) {
      for (let dx = -ir; dx <= ir; dx++) {
        if (dx * dx + dy * dy <= r * r) this.blend(cx + dx, cy + dy, c, alpha);
      }
    }
  }

  segment(x0: number, y0: number, x1: number, y1: number, c: RGB, width: number): void {
    const r = Math.max(0.5, width / 2);
    let ix0 = Math.round(x0);
    let iy0 = Math.round(y0);
    const ix1 = Math.round(x1);
    const iy1 = Math.round(y1);
    const dx = Math.abs(ix1 - ix0);
    const dy = -Math.abs(iy1 - iy0);
    const sx = ix0 < ix1 ? 1 : -1;
    const sy = iy0 < iy1 ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.disc(ix0, iy0, r, c, 1.0);
      if (ix0 === ix1 && iy0 === iy1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ix0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        iy0 += sy;
      }
    }
  }

  polyline(points: Array<[number, number]>, c: RGB, width: number, dashed: boolean): void {
    for (let i = 1; i < points.length; i++) {
      const [x0, y0] = points[i - 1];
      const [x1, y1] = points[i];
      if (!dashed) {
        this.segment(x0, y0, x1, y1, c, width);
        continue;
      }
      const len = Math.hypot(x1 - x0, y1 - y0);
      const step = 10;
      const n = Math.max(1, Math.floor(len / step));
      for (let k = 0; k < n; k++) {
        const t0 = k / n;
        const t1 = (k + 0.6) / n;
        this.segment(
          x0 + (x1 - x0) * t0,
          y0 + (y1 - y0) * t0,
          x0 + (x1 - x0) * Math.min(t1, 1),
          y0 + (y1 - y0) * Math.min(t1, 1),
          c,
          width,
        );
      }
    }
  }

  fillPolygon(points: Array<[number, number]>, c: RGB, opacity: number): void {
    const ys = points.map((p) => p[1]);
    const yMin = Math.max(0, Math.floor(Math.min(...ys)));
    const yMax = Math.min(this.height - 1, Math.ceil(Math.max(...ys)));
    for (let y = yMin; y <= yMax; y++) {
      const xs: number[] = [];
      const cy = y + 0.5;
      for (let i = 0; i < points.length; i++) {
        const [x0, y0] = points[i];
        const [x1, y1] = points[(i + 1) % points.length];
        if (y0 <= cy !== y1 <= cy) {
          xs.push(x0 + ((cy - y0) / (y1 - y0)) * (x1 - x0));
        }
      }
      xs.sort((a, b) => a - b);
      for (let i = 0; i + 1 < xs.length; i += 2) {
        const xa = Math.max(0, Math.round(xs[i]));
        const xb = Math.min(this.width - 1, Math.round(xs[i + 1]));
        for (let x = xa; x <= xb; x++) this.blend(x, y, c, opacity);
      }
    }
  }

  fillRect(x: number, y: number, w: number, h: number, c: RGB, opacity: number): void {
    const xa = Math.max(0, Math.round(x));
    const ya = Math.max(0, Math.round(y));
    const xb = Math.min(this.width - 1, Math.round(x + w) - 1);
    const yb = Math.min(this.height - 1, Math.round(y + h) - 1);
    for (let yy = ya; yy <= yb; yy++) {
      for (let xx = xa; xx <= xb; xx++) this.blend(xx, yy, c, opacity);
    }
  }

  text(x: number, y: number, s: string, c: RGB, size: number, anchor: "start" | "middle" | "end"): void {
    const scale = Math.max(1, Math.round(size / GLYPH_H));
    const advance = (GLYPH_W + 1) * scale;
    const total = textWidth(s, GLYPH_H * scale);
    let cx = Math.round(anchor === "start" ? x : anchor === "end" ? x - total : x - total / 2);
    const top = Math.round(y - GLYPH_H * scale);
    for (const ch of s) {
      const rows = glyph(ch);
      for (let r = 0; r < GLYPH_H; r++) {
        for (let b = 0; b < GLYPH_W; b++) {
          if ((rows[r] >> (GLYPH_W - 1 - b)) & 1) {
            this.fillRect(cx + b * scale, top + r * scale, scale, scale, c, 1.0);
          }
        }
      }
      cx += advance;
    }
  }
}

export function rasterize(scene: Scene): Raster {
  const r = new Raster(scene.width, scene.height, scene.background);
  for (const p of scene.prims as Primitive[]) {
    switch (p.kind) {
      case "polyline":
        r.polyline(p.points, p.color, p.width, Boolean(p.dashed));
        break;
      case "polygon":
        r.fillPolygon(p.points, p.fill, p.opacity);
        break;
      case "rect":
        r.fillRect(p.x, p.y, p.w, p.h, p.fill, p.opacity);
        break;
      case "text":
        r.text(p.x, p.y, p.text, p.color, p.size, p.anchor);
        break;
    }
  }
  return r;
}
