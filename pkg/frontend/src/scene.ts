/** Backend-independent figure description.
 *
 * Figures are built once as a list of primitives in pixel coordinates; the
 * SVG writer serializes them as elements and the rasterizer draws them into
 * an RGBA buffer for PNG output.  Keeping one scene for both backends is what
 * makes the two outputs trivially consistent and byte-stable.
 */

export type RGB = [number, number, number];

export interface Polyline {
  kind: "polyline";
  points: Array<[number, number]>;
  color: RGB;
  width: number;
  dashed?: boolean;
}

export interface Polygon {
  kind: "polygon";
  points: Array<[number, number]>;
  fill: RGB;
  opacity: number;
}

export interface RectPrim {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill: RGB;
  opacity: number;
}

export interface TextPrim {
  kind: "text";
  x: number;
  y: number; // baseline
  text: string;
  color: RGB;
  size: number; // pixel height of glyphs
  anchor: "start" | "middle" | "end";
}

export type Primitive = Polyline | Polygon | RectPrim | TextPrim;

export interface Scene {
  width: number;
  height: number;
  background: RGB;
  prims: Primitive[];
}

export const PALETTE: RGB[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
  [127, 127, 127],
];

export const BLACK: RGB = [0, 0, 0];
export const GREY: RGB = [110, 110, 110];
export const WHITE: RGB = [255, 255, 255];

export function newScene(width: number, height: number): Scene {
  return { width, height, background: WHITE, prims: [] };
}

export function line(scene: Scene, points: Array<[number, number]>, color: RGB, width = 1.5, dashed = false): void {
  scene.prims.push({ kind: "polyline", points, color, width, dashed });
}

export function polygon(scene: Scene, points: Array<[number, number]>, fill: RGB, opacity = 0.45): void {
  scene.prims.push({ kind: "polygon", points, fill, opacity });
}

export function rect(scene: Scene, x: number, y: number, w: number, h: number, fill: RGB, opacity = 1.0): void {
  scene.prims.push({ kind: "rect", x, y, w, h, fill, opacity });
}

export function text(
  scene: Scene,
  x: number,
  y: number,
  content: string,
  color: RGB = BLACK,
  size = 11,
  anchor: "start" | "middle" | "end" = "start",
): void {
  scene.prims.push({ kind: "text", x, y, text: content, color, size, anchor });
}
