/** Scene -> SVG string.  Pure string building: identical scenes give
 * byte-identical files (fixed number formatting, no ids, no timestamps). */

import { Primitive, RGB, Scene } from "./scene";

function px(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}

function col(c: RGB): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function pointsAttr(points: Array<[number, number]>): string {
  return points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
}

function element(p: Primitive): string {
  switch (p.kind) {
    case "polyline": {
      const dash = p.dashed ? ` stroke-dasharray="6,4"` : "";
      return `<polyline points="${pointsAttr(p.points)}" fill="none" stroke="${col(p.color)}" stroke-width="${px(p.width)}"${dash}/>`;
    }
    case "polygon":
      return `<polygon points="${pointsAttr(p.points)}" fill="${col(p.fill)}" fill-opacity="${px(p.opacity)}" stroke="none"/>`;
    case "rect":
      return `<rect x="${px(p.x)}" y="${px(p.y)}" width="${px(p.w)}" height="${px(p.h)}" fill="${col(p.fill)}" fill-opacity="${px(p.opacity)}"/>`;
    case "text": {
      const anchor = p.anchor === "start" ? "start" : p.anchor === "end" ? "end" : "middle";
      const esc = p.text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
      return `<text x="${px(p.x)}" y="${px(p.y)}" font-family="monospace" font-size="${px(p.size)}" fill="${col(p.color)}" text-anchor="${anchor}">${esc}</text>`;
    }
  }
}

export function renderSvg(scene: Scene): string {
  const body = scene.prims.map(element).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n` +
    `<rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="${col(scene.background)}"/>\n` +
    body +
    `\n</svg>\n`
  );
}
