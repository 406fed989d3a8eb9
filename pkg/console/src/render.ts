// Canvas drawing. Everything draws through a minimal 2D-context interface
// so the scene can be rendered into a recording context in tests.

import { DecodedMap } from "./rle.js";
import { Viewport } from "./transform.js";

export interface Canvas2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
}

export const COLORS = {
  reachable: "#3a6fd8",     // blue field
  unreachable: "#e8c545",   // yellow blocks
  path: "#ffe066",
  axisX: "#d83a3a",         // red +x
  axisZ: "#3a3ad8",         // blue +z
  robot: "#ff3b30",
  heading: "#ffffff",
  expectedTrace: "#e8c545",
  realTrace: "#9ecbff",
};

/** Map field: reachable backdrop, unreachable runs, origin axes. Draws one
 *  rect per RLE run, so large maps stay cheap. */
export function renderMap(ctx: Canvas2D, map: DecodedMap, view: Viewport): void {
  ctx.fillStyle = COLORS.reachable;
  const origin = view.cellRect(map.hMin, map.vMin + map.cellsV - 1);
  ctx.fillRect(origin.x, origin.y, map.cellsH * view.scale, map.cellsV * view.scale);

  ctx.fillStyle = COLORS.unreachable;
  for (let row = 0; row < map.cellsV; row++) {
    let h = 0;
    while (h < map.cellsH) {
      if (map.reachable[row * map.cellsH + h] === 0) {
        let end = h;
        while (end < map.cellsH && map.reachable[row * map.cellsH + end] === 0) end++;
        const rect = view.cellRect(map.hMin + h, map.vMin + row);
        ctx.fillRect(rect.x, rect.y, (end - h) * view.scale, view.scale);
        h = end;
      } else {
        h++;
      }
    }
  }

  // robot origin axes
  const [ox, oy] = view.worldToPixel(0, 0);
  const axis = 3 * view.scale;
  ctx.lineWidth = 2;
  ctx.strokeStyle = COLORS.axisX;
  ctx.beginPath();
  ctx.moveTo(ox, oy);
  ctx.lineTo(ox + axis, oy);
  ctx.stroke();
  ctx.strokeStyle = COLORS.axisZ;
  ctx.beginPath();
  ctx.moveTo(ox, oy);
  ctx.lineTo(ox, oy - axis);
  ctx.stroke();
}

export function renderPath(ctx: Canvas2D, cells: [number, number][],
                           view: Viewport): void {
  ctx.fillStyle = COLORS.path;
  for (const [h, v] of cells) {
    const rect = view.cellRect(h, v);
    const inset = rect.w * 0.2;
    ctx.fillRect(rect.x + inset, rect.y + inset,
                 rect.w - 2 * inset, rect.h - 2 * inset);
  }
}

export function renderRobot(ctx: Canvas2D, x: number, z: number, theta: number,
                            view: Viewport): void {
  const [px, py] = view.worldToPixel(x, z);
  const radius = Math.max(3, view.scale * 0.6);
  ctx.fillStyle = COLORS.robot;
  ctx.beginPath();
  ctx.arc(px, py, radius, 0, 2 * Math.PI);
  ctx.fill();
  // heading arrow: theta 0 faces +z (up), positive toward +x (right)
  ctx.strokeStyle = COLORS.heading;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(px, py);
  ctx.lineTo(px + 2 * radius * Math.sin(theta), py - 2 * radius * Math.cos(theta));
  ctx.stroke();
}

export function renderTrace(ctx: Canvas2D, points: [number, number][],
                            color: string, view: Viewport): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.beginPath();
  const [x0, y0] = view.worldToPixel(points[0][0], points[0][1]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < points.length; i++) {
    const [x, y] = view.worldToPixel(points[i][0], points[i][1]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}
