// Recording 2D context: captures draw calls as strings so scenes can be
// asserted and snapshotted without a browser canvas.

import { Canvas2D } from "../src/render.js";

function fmt(n: number): string {
  return (Math.round(n * 1000) / 1000).toString();
}

export class RecordingCtx implements Canvas2D {
  ops: string[] = [];
  private _fillStyle = "";
  private _strokeStyle = "";
  private _lineWidth = 1;

  get fillStyle(): string { return this._fillStyle; }
  set fillStyle(v: string) { this._fillStyle = v; this.ops.push(`fillStyle=${v}`); }
  get strokeStyle(): string { return this._strokeStyle; }
  set strokeStyle(v: string) { this._strokeStyle = v; this.ops.push(`strokeStyle=${v}`); }
  get lineWidth(): number { return this._lineWidth; }
  set lineWidth(v: number) { this._lineWidth = v; this.ops.push(`lineWidth=${v}`); }

  fillRect(x: number, y: number, w: number, h: number): void {
    this.ops.push(`fillRect(${fmt(x)},${fmt(y)},${fmt(w)},${fmt(h)})`);
  }
  clearRect(x: number, y: number, w: number, h: number): void {
    this.ops.push(`clearRect(${fmt(x)},${fmt(y)},${fmt(w)},${fmt(h)})`);
  }
  beginPath(): void { this.ops.push("beginPath()"); }
  moveTo(x: number, y: number): void { this.ops.push(`moveTo(${fmt(x)},${fmt(y)})`); }
  lineTo(x: number, y: number): void { this.ops.push(`lineTo(${fmt(x)},${fmt(y)})`); }
  stroke(): void { this.ops.push("stroke()"); }
  arc(x: number, y: number, r: number, a0: number, a1: number): void {
    this.ops.push(`arc(${fmt(x)},${fmt(y)},${fmt(r)},${fmt(a0)},${fmt(a1)})`);
  }
  fill(): void { this.ops.push("fill()"); }
}

export function checkerboardDoc(size = 4) {
  const rows = [];
  for (let v = 0; v < size; v++) {
    const runs = [];
    for (let h = 0; h < size; h++) {
      runs.push([1, (h + v) % 2] as [number, number]);
    }
    rows.push(runs);
  }
  return {
    version: 1,
    cell_size_h: 0.02,
    cell_size_v: 0.02,
    h_min: 0,
    h_max: size - 1,
    v_min: 0,
    v_max: size - 1,
    rows,
  };
}
