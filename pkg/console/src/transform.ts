// Map <-> screen transform. The map is fitted and centred in the canvas;
// the v axis points up the screen so driving forward moves the marker up.

import { DecodedMap } from "./rle.js";

export interface CellRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export class Viewport {
  readonly scale: number;      // pixels per cell
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    readonly map: DecodedMap,
    readonly canvasWidth: number,
    readonly canvasHeight: number,
  ) {
    this.scale = Math.min(canvasWidth / map.cellsH, canvasHeight / map.cellsV);
    this.offsetX = (canvasWidth - map.cellsH * this.scale) / 2;
    this.offsetY = (canvasHeight - map.cellsV * this.scale) / 2;
  }

  cellRect(h: number, v: number): CellRect {
    const col = h - this.map.hMin;
    const rowFromTop = this.map.cellsV - 1 - (v - this.map.vMin);
    return {
      x: this.offsetX + col * this.scale,
      y: this.offsetY + rowFromTop * this.scale,
      w: this.scale,
      h: this.scale,
    };
  }

  /** Cell under a canvas pixel, or null outside the map area. Boundary
   *  pixels resolve by floor, so a cell owns its top-left edge. */
  pixelToCell(px: number, py: number): [number, number] | null {
    const col = Math.floor((px - this.offsetX) / this.scale);
    const rowFromTop = Math.floor((py - this.offsetY) / this.scale);
    if (col < 0 || col >= this.map.cellsH ||
        rowFromTop < 0 || rowFromTop >= this.map.cellsV) {
      return null;
    }
    return [
      this.map.hMin + col,
      this.map.vMin + (this.map.cellsV - 1 - rowFromTop),
    ];
  }

  /** Continuous map coordinates (units) to canvas pixels. */
  worldToPixel(x: number, z: number): [number, number] {
    const col = x / this.map.cellSizeH - this.map.hMin;
    const row = z / this.map.cellSizeV - this.map.vMin;
    return [
      this.offsetX + col * this.scale,
      this.offsetY + (this.map.cellsV - row) * this.scale,
    ];
  }
}
