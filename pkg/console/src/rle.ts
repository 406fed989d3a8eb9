// Run-length decoding of the service's reachability rows into a dense grid,
// plus the exact inverse for round-trip checks.

import { MapDocument, RleRun } from "./types.js";

export interface DecodedMap {
  cellsH: number;             // columns (h axis)
  cellsV: number;             // rows (v axis)
  hMin: number;
  vMin: number;
  cellSizeH: number;
  cellSizeV: number;
  version: number;
  reachable: Uint8Array;      // index v * cellsH + h (offsets from h_min/v_min)
}

export function decodeMap(doc: MapDocument): DecodedMap {
  const cellsH = doc.h_max - doc.h_min + 1;
  const cellsV = doc.v_max - doc.v_min + 1;
  if (doc.rows.length !== cellsV) {
    throw new Error(`expected ${cellsV} rows, got ${doc.rows.length}`);
  }
  const reachable = new Uint8Array(cellsH * cellsV);
  for (let v = 0; v < cellsV; v++) {
    let h = 0;
    for (const [len, value] of doc.rows[v]) {
      reachable.fill(value, v * cellsH + h, v * cellsH + h + len);
      h += len;
    }
    if (h !== cellsH) {
      throw new Error(`row ${v} covers ${h} of ${cellsH} cells`);
    }
  }
  return {
    cellsH,
    cellsV,
    hMin: doc.h_min,
    vMin: doc.v_min,
    cellSizeH: doc.cell_size_h,
    cellSizeV: doc.cell_size_v,
    version: doc.version,
    reachable,
  };
}

export function encodeMap(map: DecodedMap): MapDocument {
  const rows: RleRun[][] = [];
  for (let v = 0; v < map.cellsV; v++) {
    const runs: RleRun[] = [];
    let runValue = map.reachable[v * map.cellsH];
    let runLen = 1;
    for (let h = 1; h < map.cellsH; h++) {
      const value = map.reachable[v * map.cellsH + h];
      if (value === runValue) {
        runLen++;
      } else {
        runs.push([runLen, runValue]);
        runValue = value;
        runLen = 1;
      }
    }
    runs.push([runLen, runValue]);
    rows.push(runs);
  }
  return {
    version: map.version,
    cell_size_h: map.cellSizeH,
    cell_size_v: map.cellSizeV,
    h_min: map.hMin,
    h_max: map.hMin + map.cellsH - 1,
    v_min: map.vMin,
    v_max: map.vMin + map.cellsV - 1,
    rows,
  };
}

export function isReachable(map: DecodedMap, h: number, v: number): boolean {
  const col = h - map.hMin;
  const row = v - map.vMin;
  if (col < 0 || col >= map.cellsH || row < 0 || row >= map.cellsV) return false;
  return map.reachable[row * map.cellsH + col] === 1;
}
