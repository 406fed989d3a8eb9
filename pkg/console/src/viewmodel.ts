// Console state assembled from map documents, goal responses and stream
// events. The view model never talks to the network; main.ts feeds it.

import { DecodedMap, decodeMap, isReachable } from "./rle.js";
import { Canvas2D, renderMap, renderPath, renderRobot, renderTrace, COLORS } from "./render.js";
import { Viewport } from "./transform.js";
import { MapDocument, StreamEvent } from "./types.js";

export interface Marker {
  x: number;
  z: number;
  theta: number;
  t: number;
}

export const TRACE_CAP = 10000;

export class ConsoleViewModel {
  map: DecodedMap | null = null;
  pathCells: [number, number][] = [];
  marker: Marker | null = null;
  previousMarker: Marker | null = null;
  runState = "IDLE";
  phase = "IDLE";
  waypointIndex = -1;
  mapVersion = 0;
  lastEventT = -Infinity;
  lastSeq = 0;
  rmse: { x: number; z: number; track: number } | null = null;
  stale = false;
  expectedTrace: [number, number][] = [];
  realTrace: [number, number][] = [];

  applyMap(doc: MapDocument): void {
    this.map = decodeMap(doc);
    this.mapVersion = doc.version;
  }

  /** Install a planned path; every cell must be reachable on the map. */
  setPath(cells: [number, number][]): void {
    if (this.map) {
      for (const [h, v] of cells) {
        if (!isReachable(this.map, h, v)) {
          throw new Error(`path enters unreachable cell (${h}, ${v})`);
        }
      }
    }
    this.pathCells = cells.slice();
  }

  clearPath(): void {
    this.pathCells = [];
  }

  /** Fold one stream event in; events older than the panel time are dropped
   *  so the telemetry time stays monotone. */
  applyEvent(ev: StreamEvent): void {
    if (ev.type === "error") return;
    if (ev.t < this.lastEventT) return;
    this.lastEventT = ev.t;
    this.lastSeq = Math.max(this.lastSeq, ev.seq);
    this.stale = false;
    this.runState = ev.run_state;
    this.phase = ev.phase;
    this.waypointIndex = ev.waypoint_index;
    if (ev.map_version > this.mapVersion) this.mapVersion = ev.map_version;

    this.previousMarker = this.marker;
    this.marker = { x: ev.x_r, z: ev.z_r, theta: ev.theta, t: ev.t };

    if (ev.type === "state" || ev.type === "done") {
      this.pushTrace(this.realTrace, [ev.x_r, ev.z_r]);
      if (ev.expected) this.pushTrace(this.expectedTrace, ev.expected);
    }
    if (ev.type === "done" && ev.rmse) {
      this.rmse = ev.rmse;
    }
  }

  markStale(): void {
    this.stale = true;
  }

  /** Marker position for a render timestamp: interpolates between the last
   *  two events only, clamped so the marker never extrapolates. */
  interpolatedMarker(renderT: number): Marker | null {
    if (!this.marker) return null;
    if (!this.previousMarker || renderT >= this.marker.t) return this.marker;
    const a = this.previousMarker;
    const b = this.marker;
    const span = b.t - a.t;
    if (span <= 0) return b;
    const alpha = Math.min(1, Math.max(0, (renderT - a.t) / span));
    return {
      x: a.x + alpha * (b.x - a.x),
      z: a.z + alpha * (b.z - a.z),
      theta: a.theta + alpha * (b.theta - a.theta),
      t: renderT,
    };
  }

  private pushTrace(trace: [number, number][], point: [number, number]): void {
    trace.push(point);
    if (trace.length > TRACE_CAP) {
      // decimate in place: keep every other point, halving the buffer
      let keep = 0;
      for (let i = 0; i < trace.length; i += 2) trace[keep++] = trace[i];
      trace.length = keep;
    }
  }

  /** Draw the complete scene; pure function of the current state. */
  render(ctx: Canvas2D, view: Viewport, renderT?: number): void {
    if (!this.map) return;
    renderMap(ctx, this.map, view);
    renderPath(ctx, this.pathCells, view);
    renderTrace(ctx, this.expectedTrace, COLORS.expectedTrace, view);
    renderTrace(ctx, this.realTrace, COLORS.realTrace, view);
    const marker = renderT === undefined
      ? this.marker
      : this.interpolatedMarker(renderT);
    if (marker) renderRobot(ctx, marker.x, marker.z, marker.theta, view);
  }
}
