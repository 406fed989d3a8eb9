// Wire types of the control service, with strict runtime validation so a
// malformed payload never poisons the view model.

export type RleRun = [number, number]; // [run_length, reachable 0|1]

export interface MapDocument {
  version: number;
  cell_size_h: number;
  cell_size_v: number;
  h_min: number;
  h_max: number;
  v_min: number;
  v_max: number;
  rows: RleRun[][];
}

export type EventType = "heartbeat" | "state" | "done" | "error";

export interface StreamEvent {
  type: EventType;
  t: number;
  x_r: number;
  z_r: number;
  theta: number;
  phase: string;
  waypoint_index: number;
  expected: [number, number] | null;
  run_state: string;
  map_version: number;
  seq: number;
  rmse?: { x: number; z: number; track: number };
}

export interface GoalResponse {
  path: [number, number][];
  cost: number;
  run_state: string;
}

function isNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isInt(x: unknown): x is number {
  return typeof x === "number" && Number.isInteger(x);
}

export function parseMapDocument(raw: unknown): MapDocument {
  const doc = raw as MapDocument;
  if (
    typeof doc !== "object" || doc === null ||
    !isInt(doc.version) ||
    !isNumber(doc.cell_size_h) || doc.cell_size_h <= 0 ||
    !isNumber(doc.cell_size_v) || doc.cell_size_v <= 0 ||
    !isInt(doc.h_min) || !isInt(doc.h_max) || doc.h_max < doc.h_min ||
    !isInt(doc.v_min) || !isInt(doc.v_max) || doc.v_max < doc.v_min ||
    !Array.isArray(doc.rows)
  ) {
    throw new Error("malformed map document");
  }
  for (const row of doc.rows) {
    if (!Array.isArray(row)) throw new Error("malformed map row");
    for (const run of row) {
      if (!Array.isArray(run) || run.length !== 2 || !isInt(run[0]) ||
          run[0] < 1 || (run[1] !== 0 && run[1] !== 1)) {
        throw new Error("malformed RLE run");
      }
    }
  }
  return doc;
}

export function parseStreamEvent(raw: unknown): StreamEvent {
  const ev = raw as StreamEvent;
  if (
    typeof ev !== "object" || ev === null ||
    !["heartbeat", "state", "done", "error"].includes(ev.type) ||
    !isNumber(ev.t) || !isNumber(ev.x_r) || !isNumber(ev.z_r) ||
    !isNumber(ev.theta) || typeof ev.phase !== "string" ||
    !isInt(ev.waypoint_index) || !isInt(ev.map_version) || !isInt(ev.seq)
  ) {
    throw new Error("malformed stream event");
  }
  if (ev.expected !== null && ev.expected !== undefined) {
    if (!Array.isArray(ev.expected) || ev.expected.length !== 2 ||
        !isNumber(ev.expected[0]) || !isNumber(ev.expected[1])) {
      throw new Error("malformed expected position");
    }
  }
  if (ev.type === "done") {
    const r = ev.rmse;
    if (!r || !isNumber(r.x) || !isNumber(r.z) || !isNumber(r.track)) {
      throw new Error("done event without rmse");
    }
  }
  return ev;
}

export function parseGoalResponse(raw: unknown): GoalResponse {
  const res = raw as GoalResponse;
  if (
    typeof res !== "object" || res === null || !Array.isArray(res.path) ||
    !isInt(res.cost) || typeof res.run_state !== "string"
  ) {
    throw new Error("malformed goal response");
  }
  for (const cell of res.path) {
    if (!Array.isArray(cell) || cell.length !== 2 || !isInt(cell[0]) || !isInt(cell[1])) {
      throw new Error("malformed path cell");
    }
  }
  return res;
}
