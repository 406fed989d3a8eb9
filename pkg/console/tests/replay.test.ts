// Replays a recorded event stream through the view model and snapshots the
// final rendered scene: the trace image must be identical run to run.

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { Viewport } from "../src/transform.js";
import { parseStreamEvent } from "../src/types.js";
import { ConsoleViewModel } from "../src/viewmodel.js";
import { RecordingCtx } from "./helpers.js";

const here = dirname(fileURLToPath(import.meta.url));

function loadEvents() {
  const raw = JSON.parse(readFileSync(join(here, "fixtures", "replay-events.json"), "utf-8"));
  return (raw as unknown[]).map(parseStreamEvent);
}

// decoded form of fixtures/map.ogm (24x18, L-shaped wall)
function fixtureMapDoc() {
  const rows: [number, number][][] = [];
  for (let v = 0; v < 18; v++) {
    const blocked = new Set<number>();
    if (v >= 2 && v <= 13) blocked.add(10);
    if (v === 13) for (let h = 10; h < 20; h++) blocked.add(h);
    const runs: [number, number][] = [];
    let run = 0;
    let value = blocked.has(0) ? 0 : 1;
    for (let h = 0; h < 24; h++) {
      const cur = blocked.has(h) ? 0 : 1;
      if (cur === value) { run++; } else { runs.push([run, value]); value = cur; run = 1; }
    }
    runs.push([run, value]);
    rows.push(runs);
  }
  return {
    version: 1, cell_size_h: 0.02, cell_size_v: 0.02,
    h_min: 0, h_max: 23, v_min: 0, v_max: 17, rows,
  };
}

function renderReplay(): { ops: string[]; vm: ConsoleViewModel } {
  const vm = new ConsoleViewModel();
  vm.applyMap(fixtureMapDoc());
  for (const ev of loadEvents()) vm.applyEvent(ev);
  const ctx = new RecordingCtx();
  vm.render(ctx, new Viewport(vm.map!, 960, 680));
  return { ops: ctx.ops, vm };
}

describe("replay fixture", () => {
  it("produces an identical scene across repeated renders", () => {
    const a = renderReplay();
    const b = renderReplay();
    expect(a.ops).toEqual(b.ops);
  });

  it("final scene matches the committed snapshot", () => {
    const { ops, vm } = renderReplay();
    expect(vm.runState).toBe("DONE");
    expect(vm.rmse).not.toBeNull();
    const digest = createHash("sha256").update(ops.join("\n")).digest("hex");
    expect({ opCount: ops.length, digest }).toMatchSnapshot();
  });

  it("replays with monotone time and non-decreasing waypoints", () => {
    const events = loadEvents();
    const times = events.map((e) => e.t);
    for (let i = 1; i < times.length; i++) {
      expect(times[i]).toBeGreaterThan(times[i - 1]);
    }
    const waypoints = events.filter((e) => e.type === "state")
      .map((e) => e.waypoint_index);
    for (let i = 1; i < waypoints.length; i++) {
      expect(waypoints[i]).toBeGreaterThanOrEqual(waypoints[i - 1]);
    }
  });
});
