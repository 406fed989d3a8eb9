// Browser wiring: canvas, click-to-goal, stream-driven rendering. Events
// are queued and folded into the view model once per animation frame so a
// bursty stream never blocks painting.

import { ServiceClient, ServiceError, StreamClient } from "./client.js";
import { ConsoleViewModel } from "./viewmodel.js";
import { Viewport } from "./transform.js";
import { StreamEvent } from "./types.js";

const baseUrl = (window as any).WAREBOT_URL ?? "http://127.0.0.1:8000";
const wsUrl = baseUrl.replace(/^http/, "ws");

import { Canvas2D } from "./render.js";

const canvas = document.getElementById("map") as HTMLCanvasElement;
// the scene only ever assigns string styles, matching the narrow interface
const ctx = canvas.getContext("2d")! as unknown as Canvas2D & CanvasRenderingContext2D;
const badge = document.getElementById("badge")!;
const telemetry = document.getElementById("telemetry")!;
const toast = document.getElementById("toast")!;

const vm = new ConsoleViewModel();
let view: Viewport | null = null;
const pending: StreamEvent[] = [];

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 4000);
}

function updatePanel(): void {
  badge.textContent = vm.stale ? "STALE" : vm.runState;
  badge.dataset.state = vm.stale ? "STALE" : vm.runState;
  const lines = [
    `t = ${vm.lastEventT.toFixed(2)} s`,
    `phase: ${vm.phase}`,
    `waypoint: ${vm.waypointIndex} / ${Math.max(vm.pathCells.length - 1, 0)}`,
  ];
  if (vm.marker) {
    lines.push(`x = ${vm.marker.x.toFixed(4)}  z = ${vm.marker.z.toFixed(4)}`);
    lines.push(`theta = ${vm.marker.theta.toFixed(3)} rad`);
  }
  if (vm.rmse) {
    lines.push(`RMSE x=${vm.rmse.x.toFixed(5)} z=${vm.rmse.z.toFixed(5)} ` +
               `track=${vm.rmse.track.toFixed(5)}`);
  }
  telemetry.textContent = lines.join("\n");
}

function frame(): void {
  for (const ev of pending.splice(0)) vm.applyEvent(ev);
  if (vm.map && !view) {
    view = new Viewport(vm.map, canvas.width, canvas.height);
  }
  if (view) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    vm.render(ctx, view, vm.lastEventT);
  }
  updatePanel();
  requestAnimationFrame(frame);
}

async function start(): Promise<void> {
  const client = new ServiceClient(baseUrl);
  const sessionId = await client.createSession();
  vm.applyMap(await client.getMap(sessionId));

  canvas.addEventListener("click", async (ev) => {
    if (!view) return;
    const rect = canvas.getBoundingClientRect();
    const cell = view.pixelToCell(ev.clientX - rect.left, ev.clientY - rect.top);
    if (!cell) return;
    try {
      const plan = await client.postGoal(sessionId, cell);
      vm.setPath(plan.path);
    } catch (err) {
      if (err instanceof ServiceError) showToast(`goal rejected: ${err.message}`);
      else showToast("goal request failed");
    }
  });

  const stream = new StreamClient(`${wsUrl}/session/${sessionId}/stream`, {
    onEvent: (ev) => pending.push(ev),
    onStatus: (connected) => { if (!connected) vm.markStale(); },
  });
  stream.connect();
  requestAnimationFrame(frame);
}

start().catch((err) => showToast(`startup failed: ${err}`));
