"""Operator-facing network service around the live simulation loop.

HTTP carries request/response traffic (session creation, map snapshots,
goal submission); a WebSocket streams robot state at the control rate with
coalescing for slow readers. Goals are queued and applied between control
ticks, so the service never mutates the loop mid-tick.
"""

import asyncio
import json
import math
import queue
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .mapping import OccupancyGridMap
from .planner import InvalidEndpointError, UnreachableGoalError
from .sim import ClosedLoop, EpisodeLog, SimConfig, SimNoise, TickRecord, rmse

RUN_IDLE = "IDLE"
RUN_TRACKING = "TRACKING"
RUN_DONE = "DONE"
RUN_ERROR = "ERROR"


def map_document(ogm: OccupancyGridMap, version: int = 1) -> dict:
    """JSON map snapshot: geometry plus run-length-encoded reachability rows.

    Rows run from v_min to v_max; each row lists [run_length, reachable]
    pairs covering h_min..h_max with maximal runs.
    """
    dense = ogm.dense_reachable()
    rows = []
    for v in range(dense.shape[1]):
        col = dense[:, v]
        runs = []
        run_val = bool(col[0])
        run_len = 1
        for val in col[1:]:
            val = bool(val)
            if val == run_val:
                run_len += 1
            else:
                runs.append([run_len, int(run_val)])
                run_val = val
                run_len = 1
        runs.append([run_len, int(run_val)])
        rows.append(runs)
    return {
        "version": version,
        "cell_size_h": ogm.cell_size_h,
        "cell_size_v": ogm.cell_size_v,
        "h_min": ogm.h_range[0],
        "h_max": ogm.h_range[1],
        "v_min": ogm.v_range[0],
        "v_max": ogm.v_range[1],
        "rows": rows,
    }


def decode_map_document(doc: dict):
    """Decode the RLE rows back into a dense reachability array.

    Returns (reachable[h, v], (h_min, v_min)). Raises ValueError when a row
    does not cover the declared width.
    """
    import numpy as np

    n_h = doc["h_max"] - doc["h_min"] + 1
    n_v = doc["v_max"] - doc["v_min"] + 1
    arr = np.zeros((n_h, n_v), dtype=bool)
    if len(doc["rows"]) != n_v:
        raise ValueError("row count does not match the v range")
    for v, runs in enumerate(doc["rows"]):
        h = 0
        for run_len, value in runs:
            arr[h:h + run_len, v] = bool(value)
            h += run_len
        if h != n_h:
            raise ValueError("row runs do not cover the h range")
    return arr, (doc["h_min"], doc["v_min"])


def canonical_json(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


@dataclass
class ServiceConfig:
    ogm: OccupancyGridMap
    start_cell: tuple = (0, 0)
    sim: SimConfig = field(default_factory=SimConfig)
    speed: float = 0.0   # ticks-per-second multiplier of real time; 0 = free-run
    goal_timeout: float = 10.0


class _PendingGoal:
    def __init__(self, cell):
        self.cell = cell
        self.event = threading.Event()
        self.result = None
        self.error = None


class SimSession:
    """One live control loop plus its published state snapshots."""

    def __init__(self, config: ServiceConfig, session_id: str | None = None):
        self.id = session_id or uuid.uuid4().hex[:12]
        self.config = config
        self.loop = ClosedLoop(config.ogm, config.sim, config.start_cell)
        self.map_version = 1
        self._goals = queue.Queue()
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._run_state = RUN_IDLE
        self._seq = 0
        self._snapshot = None
        self._terminal = None       # latest DONE event, kept until streamed
        self._terminal_seq = 0
        self._run_records = []
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._publish(self._make_event("heartbeat", None))
        self._thread.start()

    # ------------------------------------------------------------- loop

    def _run(self):
        pace = None if self.config.speed <= 0 else self.config.sim.dt / self.config.speed
        while not self._stop.is_set():
            started = time.monotonic()
            self._apply_pending_goals()
            record = self.loop.tick()
            self._after_tick(record)
            if pace is not None:
                remaining = pace - (time.monotonic() - started)
                if remaining > 0:
                    self._stop.wait(remaining)

    def _apply_pending_goals(self):
        while True:
            try:
                pending = self._goals.get_nowait()
            except queue.Empty:
                return
            try:
                path = self.loop.plan_to(pending.cell)
                self._run_records = []
                with self._lock:
                    self._run_state = RUN_TRACKING
                pending.result = path
            except (InvalidEndpointError, UnreachableGoalError) as exc:
                pending.error = exc
            finally:
                pending.event.set()

    def _after_tick(self, record: TickRecord):
        tracking = record.phase != "IDLE"
        if tracking and self._run_state == RUN_TRACKING:
            self._run_records.append(record)
        event_type = "state" if tracking else "heartbeat"
        done_event = None
        if record.phase == "DONE" and self._run_state == RUN_TRACKING:
            with self._lock:
                self._run_state = RUN_DONE
            rx, rz, rt = rmse(EpisodeLog(self._run_records))
            done_event = self._make_event("done", record,
                                          rmse_triple=(rx, rz, rt))
            # the finished path stays attached (and rendered) until the next goal
        self._publish(self._make_event(event_type, record), done_event)

    def _make_event(self, event_type: str, record: TickRecord | None,
                    rmse_triple=None) -> dict:
        if record is None:
            pose = self.loop.world.pose
            body = {
                "t": self.loop.t, "x_r": pose.x, "z_r": pose.z,
                "theta": pose.theta, "phase": "IDLE", "waypoint_index": -1,
                "expected": None,
            }
        else:
            expected = None
            if not math.isnan(record.x_e):
                expected = [record.x_e, record.z_e]
            body = {
                "t": record.t, "x_r": record.x_r, "z_r": record.z_r,
                "theta": record.theta, "phase": record.phase,
                "waypoint_index": record.waypoint, "expected": expected,
            }
        body["type"] = event_type
        body["run_state"] = self._run_state
        body["map_version"] = self.map_version
        if rmse_triple is not None:
            body["rmse"] = {"x": rmse_triple[0], "z": rmse_triple[1],
                            "track": rmse_triple[2]}
        return body

    def _publish(self, event: dict, done_event: dict | None = None):
        with self._lock:
            self._seq += 1
            event["seq"] = self._seq
            event["run_state"] = self._run_state
            self._snapshot = event
            if done_event is not None:
                self._terminal_seq += 1
                done_event["seq"] = self._seq
                done_event["run_state"] = self._run_state
                self._terminal = (self._terminal_seq, done_event)

    # -------------------------------------------------------------- api

    def snapshot(self):
        with self._lock:
            return self._seq, self._snapshot, self._terminal

    @property
    def run_state(self):
        with self._lock:
            return self._run_state

    def map_document(self) -> dict:
        return map_document(self.config.ogm, self.map_version)

    def set_goal(self, cell):
        """Queue a goal for the loop thread; blocks until planned or rejected."""
        ogm = self.config.ogm
        if not ogm.in_window(*cell):
            raise InvalidEndpointError(f"goal {cell} is outside the map window")
        if not ogm.reachable(*cell):
            raise InvalidEndpointError(f"goal {cell} is occupied")
        pending = _PendingGoal(tuple(cell))
        self._goals.put(pending)
        if not pending.event.wait(self.config.goal_timeout):
            raise TimeoutError("control loop did not accept the goal in time")
        if pending.error is not None:
            raise pending.error
        return pending.result

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=2.0)


class GoalRequest(BaseModel):
    h: int
    v: int


class SessionRequest(BaseModel):
    start: tuple[int, int] | None = None
    seed: int | None = None
    noise: str | None = None    # "default" | "off"


def create_app(config: ServiceConfig) -> FastAPI:
    sessions: dict[str, SimSession] = {}

    @asynccontextmanager
    async def lifespan(_app):
        yield
        for session in sessions.values():
            session.stop()

    app = FastAPI(title="warebot control service", lifespan=lifespan)
    app.state.sessions = sessions

    def _get_session(session_id: str) -> SimSession | None:
        return sessions.get(session_id)

    @app.post("/session")
    def create_session(body: SessionRequest | None = None):
        cfg = config
        if body is not None:
            sim = cfg.sim
            if body.seed is not None:
                sim = replace(sim, seed=body.seed)
            if body.noise == "off":
                sim = replace(sim, noise=SimNoise.off())
            elif body.noise == "default":
                sim = replace(sim, noise=SimNoise())
            start = tuple(body.start) if body.start is not None else cfg.start_cell
            cfg = replace(cfg, sim=sim, start_cell=start)
        if not cfg.ogm.in_window(*cfg.start_cell) or not cfg.ogm.reachable(*cfg.start_cell):
            return JSONResponse(status_code=409,
                                content={"error": "start cell is not reachable"})
        session = SimSession(cfg)
        sessions[session.id] = session
        return {"id": session.id}

    @app.get("/session/{session_id}/map")
    def get_map(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        return session.map_document()

    @app.post("/session/{session_id}/goal")
    def set_goal(session_id: str, body: GoalRequest):
        session = _get_session(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        try:
            path = session.set_goal((body.h, body.v))
        except (InvalidEndpointError, UnreachableGoalError) as exc:
            return JSONResponse(status_code=409, content={"error": str(exc)})
        except TimeoutError as exc:
            return JSONResponse(status_code=503, content={"error": str(exc)})
        return {
            "path": [list(c) for c in path.cells],
            "cost": path.cost,
            "run_state": session.run_state,
        }

    @app.websocket("/session/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        await ws.accept()
        if session is None:
            await ws.send_json({"type": "error", "error": "unknown session"})
            await ws.close()
            return
        interval = session.config.sim.dt  # poll at the control rate
        last_seq = 0
        last_terminal = 0
        try:
            while True:
                seq, snap, terminal = session.snapshot()
                if terminal is not None and terminal[0] > last_terminal:
                    last_terminal = terminal[0]
                    await ws.send_json(terminal[1])
                if snap is not None and seq > last_seq:
                    last_seq = seq
                    await ws.send_json(snap)
                await asyncio.sleep(interval)
        except WebSocketDisconnect:
            return

    return app
