"""HTTP facade over one BenchSession.

GET /state, POST /tune, GET /s11, POST /fire, GET /shots plus the per-shot
artifact readers, and an SSE stream at /events carrying shot-completed and
s11-updated notifications. One session per process; endpoints are plain sync
functions so the framework runs them in its threadpool and a long fire never
blocks reads.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path

import numpy as np

from .bench import BenchSession, ShotRecord
from .errors import ConfigError, IoFailure, MaserBenchError
from .resonator import ReflectionTrace
from .signals import read_envelope_csv, read_trace_csv

SSE_KEEPALIVE_S = 15.0


class EventBus:
    """Fan-out of event dicts to any number of queue subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            try:
                q.put_nowait(event)
            except queue.Full:
                pass


def trace_to_json(trace: ReflectionTrace) -> dict:
    mag = np.abs(trace.s11)
    return {
        "freq_hz": trace.freq_hz.tolist(),
        "s11_re": trace.s11.real.tolist(),
        "s11_im": trace.s11.imag.tolist(),
        "mag_db": (20.0 * np.log10(np.maximum(mag, 1e-15))).tolist(),
    }


def _shot_summary(record: ShotRecord) -> dict:
    m = record.metrics
    return {
        "shot_id": record.shot_id,
        "timestamp_utc": record.timestamp_utc,
        "detuning_hz": record.detuning_hz,
        "energy_mj": record.energy_mj,
        "mased": record.mased,
        "peak_photons": record.peak_photons,
        "p_peak_dbm": None if m is None else m.p_peak_dbm,
        "delay_to_peak_s": None if m is None else m.delay_to_peak_s,
        "rabi_freq_td_hz": None if m is None else m.rabi_freq_td_hz,
        "carrier_est_hz": None if m is None else m.carrier_est_hz,
        "error": record.error,
    }


def _minmax_decimate(t: np.ndarray, v: np.ndarray, bins: int):
    """Scope-style display decimation keeping per-bin extremes."""
    n = v.size
    if bins <= 0 or n <= 2 * bins:
        return t, v
    edges = np.linspace(0, n, bins + 1, dtype=int)
    t_out, v_out = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = v[a:b]
        i_lo = int(np.argmin(seg))
        i_hi = int(np.argmax(seg))
        first, second = sorted((i_lo, i_hi))
        t_out.extend((t[a + first], t[a + second]))
        v_out.extend((seg[first], seg[second]))
    return np.asarray(t_out), np.asarray(v_out)


try:
    from pydantic import BaseModel
except ImportError:  # service extra not installed; core package still works
    BaseModel = object


class TuneRequest(BaseModel):
    height_mm: float | None = None
    f_target_hz: float | None = None
    step_hz: float | None = None


class FireRequest(BaseModel):
    energy_mj: float | None = None


class AutofireRequest(BaseModel):
    rate_hz: float | None = None


def create_app(
    session: BenchSession | None = None,
    run_dir=None,
    master_seed: int = 0,
):
    """Build the FastAPI app bound to one session.

    An existing run_dir with a session.json is reloaded; otherwise a fresh
    session is created there.
    """
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import StreamingResponse

    if session is None:
        from .bench import resolve_run_dir

        target = resolve_run_dir(run_dir)
        if (Path(target) / "session.json").is_file():
            session = BenchSession.load(target)
        else:
            session = BenchSession(run_dir=target, master_seed=master_seed)

    app = FastAPI(title="maserbench service")
    app.state.session = session
    app.state.events = EventBus()

    def _http_error(exc: MaserBenchError) -> HTTPException:
        if isinstance(exc, ConfigError):
            return HTTPException(status_code=422, detail=str(exc))
        if isinstance(exc, IoFailure):
            return HTTPException(status_code=500, detail=str(exc))
        return HTTPException(
            status_code=409, detail=f"{type(exc).__name__}: {exc}"
        )

    @app.get("/state")
    def get_state():
        return session.state()

    @app.post("/tune")
    def post_tune(req: TuneRequest):
        try:
            trace = session.tune(
                height_mm=req.height_mm,
                f_target_hz=req.f_target_hz,
                step_hz=req.step_hz,
            )
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        app.state.events.publish(
            {
                "type": "s11-updated",
                "f_mode_hz": session.resonator.f_mode_hz,
                "ceiling_height_mm": session.resonator.ceiling_height_mm,
            }
        )
        return {"state": session.state(), "s11": trace_to_json(trace)}

    @app.get("/s11")
    def get_s11(span_hz: float | None = None, points: int = 401):
        try:
            trace = session.s11(span_hz=span_hz, n_points=points)
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        return trace_to_json(trace)

    @app.post("/fire")
    def post_fire(req: FireRequest | None = None):
        energy = req.energy_mj if req is not None else None
        try:
            record = session.fire(energy_mj=energy)
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        summary = _shot_summary(record)
        app.state.events.publish({"type": "shot-completed", **summary})
        return record.to_dict()

    @app.post("/autofire")
    def post_autofire(req: AutofireRequest):
        try:
            if req.rate_hz is None:
                session.stop_autofire()
            else:
                session.start_autofire(req.rate_hz)
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        return {"autofire_active": session._autofire is not None}

    @app.get("/shots")
    def get_shots():
        return [_shot_summary(r) for r in session.shot_log]

    def _shot_or_404(shot_id: int) -> ShotRecord:
        try:
            return session.get_shot(shot_id)
        except ConfigError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/shots/{shot_id}/metrics")
    def get_shot_metrics(shot_id: int):
        record = _shot_or_404(shot_id)
        return {
            "summary": _shot_summary(record),
            "metrics": None if record.metrics is None else record.metrics.to_dict(),
        }

    @app.get("/shots/{shot_id}/trace")
    def get_shot_trace(shot_id: int, points: int = 2000):
        record = _shot_or_404(shot_id)
        path = session.shot_dir(shot_id) / record.files["trace"]
        try:
            trace = read_trace_csv(
                path, sidecar_path=session.shot_dir(shot_id) / "trace.json"
            )
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        t, v = _minmax_decimate(trace.t_s, trace.v_volts, points)
        return {
            "t_s": t.tolist(),
            "v_volts": v.tolist(),
            "sample_rate_hz": trace.sample_rate_hz,
            "carrier_hint_hz": trace.carrier_hint_hz,
            "load_ohms": trace.load_ohms,
            "decimated_to": int(v.size),
        }

    @app.get("/shots/{shot_id}/envelope")
    def get_shot_envelope(shot_id: int):
        record = _shot_or_404(shot_id)
        path = session.shot_dir(shot_id) / record.files["envelope"]
        try:
            env = read_envelope_csv(path)
        except MaserBenchError as exc:
            raise _http_error(exc) from exc
        return {
            "t_s": env.t_s.tolist(),
            "a_re": env.a.real.tolist(),
            "a_im": env.a.imag.tolist(),
            "n_photons": env.n_photons.tolist(),
            "w": env.w.tolist(),
            "p_out_w": env.p_out_w.tolist(),
        }

    @app.get("/shots/{shot_id}/spectrum")
    def get_shot_spectrum(shot_id: int):
        record = _shot_or_404(shot_id)
        if "spectrum" not in record.files:
            raise HTTPException(
                status_code=404, detail=f"shot {shot_id} has no spectrum"
            )
        shot_dir = session.shot_dir(shot_id)
        try:
            data = np.loadtxt(
                shot_dir / record.files["spectrum"], delimiter=",", skiprows=1
            )
            with open(shot_dir / record.files["peaks"]) as fh:
                peaks = json.load(fh)
        except OSError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return {
            "freq_hz": data[:, 0].tolist(),
            "psd_norm": data[:, 1].tolist(),
            "peaks": peaks,
        }

    @app.get("/events")
    def get_events():
        def stream():
            q = app.state.events.subscribe()
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        event = q.get(timeout=SSE_KEEPALIVE_S)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    payload = json.dumps(event)
                    yield f"event: {event['type']}\ndata: {payload}\n\n"
            finally:
                app.state.events.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve(host: str = "127.0.0.1", port: int = 8765, **app_kwargs) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(**app_kwargs), host=host, port=port)
