"""Operator session for the virtual bench.

The loop mirrors bench practice: tune the ceiling, check the S11 dip, fire
the pump, inspect the shot. A session owns one instrument state; mutations
(tune, fire) are serialized behind a lock while reads stay lock-free, so a
running shot never blocks state inspection.

Every shot consumes a seed derived from (master_seed, shot_id), which makes
a scripted session reproducible end to end regardless of how many S11 reads
happen in between.

Persistence layout under run_dir:

    session.json                 instrument state + master seed + next id
    shots/{id}/config.json       full simulation config snapshot
    shots/{id}/envelope.csv      cavity-frame complex amplitude record
    shots/{id}/trace.csv(.json)  synthesized scope trace + sidecar
    shots/{id}/spectrum.csv      normalized burst spectrum (when mased)
    shots/{id}/peaks.json        detected spectral peaks (when mased)
    shots/{id}/metrics.json      headline metrics (when mased)
    shots/{id}/record.json       the ShotRecord itself
"""

from __future__ import annotations

import json
import os
import shutil
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import memspec, signals
from .calibration import load_default_params
from .dynamics import (
    GainMediumParams,
    PumpPulse,
    SimConfig,
    simulate_burst,
    synthesize_scope_trace,
)
from .errors import ConfigError, IoFailure, NoBurst
from .pulse_metrics import PulseMetrics, analyze_trace, write_metrics_json
from .resonator import (
    ReflectionTrace,
    ResonatorConfig,
    height_for_frequency,
    reflection_trace,
    tune_ceiling,
)

RUN_DIR_ENV = "MASERBENCH_RUN_DIR"
# photon-number factor over the seed level below which a shot is not a burst
BURST_PHOTON_FACTOR = 100.0


def derived_shot_seed(master_seed: int, shot_id: int) -> int:
    """Deterministic per-shot seed; independent of tuning history."""
    return int(np.random.SeedSequence((master_seed, shot_id)).generate_state(1)[0])


@dataclass(frozen=True)
class ShotRecord:
    """Immutable summary of one fire, as persisted under run_dir."""

    shot_id: int
    timestamp_utc: str
    seed: int
    detuning_hz: float
    energy_mj: float
    mased: bool
    peak_photons: float
    metrics: PulseMetrics | None
    config: dict
    files: dict
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "timestamp_utc": self.timestamp_utc,
            "seed": self.seed,
            "detuning_hz": self.detuning_hz,
            "energy_mj": self.energy_mj,
            "mased": self.mased,
            "peak_photons": self.peak_photons,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "config": self.config,
            "files": self.files,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShotRecord":
        metrics = d.get("metrics")
        return cls(
            shot_id=d["shot_id"],
            timestamp_utc=d["timestamp_utc"],
            seed=d["seed"],
            detuning_hz=d["detuning_hz"],
            energy_mj=d["energy_mj"],
            mased=d["mased"],
            peak_photons=d["peak_photons"],
            metrics=None if metrics is None else PulseMetrics.from_dict(metrics),
            config=d["config"],
            files=d["files"],
            error=d.get("error"),
        )


def resolve_run_dir(run_dir=None) -> Path:
    if run_dir is not None:
        return Path(run_dir)
    env = os.environ.get(RUN_DIR_ENV)
    if env:
        return Path(env)
    return Path("maserbench_run")


class BenchSession:
    """One virtual instrument: resonator + medium + pump + shot log."""

    def __init__(
        self,
        run_dir=None,
        master_seed: int = 0,
        resonator: ResonatorConfig | None = None,
        medium: GainMediumParams | None = None,
        pump: PumpPulse | None = None,
        coupling_efficiency: float | None = None,
        sim_defaults: dict | None = None,
        _defer_save: bool = False,
    ):
        if resonator is None or medium is None or pump is None:
            stored = load_default_params()
            resonator = resonator or ResonatorConfig.from_dict(stored["resonator"])
            medium = medium or GainMediumParams.from_dict(stored["medium"])
            pump = pump or PumpPulse.from_dict(stored["pump_reference"])
            if coupling_efficiency is None:
                coupling_efficiency = stored["coupling_efficiency"]
            if sim_defaults is None:
                sim_defaults = dict(stored["sim_defaults"])
        self.resonator = resonator
        self.medium = medium
        self.pump = pump
        self.coupling_efficiency = (
            0.3 if coupling_efficiency is None else coupling_efficiency
        )
        self.sim_defaults = dict(sim_defaults or {})
        self.master_seed = master_seed
        self.run_dir = resolve_run_dir(run_dir)
        self.shot_log: list[ShotRecord] = []
        self._next_id = 1
        self._mutation_lock = threading.Lock()
        self._autofire: threading.Thread | None = None
        self._autofire_stop = threading.Event()
        if not _defer_save:
            self._save_session()

    # -- persistence -------------------------------------------------------

    def _session_path(self) -> Path:
        return self.run_dir / "session.json"

    def _save_session(self) -> None:
        try:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            (self.run_dir / "shots").mkdir(exist_ok=True)
            payload = {
                "master_seed": self.master_seed,
                "next_shot_id": self._next_id,
                "resonator": self.resonator.to_dict(),
                "medium": self.medium.to_dict(),
                "pump": self.pump.to_dict(),
                "coupling_efficiency": self.coupling_efficiency,
                "sim_defaults": self.sim_defaults,
            }
            with open(self._session_path(), "w") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"writing session state: {exc}") from exc

    @classmethod
    def load(cls, run_dir) -> "BenchSession":
        """Rebuild a session, shot log included, from its run directory."""
        run_dir = Path(run_dir)
        path = run_dir / "session.json"
        try:
            with open(path) as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise IoFailure(f"reading {path}: {exc}") from exc
        session = cls(
            run_dir=run_dir,
            master_seed=payload["master_seed"],
            resonator=ResonatorConfig.from_dict(payload["resonator"]),
            medium=GainMediumParams.from_dict(payload["medium"]),
            pump=PumpPulse.from_dict(payload["pump"]),
            coupling_efficiency=payload["coupling_efficiency"],
            sim_defaults=payload["sim_defaults"],
            _defer_save=True,
        )
        shots_dir = run_dir / "shots"
        records = []
        if shots_dir.is_dir():
            for entry in shots_dir.iterdir():
                record_path = entry / "record.json"
                if not record_path.is_file():
                    continue
                try:
                    with open(record_path) as fh:
                        records.append(ShotRecord.from_dict(json.load(fh)))
                except (OSError, json.JSONDecodeError, KeyError) as exc:
                    raise IoFailure(f"reading {record_path}: {exc}") from exc
        records.sort(key=lambda r: r.shot_id)
        session.shot_log = records
        session._next_id = max(
            payload["next_shot_id"],
            (records[-1].shot_id + 1) if records else 1,
        )
        return session

    # -- state and reads ---------------------------------------------------

    def state(self) -> dict:
        res = self.resonator
        return {
            "resonator": res.to_dict(),
            "detuning_hz": res.detuning_hz,
            "linewidth_hz": res.linewidth_hz,
            "pump": self.pump.to_dict(),
            "coupling_efficiency": self.coupling_efficiency,
            "master_seed": self.master_seed,
            "next_shot_id": self._next_id,
            "shot_count": len(self.shot_log),
            "run_dir": str(self.run_dir),
            "autofire_active": self._autofire is not None,
        }

    def s11(
        self,
        span_hz: float | None = None,
        n_points: int = 401,
        noise_sigma: float = 0.0,
    ) -> ReflectionTrace:
        """Fresh reflection sweep of the current resonator state."""
        kwargs = {}
        if span_hz is not None:
            half = 0.5 * span_hz
            kwargs = {
                "f_start_hz": self.resonator.f_mode_hz - half,
                "f_stop_hz": self.resonator.f_mode_hz + half,
            }
        return reflection_trace(
            self.resonator, n_points=n_points, noise_sigma=noise_sigma, **kwargs
        )

    def get_shot(self, shot_id: int) -> ShotRecord:
        for record in self.shot_log:
            if record.shot_id == shot_id:
                return record
        raise ConfigError(f"no shot with id {shot_id}")

    def shot_dir(self, shot_id: int) -> Path:
        return self.run_dir / "shots" / str(shot_id)

    # -- mutations ---------------------------------------------------------

    def tune(
        self,
        height_mm: float | None = None,
        f_target_hz: float | None = None,
        step_hz: float | None = None,
    ) -> ReflectionTrace:
        """Move the tuning ceiling and return a fresh S11 sweep.

        Exactly one of height_mm, f_target_hz, step_hz selects the target;
        frequency targets are inverted through the calibration table.
        """
        given = [v is not None for v in (height_mm, f_target_hz, step_hz)]
        if sum(given) != 1:
            raise ConfigError(
                "tune takes exactly one of height_mm, f_target_hz, step_hz"
            )
        with self._mutation_lock:
            if step_hz is not None:
                f_target_hz = self.resonator.f_mode_hz + step_hz
            if f_target_hz is not None:
                height_mm = height_for_frequency(
                    f_target_hz, self.resonator.tuning_table
                )
            self.resonator = tune_ceiling(self.resonator, height_mm)
            self._save_session()
        return self.s11()

    def fire(self, energy_mj: float | None = None) -> ShotRecord:
        """Run one shot end to end and persist every artifact."""
        with self._mutation_lock:
            shot_id = self._next_id
            seed = derived_shot_seed(self.master_seed, shot_id)
            pump = self.pump
            if energy_mj is not None:
                pump = replace(pump, energy_j=energy_mj * 1e-3)
            cfg = SimConfig(
                resonator=self.resonator,
                medium=self.medium,
                pump=pump,
                seed=seed,
                coupling_efficiency=self.coupling_efficiency,
                **self.sim_defaults,
            )
            record = self._run_shot(shot_id, cfg)
            self.shot_log.append(record)
            self._next_id = shot_id + 1
            self._save_session()
            return record

    def _run_shot(self, shot_id: int, cfg: SimConfig) -> ShotRecord:
        env = simulate_burst(cfg)
        carrier = cfg.resonator.f_spin_hz
        trace = synthesize_scope_trace(env, carrier)
        peak_photons = float(np.max(env.n_photons))

        metrics = None
        spectrum = None
        error = None
        # the photon-count detection line decides whether anything radiated;
        # running the analyzers below it would only dress up noise as metrics
        if peak_photons > BURST_PHOTON_FACTOR * cfg.seed_photons:
            try:
                metrics, spectrum, _ = analyze_trace(trace)
            except NoBurst as exc:
                error = f"NoBurst: {exc}"
        else:
            error = "NoBurst: below detection line"
        mased = metrics is not None

        shot_dir = self.shot_dir(shot_id)
        try:
            shot_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"creating {shot_dir}: {exc}") from exc

        config_snapshot = cfg.to_dict()
        files = {
            "config": "config.json",
            "envelope": "envelope.csv",
            "trace": "trace.csv",
            "trace_sidecar": "trace.json",
        }
        with open(shot_dir / "config.json", "w") as fh:
            json.dump(config_snapshot, fh, indent=2)
            fh.write("\n")
        signals.write_envelope_csv(env, shot_dir / "envelope.csv")
        signals.write_trace_csv(
            trace,
            shot_dir / "trace.csv",
            sidecar_path=shot_dir / "trace.json",
            config=config_snapshot,
        )
        if spectrum is not None:
            memspec.write_spectrum_csv(spectrum, shot_dir / "spectrum.csv")
            memspec.write_peaks_json(spectrum, shot_dir / "peaks.json")
            files["spectrum"] = "spectrum.csv"
            files["peaks"] = "peaks.json"
        if metrics is not None:
            write_metrics_json(metrics, shot_dir / "metrics.json")
            files["metrics"] = "metrics.json"

        record = ShotRecord(
            shot_id=shot_id,
            timestamp_utc=datetime.now(timezone.utc).isoformat(),
            seed=cfg.seed,
            detuning_hz=cfg.detuning_hz,
            energy_mj=cfg.pump.energy_j * 1e3,
            mased=mased,
            peak_photons=peak_photons,
            metrics=metrics,
            config=config_snapshot,
            files=files,
            error=error,
        )
        with open(shot_dir / "record.json", "w") as fh:
            json.dump(record.to_dict(), fh, indent=2)
            fh.write("\n")
        return record

    # -- export ------------------------------------------------------------

    def export_shot(self, shot_id: int, fmt: str = "csv-bundle", dest=None) -> Path:
        """Copy a persisted shot into a self-contained bundle directory.

        csv-bundle copies the per-shot files as they are on disk;
        json-bundle additionally folds record, metrics, and peaks into one
        bundle.json. Metrics round-trip bit-identically either way.
        """
        if fmt not in ("csv-bundle", "json-bundle"):
            raise ConfigError(f"unknown export format {fmt!r}")
        record = self.get_shot(shot_id)
        src = self.shot_dir(shot_id)
        if not (src / "record.json").is_file():
            raise IoFailure(f"shot {shot_id} has no persisted artifacts in {src}")
        dest = Path(dest) if dest is not None else (
            self.run_dir / "exports" / f"shot-{shot_id}-{fmt}"
        )
        try:
            dest.mkdir(parents=True, exist_ok=True)
            for name in record.files.values():
                shutil.copy2(src / name, dest / name)
            shutil.copy2(src / "record.json", dest / "record.json")
            if fmt == "json-bundle":
                bundle = {"record": record.to_dict()}
                peaks_path = src / "peaks.json"
                if peaks_path.is_file():
                    with open(peaks_path) as fh:
                        bundle["peaks"] = json.load(fh)
                with open(dest / "bundle.json", "w") as fh:
                    json.dump(bundle, fh, indent=2)
                    fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"exporting shot {shot_id}: {exc}") from exc
        return dest

    # -- auto-fire ---------------------------------------------------------

    def start_autofire(self, rate_hz: float) -> None:
        """Fire repeatedly at a fixed repetition rate until stopped."""
        if not (0.5 <= rate_hz <= 10.0):
            raise ConfigError("autofire rate must lie in [0.5, 10] Hz")
        if self._autofire is not None:
            raise ConfigError("autofire already running")
        self._autofire_stop.clear()

        def loop():
            # if a shot takes longer than the period the loop runs back to
            # back instead of queueing fires
            period = 1.0 / rate_hz
            while not self._autofire_stop.wait(period):
                self.fire()

        self._autofire = threading.Thread(target=loop, daemon=True)
        self._autofire.start()

    def stop_autofire(self) -> None:
        if self._autofire is None:
            return
        self._autofire_stop.set()
        self._autofire.join(timeout=30.0)
        self._autofire = None


def import_bundle(path) -> dict:
    """Read an exported bundle back; returns {'record': ShotRecord, ...}."""
    path = Path(path)
    record_path = path / "record.json"
    bundle_path = path / "bundle.json"
    try:
        if bundle_path.is_file():
            with open(bundle_path) as fh:
                payload = json.load(fh)
            record = ShotRecord.from_dict(payload["record"])
        else:
            with open(record_path) as fh:
                record = ShotRecord.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise IoFailure(f"reading bundle {path}: {exc}") from exc
    return {"record": record, "metrics": record.metrics}
