"""Record types shared across the bench: complex burst envelopes and
oscilloscope-style voltage traces, with their on-disk CSV formats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyTrace, InvalidGrid, IoFailure, UndersampledCarrier

ENVELOPE_HEADER = "t_s,a_re,a_im,n_photons,w,p_out_w"
TRACE_HEADER = "t_s,v_volts"


@dataclass(frozen=True)
class MaserEnvelope:
    """Slow complex field amplitude a(t) in the frame of the spin transition.

    |a|^2 is the intracavity photon number; w is the population inversion in
    spins; p_out_w is the power delivered to the output port in watts.
    """

    t_s: np.ndarray
    a: np.ndarray
    n_photons: np.ndarray
    w: np.ndarray
    p_out_w: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_s, dtype=float)
        a = np.asarray(self.a, dtype=complex)
        n = np.asarray(self.n_photons, dtype=float)
        w = np.asarray(self.w, dtype=float)
        p = np.asarray(self.p_out_w, dtype=float)
        for name, arr in (("t_s", t), ("a", a), ("n_photons", n), ("w", w), ("p_out_w", p)):
            if arr.shape != t.shape:
                raise ConfigError(f"envelope field {name} length mismatch")
        if t.size < 2:
            raise ConfigError("envelope needs at least 2 samples")
        if abs(t[0]) > 1e-15:
            raise ConfigError("envelope time axis must start at 0")
        if not np.all(np.diff(t) > 0):
            raise ConfigError("envelope time axis must be strictly increasing")
        if np.min(n) < 0:
            raise ConfigError("photon number must be non-negative")
        object.__setattr__(self, "t_s", t)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "n_photons", n)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p_out_w", p)

    @property
    def dt_s(self) -> float:
        return float(self.t_s[1] - self.t_s[0])


@dataclass(frozen=True)
class MaserTrace:
    """Real sampled voltage at the output port, scope style."""

    v_volts: np.ndarray
    sample_rate_hz: float
    carrier_hint_hz: float
    load_ohms: float = 50.0

    def __post_init__(self):
        v = np.asarray(self.v_volts, dtype=float)
        object.__setattr__(self, "v_volts", v)
        if v.size == 0:
            raise EmptyTrace("trace has no samples")
        if self.sample_rate_hz <= 0 or self.load_ohms <= 0:
            raise ConfigError("sample_rate and load must be positive")
        if self.carrier_hint_hz <= 0:
            raise ConfigError("carrier_hint must be positive")
        if self.sample_rate_hz < 4.0 * self.carrier_hint_hz:
            raise UndersampledCarrier(
                f"sample rate {self.sample_rate_hz:.3e} Hz below 4x carrier "
                f"{self.carrier_hint_hz:.3e} Hz"
            )

    @property
    def t_s(self) -> np.ndarray:
        return np.arange(self.v_volts.size) / self.sample_rate_hz

    def sidecar(self, config: dict | None = None) -> dict:
        meta = {
            "sample_rate_hz": self.sample_rate_hz,
            "load_ohms": self.load_ohms,
            "carrier_hint_hz": self.carrier_hint_hz,
        }
        if config is not None:
            meta["config"] = config
        return meta


def write_envelope_csv(env: MaserEnvelope, path) -> None:
    data = np.column_stack(
        [env.t_s, env.a.real, env.a.imag, env.n_photons, env.w, env.p_out_w]
    )
    try:
        np.savetxt(path, data, delimiter=",", header=ENVELOPE_HEADER, comments="", fmt="%.17g")
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def read_envelope_csv(path) -> MaserEnvelope:
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if header != ENVELOPE_HEADER:
                raise InvalidGrid(f"{path}: expected header {ENVELOPE_HEADER}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    except ValueError as exc:
        raise InvalidGrid(f"{path}: malformed envelope CSV: {exc}") from exc
    return MaserEnvelope(
        t_s=data[:, 0],
        a=data[:, 1] + 1j * data[:, 2],
        n_photons=data[:, 3],
        w=data[:, 4],
        p_out_w=data[:, 5],
    )


def write_trace_csv(
    trace: MaserTrace, path, sidecar_path=None, config: dict | None = None
) -> None:
    data = np.column_stack([trace.t_s, trace.v_volts])
    try:
        np.savetxt(path, data, delimiter=",", header=TRACE_HEADER, comments="", fmt="%.17g")
        if sidecar_path is not None:
            with open(sidecar_path, "w") as fh:
                json.dump(trace.sidecar(config), fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def read_trace_csv(path, sidecar_path=None) -> MaserTrace:
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if header != TRACE_HEADER:
                raise InvalidGrid(f"{path}: expected header {TRACE_HEADER}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    except ValueError as exc:
        raise InvalidGrid(f"{path}: malformed trace CSV: {exc}") from exc
    if data.shape[0] < 2:
        raise InvalidGrid(f"{path}: trace too short")
    t, v = data[:, 0], data[:, 1]
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise InvalidGrid(f"{path}: time column must be strictly increasing")
    meta: dict = {}
    if sidecar_path is not None:
        try:
            with open(sidecar_path) as fh:
                meta = json.load(fh)
        except OSError as exc:
            raise IoFailure(f"reading {sidecar_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidGrid(f"{sidecar_path}: malformed sidecar: {exc}") from exc
    sample_rate = float(meta.get("sample_rate_hz", 1.0 / np.median(steps)))
    carrier = float(meta.get("carrier_hint_hz", sample_rate / 4.0))
    load = float(meta.get("load_ohms", 50.0))
    return MaserTrace(
        v_volts=v,
        sample_rate_hz=sample_rate,
        carrier_hint_hz=carrier,
        load_ohms=load,
    )
