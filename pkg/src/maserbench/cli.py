"""Command line front end.

Subcommands cover the batch side of the bench: simulate one shot, sweep
detunings, analyze a recorded trace, fit an S11 sweep, run the calibration,
or start the HTTP service. --json switches stdout to machine-readable
output. Exit codes: 0 success, 2 input or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import calibration, memspec, signals
from .bench import BURST_PHOTON_FACTOR
from .dynamics import (
    SimConfig,
    detuning_sweep,
    emitted_frequency,
    simulate_burst,
    synthesize_scope_trace,
)
from .errors import ConfigError, IoFailure, MaserBenchError, NoBurst
from .pulse_metrics import analyze_trace, write_metrics_json
from .resonator import (
    cavity_decay_rate,
    classify_coupling,
    estimate_q_loaded,
    read_reflection_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _emit(payload: dict | list, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _build_config(args) -> SimConfig:
    if args.config is not None:
        try:
            with open(args.config) as fh:
                return SimConfig.from_dict(json.load(fh))
        except OSError as exc:
            raise IoFailure(f"reading {args.config}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"{args.config}: malformed config: {exc}") from exc
    overrides = {}
    if args.duration_us is not None:
        overrides["duration_s"] = args.duration_us * 1e-6
    return calibration.default_sim_config(
        detuning_hz=args.detuning_mhz * 1e6,
        seed=args.seed,
        energy_mj=args.energy_mj,
        **overrides,
    )


def _metrics_text(metrics, extra: dict | None = None) -> str:
    lines = [
        f"peak power      {metrics.p_peak_dbm:8.2f} dBm ({metrics.p_peak_mw:.4g} mW)",
        f"peak voltage    {metrics.v_peak_v:8.4f} V",
        f"delay to peak   {metrics.delay_to_peak_s * 1e6:8.2f} us",
    ]
    if metrics.rabi_freq_td_hz is not None:
        lines.append(f"rabi modulation {metrics.rabi_freq_td_hz / 1e6:8.3f} MHz")
    if metrics.carrier_est_hz is not None:
        lines.append(f"carrier         {metrics.carrier_est_hz / 1e6:12.4f} MHz")
    for key, val in (extra or {}).items():
        lines.append(f"{key:15s} {val}")
    return "\n".join(lines)


def _cmd_simulate(args) -> int:
    cfg = _build_config(args)
    env = simulate_burst(cfg)
    trace = synthesize_scope_trace(env, cfg.resonator.f_spin_hz)
    payload: dict = {
        "detuning_hz": cfg.detuning_hz,
        "energy_mj": cfg.pump.energy_j * 1e3,
        "seed": cfg.seed,
        "peak_photons": float(np.max(env.n_photons)),
    }
    try:
        # same detection line the bench applies before trusting any metric
        if payload["peak_photons"] <= BURST_PHOTON_FACTOR * cfg.seed_photons:
            raise NoBurst("below detection line")
        metrics, spectrum, _ = analyze_trace(trace)
    except NoBurst as exc:
        payload["metrics"] = None
        payload["error"] = f"NoBurst: {exc}"
        _emit(payload, args.json, f"no burst: {exc}")
        return EXIT_OK
    try:
        payload["emitted_hz"] = emitted_frequency(
            env, cfg.resonator.f_spin_hz, cfg.seed_photons
        )
    except NoBurst:
        payload["emitted_hz"] = None
    payload["metrics"] = metrics.to_dict()
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        signals.write_envelope_csv(env, out / "envelope.csv")
        signals.write_trace_csv(
            trace, out / "trace.csv", sidecar_path=out / "trace.json",
            config=cfg.to_dict(),
        )
        write_metrics_json(metrics, out / "metrics.json")
        memspec.write_spectrum_csv(spectrum, out / "spectrum.csv")
        memspec.write_peaks_json(spectrum, out / "peaks.json")
        with open(out / "config.json", "w") as fh:
            json.dump(cfg.to_dict(), fh, indent=2)
            fh.write("\n")
        payload["out_dir"] = str(out)
    extra = {}
    if payload.get("emitted_hz"):
        extra["emitted"] = f"{payload['emitted_hz'] / 1e6:.4f} MHz"
    _emit(payload, args.json, _metrics_text(metrics, extra))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        detunings = [float(s) * 1e6 for s in args.detunings_mhz.split(",") if s]
    except ValueError as exc:
        raise ConfigError(f"bad detuning list: {exc}") from exc
    if not detunings:
        raise ConfigError("empty detuning list")
    cfg = _build_config(args)
    entries = detuning_sweep(cfg, detunings)
    rows = [
        {
            "detuning_mhz": e.detuning_hz / 1e6,
            "p_peak_dbm": e.p_peak_dbm,
            "delay_us": None if e.delay_s is None else e.delay_s * 1e6,
            "rabi_mhz": None if e.rabi_td_hz is None else e.rabi_td_hz / 1e6,
            "error": e.error,
        }
        for e in entries
    ]
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    header = f"{'det MHz':>8} {'peak dBm':>9} {'delay us':>9} {'rabi MHz':>9}  note"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            "{:>8.2f} {:>9} {:>9} {:>9}  {}".format(
                r["detuning_mhz"],
                "-" if r["p_peak_dbm"] is None else f"{r['p_peak_dbm']:.2f}",
                "-" if r["delay_us"] is None else f"{r['delay_us']:.2f}",
                "-" if r["rabi_mhz"] is None else f"{r['rabi_mhz']:.3f}",
                r["error"] or "",
            )
        )
    print("\n".join(lines))
    return EXIT_OK


def _cmd_analyze(args) -> int:
    sidecar = args.sidecar
    if sidecar is None:
        candidate = Path(args.trace).with_suffix(".json")
        sidecar = candidate if candidate.is_file() else None
    trace = signals.read_trace_csv(args.trace, sidecar_path=sidecar)
    metrics, spectrum, _ = analyze_trace(trace)
    payload = {
        "metrics": metrics.to_dict(),
        "peaks": memspec.peaks_to_dicts(spectrum),
    }
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_json(metrics, out / "metrics.json")
        memspec.write_spectrum_csv(spectrum, out / "spectrum.csv")
        memspec.write_peaks_json(spectrum, out / "peaks.json")
        payload["out_dir"] = str(out)
    _emit(payload, args.json, _metrics_text(metrics))
    return EXIT_OK


def _cmd_fit_s11(args) -> int:
    trace = read_reflection_csv(args.csv)
    est = estimate_q_loaded(trace)
    coupling = classify_coupling(trace)
    decay = cavity_decay_rate(est.q_loaded, est.f_res_hz)
    payload = {
        "q_loaded": est.q_loaded,
        "f_res_hz": est.f_res_hz,
        "f_lo_hz": est.f_lo_hz,
        "f_hi_hz": est.f_hi_hz,
        "linewidth_hz": decay.linewidth_hz,
        "kappa_rad_s": decay.kappa_rad_per_s,
        "coupling": {
            "regime": coupling.regime.value,
            "origin_distance": coupling.origin_distance,
            "center_re": coupling.center_re,
            "center_im": coupling.center_im,
            "radius": coupling.radius,
        },
    }
    text = (
        f"q_loaded = {est.q_loaded:.1f}\n"
        f"f_res    = {est.f_res_hz / 1e9:.6f} GHz\n"
        f"linewidth = {decay.linewidth_hz / 1e3:.2f} kHz\n"
        f"coupling = {coupling.regime.value}"
        f" (origin distance {coupling.origin_distance:+.4f})"
    )
    _emit(payload, args.json, text)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    result = calibration.run_calibration(fast=args.fast, seed=args.seed)
    if args.out is not None:
        calibration.write_calibration(result, args.out)
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        lines = ["calibration targets:"]
        for name, t in result["targets"].items():
            status = {True: "pass", False: "FAIL", None: "skipped"}[t["pass"]]
            measured = t["measured"]
            shown = "-" if measured is None else f"{measured:.4g}"
            lines.append(f"  {name:26s} measured {shown:>10} [{status}]")
        if args.out:
            lines.append(f"written to {args.out}")
        print("\n".join(lines))
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    serve(
        host=args.host,
        port=args.port,
        run_dir=args.run_dir,
        master_seed=args.seed,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maserbench",
        description="Virtual maser bench: simulate, analyze, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sim_args(p):
        p.add_argument("--config", help="SimConfig JSON file")
        p.add_argument("--detuning-mhz", type=float, default=0.0)
        p.add_argument("--energy-mj", type=float, default=None)
        p.add_argument("--duration-us", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")

    p_sim = sub.add_parser("simulate", help="run one shot")
    add_sim_args(p_sim)
    p_sim.add_argument("--out-dir", help="write envelope/trace/metrics here")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="shots across a detuning list")
    add_sim_args(p_sweep)
    p_sweep.add_argument(
        "--detunings-mhz",
        default="0,0.5,1.0,1.5",
        help="comma-separated detunings in MHz",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="metrics from a trace CSV")
    p_an.add_argument("trace")
    p_an.add_argument("--sidecar", help="trace sidecar JSON (default: <trace>.json)")
    p_an.add_argument("--out-dir")
    p_an.add_argument("--json", action="store_true")
    p_an.set_defaults(func=_cmd_analyze)

    p_fit = sub.add_parser("fit-s11", help="Q and coupling from an S11 CSV")
    p_fit.add_argument("csv")
    p_fit.add_argument("--json", action="store_true")
    p_fit.set_defaults(func=_cmd_fit_s11)

    p_cal = sub.add_parser("calibrate", help="run the calibration procedure")
    p_cal.add_argument("--fast", action="store_true", help="skip slow checks")
    p_cal.add_argument("--out", help="write the result JSON here")
    p_cal.add_argument("--seed", type=int, default=0)
    p_cal.add_argument("--json", action="store_true")
    p_cal.set_defaults(func=_cmd_calibrate)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8765)
    p_srv.add_argument("--run-dir", default=None)
    p_srv.add_argument("--seed", type=int, default=0)
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IoFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaserBenchError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
