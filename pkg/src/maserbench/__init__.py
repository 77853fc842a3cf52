"""Virtual bench for a room-temperature pulsed maser.

Four layers, importable separately:

* resonator: tunable loaded cavity, S11 sweeps, Q and coupling estimation
* dynamics: cavity-spin burst simulation, trace synthesis, sweeps
* pulse_metrics + memspec: shot analysis (power, delay, Rabi, spectra)
* bench + service + cli: operator session, persistence, HTTP API, CLI
"""

from .bench import BenchSession, ShotRecord, derived_shot_seed, import_bundle
from .calibration import (
    default_medium,
    default_pump,
    default_resonator,
    default_sim_config,
    load_default_params,
    run_calibration,
)
from .constants import (
    PLANCK_CONSTANT_J_S,
    PUMP_PHOTON_ENERGY_J,
    PUMP_WAVELENGTH_M,
    SPEED_OF_LIGHT_M_S,
    SPIN_TRANSITION_HZ,
)
from .dynamics import (
    GainMediumParams,
    PumpPulse,
    SimConfig,
    SweepEntry,
    deposit_inversion,
    detuning_sweep,
    emitted_frequency,
    simulate_burst,
    synthesize_scope_trace,
    threshold_inversion,
)
from .errors import (
    BandwidthOutsideSpan,
    ConfigError,
    EmptyTrace,
    FrequencyOutOfRange,
    FrequencyUnreachable,
    HeightOutOfRange,
    InsufficientCycles,
    IntegrationFailure,
    InvalidGrid,
    IoFailure,
    MaserBenchError,
    NoBurst,
    NonFiniteInput,
    NonPhysicalState,
    NoPeaks,
    NoResonanceFound,
    NoSplitting,
    OrderTooLarge,
    UndersampledCarrier,
)
from .memspec import (
    ArModel,
    PowerSpectrum,
    SpectralPeak,
    burg_fit,
    burst_spectrum,
    carrier_frequency,
    mem_psd,
    rabi_splitting,
    select_order,
)
from .pulse_metrics import (
    DemodEnvelope,
    PeakPower,
    PulseMetrics,
    analyze_trace,
    dbm_from_mw,
    delay_to_peak,
    demodulate,
    mw_from_dbm,
    peak_power,
    rabi_frequency_td,
)
from .resonator import (
    CouplingClass,
    CouplingRegime,
    DecayRate,
    QFactorEstimate,
    ReflectionTrace,
    ResonatorConfig,
    cavity_decay_rate,
    ceiling_frequency,
    classify_coupling,
    estimate_q_loaded,
    height_for_frequency,
    read_reflection_csv,
    reflection_trace,
    tune_ceiling,
    write_reflection_csv,
)
from .signals import (
    MaserEnvelope,
    MaserTrace,
    read_envelope_csv,
    read_trace_csv,
    write_envelope_csv,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArModel",
    "BandwidthOutsideSpan",
    "BenchSession",
    "ConfigError",
    "CouplingClass",
    "CouplingRegime",
    "DecayRate",
    "DemodEnvelope",
    "EmptyTrace",
    "FrequencyOutOfRange",
    "FrequencyUnreachable",
    "GainMediumParams",
    "HeightOutOfRange",
    "InsufficientCycles",
    "IntegrationFailure",
    "InvalidGrid",
    "IoFailure",
    "MaserBenchError",
    "MaserEnvelope",
    "MaserTrace",
    "NoBurst",
    "NonFiniteInput",
    "NonPhysicalState",
    "NoPeaks",
    "NoResonanceFound",
    "NoSplitting",
    "OrderTooLarge",
    "PLANCK_CONSTANT_J_S",
    "PUMP_PHOTON_ENERGY_J",
    "PUMP_WAVELENGTH_M",
    "PeakPower",
    "PowerSpectrum",
    "PulseMetrics",
    "PumpPulse",
    "QFactorEstimate",
    "ReflectionTrace",
    "ResonatorConfig",
    "SPEED_OF_LIGHT_M_S",
    "SPIN_TRANSITION_HZ",
    "ShotRecord",
    "SimConfig",
    "SpectralPeak",
    "SweepEntry",
    "UndersampledCarrier",
    "analyze_trace",
    "burg_fit",
    "burst_spectrum",
    "carrier_frequency",
    "cavity_decay_rate",
    "ceiling_frequency",
    "classify_coupling",
    "dbm_from_mw",
    "default_medium",
    "default_pump",
    "default_resonator",
    "default_sim_config",
    "delay_to_peak",
    "demodulate",
    "deposit_inversion",
    "derived_shot_seed",
    "detuning_sweep",
    "emitted_frequency",
    "estimate_q_loaded",
    "height_for_frequency",
    "import_bundle",
    "load_default_params",
    "mem_psd",
    "mw_from_dbm",
    "peak_power",
    "rabi_frequency_td",
    "rabi_splitting",
    "read_envelope_csv",
    "read_reflection_csv",
    "read_trace_csv",
    "reflection_trace",
    "run_calibration",
    "select_order",
    "simulate_burst",
    "synthesize_scope_trace",
    "threshold_inversion",
    "tune_ceiling",
    "write_envelope_csv",
    "write_reflection_csv",
    "write_trace_csv",
]
