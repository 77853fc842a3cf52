"""Exception hierarchy for the bench.

Every error raised by this package derives from MaserBenchError so callers
can catch the whole family at one point (the CLI maps them to exit codes).
"""


class MaserBenchError(Exception):
    """Base class for all errors raised by maserbench."""


class ConfigError(MaserBenchError):
    """A configuration value violates a documented constraint."""


class HeightOutOfRange(ConfigError):
    """Requested tuning-ceiling height lies outside the mechanical travel."""


class FrequencyUnreachable(ConfigError):
    """Requested mode frequency lies outside the tuning curve's span."""


class InvalidGrid(ConfigError):
    """Frequency grid is empty, too short, or not strictly increasing."""


class NoResonanceFound(MaserBenchError):
    """Reflection trace has no dip deep enough to count as a resonance."""


class BandwidthOutsideSpan(MaserBenchError):
    """A half-power crossing falls outside the swept frequency span."""


class IntegrationFailure(MaserBenchError):
    """The ODE solver failed to advance the burst simulation."""


class NonPhysicalState(MaserBenchError):
    """Simulation produced NaN/Inf or an inversion beyond the spin count."""


class NoBurst(MaserBenchError):
    """Record never rises above the noise floor; pulse metrics undefined."""


class UndersampledCarrier(ConfigError):
    """Sample rate is too low for the requested carrier frequency."""


class EmptyTrace(ConfigError):
    """Operation requires a non-empty record."""


class InsufficientCycles(MaserBenchError):
    """Fewer than two envelope maxima; no oscillation period to measure."""


class OrderTooLarge(ConfigError):
    """Requested autoregressive order is too large for the record length."""


class NonFiniteInput(ConfigError):
    """Input samples contain NaN or Inf."""


class FrequencyOutOfRange(ConfigError):
    """Requested spectrum frequencies fall outside the Nyquist band."""


class NoPeaks(MaserBenchError):
    """Spectrum has no peaks above the prominence threshold."""


class NoSplitting(MaserBenchError):
    """Spectrum does not resolve two peaks; no splitting to report."""


class IoFailure(MaserBenchError):
    """Reading or writing bench artifacts failed."""
