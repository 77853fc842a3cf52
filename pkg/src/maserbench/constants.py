"""Physical constants and fixed instrument numbers.

The spin transition frequency is the zero-field X-Z splitting of the
photoexcited pentacene triplet; it is a property of the gain crystal, not
of any tunable element, so it lives here as a module constant.
"""

PLANCK_CONSTANT_J_S = 6.62607015e-34
SPEED_OF_LIGHT_M_S = 299792458.0

# Pentacene triplet X-Z transition (Hz). The resonator is tuned to it.
SPIN_TRANSITION_HZ = 1.4495e9

# Pump photon energy at the standard 532 nm doubled-Nd:YAG wavelength (J).
PUMP_WAVELENGTH_M = 532e-9
PUMP_PHOTON_ENERGY_J = PLANCK_CONSTANT_J_S * SPEED_OF_LIGHT_M_S / PUMP_WAVELENGTH_M
