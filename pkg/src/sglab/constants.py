"""Physical constants (CODATA 2018 exact SI values, SI units)."""

import math

PLANCK = 6.626070150e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
SPEED_OF_LIGHT = 299792458.0  # m/s
BOLTZMANN = 1.380649000e-23  # J/K

HBAR = PLANCK / (2.0 * math.pi)
FLUX_QUANTUM = PLANCK / (2.0 * ELEMENTARY_CHARGE)  # Wb
