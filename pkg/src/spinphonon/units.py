"""Unit system and physical constants.

Energies and frequencies are carried in wavenumbers (cm^-1) with hbar = 1,
so an energy ``E`` in cm^-1 evolves phases at the angular frequency
``2*pi*c*E``.  Temperatures are in kelvin, magnetic fields in tesla.
Times handed to or returned from public functions are in picoseconds
(trajectories) or seconds (T1/T2); internally the natural time unit is
``1 / (2*pi*c * 1 cm^-1)``.

Constants come from ``scipy.constants`` (CODATA).
"""

import numpy as np
from scipy import constants as _sc

_pc = _sc.physical_constants

#: Speed of light in cm/s.
C_CM_PER_S = _sc.c * 100.0

#: mu_B / (h c) in cm^-1 T^-1.
MU_B_CM1_PER_T = _pc["Bohr magneton in inverse meter per tesla"][0] / 100.0

#: k_B / (h c) in cm^-1 K^-1.
K_B_CM1_PER_K = _pc["Boltzmann constant in inverse meter per kelvin"][0] / 100.0

#: Angular frequency (rad/s) of a 1 cm^-1 energy.
RAD_PER_S_PER_CM1 = 2.0 * np.pi * C_CM_PER_S

#: Angular frequency (rad/ps) of a 1 cm^-1 energy.
RAD_PER_PS_PER_CM1 = RAD_PER_S_PER_CM1 * 1e-12

#: Harmonic-oscillator length sqrt(hbar / (1 amu * 2 pi c * 1 cm^-1)) in angstrom.
#: A mass-weighted displacement x (sqrt(amu) angstrom) of a mode at w cm^-1
#: maps to the dimensionless coordinate q = x * sqrt(w) / HO_LENGTH_ANGSTROM.
HO_LENGTH_ANGSTROM = np.sqrt(
    _sc.hbar / (_pc["atomic mass constant"][0] * RAD_PER_S_PER_CM1)
) / 1e-10


def kelvin_to_cm1(temperature):
    """Thermal energy k_B T in cm^-1."""
    return K_B_CM1_PER_K * np.asarray(temperature, dtype=float)


def ps_to_natural(t_ps):
    return np.asarray(t_ps, dtype=float) * RAD_PER_PS_PER_CM1


def natural_to_ps(t_nat):
    return np.asarray(t_nat, dtype=float) / RAD_PER_PS_PER_CM1


def rate_to_per_second(rate_cm1):
    """Convert a rate in natural units (cm^-1) to s^-1."""
    return rate_cm1 * RAD_PER_S_PER_CM1
