"""Redfield relaxation against exact spin + oscillator dynamics for one resonant mode."""

import numpy as np

from spinphonon.bath import spectral_density_full
from spinphonon.dynamics import (
    RedfieldModel,
    ReducedHamiltonian,
    decay_rate,
    exact_oracle,
    extract_rates,
    required_levels,
    stationary_state,
)
from spinphonon.spin import hamiltonian_from_field, spin_operators
from spinphonon.units import natural_to_ps, rate_to_per_second

w0, T, sigma, g = 50.0, 50.0, 2.0, 0.063
G = np.array([[g], [0.0], [0.0]])
model = RedfieldModel(hamiltonian_from_field((0, 0, w0)), list(spin_operators(0.5)),
                      spectral_density_full(G, [w0], T, broadening=sigma))
T1, T2 = extract_rates(model)
print(f"Redfield: T1 = {T1:.4e} s, T2 = {T2:.4e} s")

levels = required_levels(w0 - 8 * sigma, T)
red = ReducedHamiltonian((0, 0, w0), [w0], G, [levels])
t = natural_to_ps(np.linspace(0, 8, 161))
res = exact_oracle(red, T, t, broadening=sigma)
eq = np.real(np.trace(stationary_state(model) @ spin_operators(0.5)[2]))
slope = decay_rate(t, res.spin[:, 2], eq, window=natural_to_ps(np.array([2.5, 7.5])))
print(f"exact dynamics ({levels} oscillator levels, disorder-averaged): "
      f"T1 from initial slope = {1 / rate_to_per_second(slope):.4e} s")

print(f"relative difference {abs(rate_to_per_second(slope) * T1 - 1):.2e}")
