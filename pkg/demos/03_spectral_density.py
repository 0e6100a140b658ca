"""Bath spectral densities: full bath, exact embedded bath, and Lorentzian primary peaks."""

import numpy as np

from spinphonon import embed, spectral_density_effective, spectral_density_full, synthetic_dataset

ds = synthetic_dataset(n_modes=60, seed=7, freq_band=(50.0, 800.0))
gc = ds.couplings()
emb = embed(gc, ds.modes)

T = 300.0
full = spectral_density_full(gc, ds.modes, T)
exact = spectral_density_effective(emb, T, omega_max=full.omega_max)
lor = spectral_density_effective(emb, T, method="lorentzian", omega_max=full.omega_max)

dev = np.max(np.abs(exact.values - full.values)) / full.values.max()
print(f"exact embedded vs full bath: max deviation {dev:.2e} of the peak value")

w = full.omega
for name, sd in (("full", full), ("lorentzian", lor)):
    comp = sd.values.sum(axis=0)
    top = np.argsort(comp[w > 0])[-3:][::-1]
    print(f"{name:>10}: strongest emission at", np.round(w[w > 0][top], 1), "cm^-1")
print("primary lifetimes (FWHM, cm^-1):", np.round(lor.widths, 3))

i = np.argmin(np.abs(w - 200.0))
j = np.argmin(np.abs(w + 200.0))
print(f"S_x(+200)/S_x(-200) = {full.values[0, i] / full.values[0, j]:.4f}")
