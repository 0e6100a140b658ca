"""Split a 192-mode bath into three primary modes and a residual bath."""

import numpy as np

from spinphonon import embed, roundtrip_check, synthetic_dataset
from spinphonon.embed import naive_cutoff

ds = synthetic_dataset(n_modes=192, seed=1)
gc = ds.couplings()
emb = embed(gc, ds.modes)

print(f"{ds.modes.n_modes} modes -> {emb.rank} primary + {emb.residual_freqs.size} residual")
print("primary frequencies (cm^-1):", np.round(emb.primary_freqs, 2))
print("primary-mode entropies:     ", np.round(emb.entropies(), 3))
print("singular values:            ", emb.singular_values)

rep = roundtrip_check(emb, ds.modes)
print(f"reassembled Hessian: max relative w^2 error {rep.max_rel_freq_error:.2e}, "
      f"orthogonality defect {rep.orthogonality_defect:.2e}")

# only the primary modes touch the spin
print("largest residual coupling:", np.abs(gc.mass_weighted @ emb.residual_vectors).max())

kept = naive_cutoff(gc, 0.35)
print(f"a 35% coupling cutoff would keep {kept.size} of the original modes instead")
