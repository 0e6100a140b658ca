"""Seeded synthetic spin-phonon datasets."""

import numpy as np

from .ingest import Dataset, GGradientSet, ModeSet
from .spin import VOPC_G_TENSOR, GTensor


def synthetic_dataset(n_modes=50, seed=42, freq_band=(50.0, 3500.0), grad_scale=1e-3,
                      g_tensor=VOPC_G_TENSOR, b_field=(0.0, 0.0, 1.0)):
    """Random molecule-like dataset.

    Frequencies are uniform in ``freq_band`` (sorted); gradient entries are
    independent ``N(0, grad_scale)``.  The same arguments always give the
    same arrays.
    """
    rng = np.random.default_rng(seed)
    lo, hi = freq_band
    freqs = np.sort(rng.uniform(lo, hi, size=n_modes))
    grads = rng.normal(0.0, grad_scale, size=(n_modes, 3, 3))
    meta = {
        "source_program": "synthetic",
        "seed": int(seed),
        "freq_band_cm1": [float(lo), float(hi)],
        "grad_scale": float(grad_scale),
    }
    return Dataset(GTensor(g_tensor), ModeSet(freqs), GGradientSet(grads), np.asarray(b_field, float), meta)
