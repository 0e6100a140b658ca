import numpy as np

from spinphonon.ingest import participation_norms, write_dataset
from spinphonon.synth import synthetic_dataset


def test_same_seed_same_file(tmp_path):
    write_dataset(synthetic_dataset(50, seed=42), tmp_path / "a.json")
    write_dataset(synthetic_dataset(50, seed=42), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_different_seed_differs():
    a, b = synthetic_dataset(10, seed=1), synthetic_dataset(10, seed=2)
    assert not np.array_equal(a.gradients.tensors, b.gradients.tensors)


def test_band_and_count():
    ds = synthetic_dataset(192, seed=0, freq_band=(50.0, 1500.0))
    w = ds.modes.frequencies
    assert w.size == 192
    assert w.min() >= 50.0 and w.max() <= 1500.0
    assert np.all(np.diff(w) >= 0)
    assert ds.meta["seed"] == 0


def test_gradient_magnitude_scale():
    ds = synthetic_dataset(2000, seed=3)
    t = ds.gradients.tensors
    assert 0.95e-3 < np.std(t) < 1.05e-3
    # Frobenius norm of a 3x3 N(0, s^2) matrix is about 3 s
    med = np.median(participation_norms(ds.gradients, frobenius=True))
    assert 2e-3 < med < 4e-3
