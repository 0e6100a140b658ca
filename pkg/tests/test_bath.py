import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from spinphonon.bath import (
    bose_occupation,
    classical_occupation,
    primary_lifetimes,
    spectral_density_effective,
    spectral_density_full,
    symmetric_grid,
)
from spinphonon.embed import embed
from spinphonon.errors import SpectralRangeError
from spinphonon.units import K_B_CM1_PER_K

import _oracles
from conftest import random_couplings


def test_bose_limits():
    assert bose_occupation(100.0, 0.0) == 0.0
    kT = K_B_CM1_PER_K * 300.0
    assert bose_occupation(1e-3, 300.0) == pytest.approx(kT / 1e-3, rel=1e-5)
    assert bose_occupation(100.0, 300.0) == pytest.approx(1 / np.expm1(100 / kT))
    with pytest.raises(ValueError):
        bose_occupation(0.0, 10.0)
    with pytest.raises(ValueError):
        bose_occupation(-1.0, 10.0)
    assert isinstance(bose_occupation(50.0, 10.0), float)


def test_classical_occupation():
    assert classical_occupation(200.0, 100.0) == pytest.approx(K_B_CM1_PER_K * 100 / 200)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 4000.0), st.floats(1.0, 1000.0))
def test_bose_detailed_balance_identity(w, T):
    assume(w / (K_B_CM1_PER_K * T) < 300.0)
    n = bose_occupation(w, T)
    assert (n + 1) / n == pytest.approx(np.exp(w / (K_B_CM1_PER_K * T)), rel=1e-9)


def test_grid_exactly_symmetric():
    x = symmetric_grid(123.4, 8192)
    assert np.array_equal(x, -x[::-1])
    assert x[-1] == pytest.approx(123.4)


@pytest.mark.parametrize("flavor", ["quantum", "classical"])
@pytest.mark.parametrize("T", [5.0, 300.0])
def test_full_bath_matches_loop_oracle(rng, flavor, T):
    g, w = random_couplings(rng, 3, 7)
    sd = spectral_density_full(g, w, T, broadening=11.0, flavor=flavor)
    probe = np.array([-812.0, -40.0, 0.0, 33.0, 700.0, 2100.0])
    got = sd.evaluate(probe)
    for a in range(3):
        ref = [_oracles.spectral_density(x, w, g[a], T, 11.0, classical=flavor == "classical") for x in probe]
        assert np.allclose(got[a], ref, rtol=1e-12, atol=0)


def test_zero_temperature_has_no_absorption():
    sd = spectral_density_full([[1e-2]], [100.0], 0.0, broadening=5.0)
    assert sd(-100.0)[0] == pytest.approx(0.0, abs=1e-300)
    assert sd(100.0)[0] > 0


def test_sum_rule():
    g, w = np.array([[1e-2, 2e-2]]), np.array([300.0, 500.0])
    T = 200.0
    sd = spectral_density_full(g, w, T, broadening=10.0, n_points=16384)
    n = bose_occupation(w, T)
    expect = np.pi * np.sum(g[0] ** 2 / w * (2 * n + 1))
    assert sd.integrated_weight()[0] == pytest.approx(expect, rel=1e-9)


def test_out_of_window_raises():
    sd = spectral_density_full([[1e-2]], [100.0], 10.0, omega_max=200.0)
    with pytest.raises(SpectralRangeError) as info:
        sd.evaluate(250.0)
    assert info.value.frequency == 250.0


def test_cross_matrix_consistent_with_diagonal(rng):
    g, w = random_couplings(rng, 3, 5)
    sd = spectral_density_full(g, w, 100.0, broadening=30.0)
    M = sd.matrix(w[2])
    assert np.allclose(np.diag(M), sd.evaluate(w[2]))
    assert np.allclose(M, M.T)
    assert np.all(np.linalg.eigvalsh(M) > -1e-18)


def test_select_subset(rng):
    g, w = random_couplings(rng, 3, 6)
    a = spectral_density_full(g, w, 50.0, select=[1, 4])
    b = spectral_density_full(g[:, [1, 4]], w[[1, 4]], 50.0, omega_max=a.omega_max)
    assert np.allclose(a.values, b.values)


@pytest.mark.parametrize("flavor", ["quantum", "classical"])
def test_exact_effective_reproduces_full(rng, flavor):
    g, w = random_couplings(rng, 3, 30)
    emb = embed(g, w)
    full = spectral_density_full(g, w, 77.0, flavor=flavor, n_points=2048)
    eff = spectral_density_effective(emb, 77.0, flavor=flavor, omega_max=full.omega_max, n_points=2048)
    peak = full.values.max()
    assert np.max(np.abs(eff.values - full.values)) < 1e-9 * peak


def test_lorentzian_width_is_golden_rule_decay():
    # two modes, one coupled; the primary leaks into the residual mode
    w = np.array([200.0, 210.0])
    g = np.array([[1e-2, 1e-2], [0, 0], [0, 0]])
    emb = embed(g, w)
    gam = emb.gamma[0, 0]
    wr, wj = emb.primary_freqs[0], emb.residual_freqs[0]
    s = 16.0
    expect = np.pi * gam**2 / (2 * wr * wj) * np.exp(-0.5 * ((wr - wj) / s) ** 2) / (np.sqrt(2 * np.pi) * s)
    assert primary_lifetimes(emb, s)[0] == pytest.approx(expect)
    lor = spectral_density_effective(emb, 300.0, method="lorentzian", omega_max=2e4)
    assert lor.widths[0] == pytest.approx(expect)
    # the primary peak keeps its integrated weight
    n = bose_occupation(wr, 300.0)
    weight = np.pi * emb.couplings[0, 0] ** 2 / wr * (2 * n + 1)
    assert lor.integrated_weight()[0] == pytest.approx(weight, rel=1e-3)


def test_effective_rejects_bad_method(rng):
    g, w = random_couplings(rng, 3, 5)
    with pytest.raises(ValueError):
        spectral_density_effective(embed(g, w), 10.0, method="bogus")


def test_unknown_flavor():
    with pytest.raises(ValueError):
        spectral_density_full([[1.0]], [10.0], 10.0, flavor="semi")


def test_bose_closed_forms():
    T = 300.0
    kT = K_B_CM1_PER_K * T
    assert bose_occupation(kT, T) == pytest.approx(1 / (np.e - 1), rel=1e-12)
    assert bose_occupation(kT, T) == pytest.approx(0.581977, abs=5e-7)
    assert bose_occupation(200.0, 300.0) == pytest.approx(1 / np.expm1(200.0 / 208.509), rel=1e-4)
    assert bose_occupation(200.0, 300.0) == pytest.approx(1 / np.expm1(200.0 / kT), rel=1e-14)


def test_single_mode_zero_temperature_weight():
    g, w0 = 2e-2, 150.0
    sd = spectral_density_full([[g]], [w0], 0.0, broadening=5.0)
    x, v = sd.omega, sd.values[0]
    # only the far tail of the emission peak reaches negative frequencies
    assert np.all(v[x < 0] < 1e-150 * v.max())
    assert sd.integrated_weight()[0] == pytest.approx(np.pi * g**2 / w0, rel=1e-9)


def test_quantum_density_nonnegative_and_classical_symmetric(rng):
    g, w = random_couplings(rng, 3, 12)
    q = spectral_density_full(g, w, 40.0, flavor="quantum").values
    c = spectral_density_full(g, w, 40.0, flavor="classical").values
    assert np.all(q >= 0)
    assert np.max(np.abs(c - c[:, ::-1])) < 1e-12 * c.max()


def test_quantum_approaches_classical_at_high_temperature():
    w = np.array([30.0, 60.0, 90.0])
    g = np.array([[1e-2, 2e-2, 1.5e-2]])
    T = 50.0 * w.max() / K_B_CM1_PER_K
    q = spectral_density_full(g, w, T, broadening=10.0)
    c = spectral_density_full(g, w, T, broadening=10.0, flavor="classical")
    probe = np.linspace(-100, 100, 81)
    assert np.max(np.abs(q(probe) / c(probe) - 1)) < 0.03


def test_linear_in_coupling_squared(rng):
    g, w = random_couplings(rng, 3, 6)
    a = spectral_density_full(g, w, 100.0).values
    b = spectral_density_full(3.0 * g, w, 100.0).values
    normal = a > 1e-290
    assert np.allclose(b[normal], 9.0 * a[normal], rtol=1e-13, atol=0)


def test_exact_effective_conserves_integrated_weight(rng):
    g, w = random_couplings(rng, 3, 40)
    full = spectral_density_full(g, w, 150.0)
    eff = spectral_density_effective(embed(g, w), 150.0, omega_max=full.omega_max)
    assert np.allclose(eff.integrated_weight(), full.integrated_weight(), rtol=1e-8, atol=0)


def test_lorentzian_without_gamma_is_plain_gaussian_peaks():
    w = np.array([100.0, 300.0, 500.0])
    g = np.diag([1e-2, 2e-2, 3e-2])
    emb = embed(g, w)
    lor = spectral_density_effective(emb, 50.0, method="lorentzian")
    full = spectral_density_full(g, w, 50.0, omega_max=lor.omega_max)
    assert np.allclose(lor.widths, 0.0, atol=1e-20)
    assert np.allclose(lor.values, full.values, rtol=1e-6, atol=1e-12 * full.values.max())
