import warnings

import numpy as np
import pytest

from spinphonon.bath import spectral_density_full
from spinphonon.dynamics import (
    RedfieldModel,
    extract_rates,
    fidelity,
    fit_rates,
    gibbs_state,
    liouvillian,
    propagate,
    redfield_tensor,
    stationary_state,
)
from spinphonon.dynamics.redfield import analyze, coherent_state, excited_state
from spinphonon.errors import MultiExponentialWarning, SpectralRangeError
from spinphonon.spin import hamiltonian_from_field, spin_operators
from spinphonon.units import K_B_CM1_PER_K, natural_to_ps, rate_to_per_second

import _oracles


def sx_model(w0=50.0, mode=50.0, g=0.01, T=50.0, sigma=2.0, s=0.5, **kw):
    G = np.zeros((3, 1))
    G[0, 0] = g
    window = kw.pop("omega_max", None) or 1.25 * max(mode, 2 * s * w0)
    sd = spectral_density_full(G, [mode], T, broadening=sigma, omega_max=window)
    return RedfieldModel(hamiltonian_from_field((0, 0, w0), s), list(spin_operators(s)), sd, **kw)


def pop_block(model):
    n = model.dim
    R = redfield_tensor(model)
    idx = np.arange(n) * (n + 1)
    return np.real(R[np.ix_(idx, idx)])


def test_zero_bath_is_unitary():
    H = hamiltonian_from_field((0, 0, 3.0))
    zero = [lambda w: np.zeros_like(w)] * 3
    m = RedfieldModel(H, list(spin_operators(0.5)), zero)
    assert np.all(redfield_tensor(m) == 0)
    plus = np.full((2, 2), 0.5)
    t = natural_to_ps(np.linspace(0, 10, 41))
    res = propagate(m, plus, t)
    Sx = spin_operators(0.5)[0]
    assert np.allclose(res.expect(Sx), 0.5 * np.cos(3.0 * np.linspace(0, 10, 41)), atol=1e-9)
    assert res.T1 == np.inf and res.T2 == np.inf


def test_golden_rule_rates_and_detailed_balance():
    T, w0 = 50.0, 50.0
    m = sx_model(T=T, w0=w0)
    P = pop_block(m)
    down, up = P[0, 1], P[1, 0]  # row = destination; index 0 is the lower level
    S = m.spectra
    assert down == pytest.approx(0.25 * S(w0)[0], rel=1e-12)
    assert up == pytest.approx(0.25 * S(-w0)[0], rel=1e-12)
    assert up / down == pytest.approx(np.exp(-w0 / (K_B_CM1_PER_K * T)), rel=1e-6)
    ref = _oracles.golden_rule_t1_rate(w0, [50.0], [0.01], T, 2.0)
    T1, _ = extract_rates(m)
    assert 1.0 / T1 == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_population_columns_sum_to_zero(s):
    m = sx_model(s=s, mode=60.0, sigma=20.0)
    P = pop_block(m)
    assert np.max(np.abs(P.sum(axis=0))) < 1e-12 * np.abs(P).max()
    off = P - np.diag(np.diag(P))
    assert np.all(off >= 0)


@pytest.mark.parametrize("T", [20.0, 100.0, 300.0])
def test_gibbs_fixed_point(T):
    m = sx_model(T=T)
    rho = stationary_state(m)
    assert fidelity(rho, gibbs_state(m.hamiltonian, T)) > 1 - 1e-6


def test_spin_one_gibbs_fixed_point():
    m = sx_model(s=1.0, T=40.0)
    assert fidelity(stationary_state(m), gibbs_state(m.hamiltonian, 40.0)) > 1 - 1e-6


def test_pure_dephasing_has_infinite_t1():
    G = np.zeros((3, 1))
    G[2, 0] = 0.05
    sd = spectral_density_full(G, [3.0], 100.0, broadening=2.0, omega_max=100.0)
    m = RedfieldModel(hamiltonian_from_field((0, 0, 50.0)), list(spin_operators(0.5)), sd)
    T1, T2 = extract_rates(m)
    assert T1 == np.inf
    assert np.isfinite(T2) and T2 > 0


def test_t2_is_twice_t1_for_transverse_coupling():
    T1, T2 = extract_rates(sx_model())
    assert T2 / T1 == pytest.approx(2.0, rel=1e-9)


def test_detuned_mode_follows_gaussian_tail():
    sigma, w0 = 4.0, 50.0
    T1_res, _ = extract_rates(sx_model(mode=w0, sigma=sigma, T=1.0))
    T1_det, _ = extract_rates(sx_model(mode=w0 + 12.0, sigma=sigma, T=1.0))
    # emission dominates at 1 K; the ratio of S(w0) values is the Gaussian tail
    ratio = T1_det / T1_res
    assert ratio == pytest.approx(np.exp(0.5 * (12.0 / sigma) ** 2) * (w0 + 12.0) / w0, rel=1e-6)


def test_field_scaling_flat_bath():
    # a very broad line is flat near w0; coupling g scales with B
    a = extract_rates(sx_model(w0=1.0, mode=300.0, sigma=2000.0, g=1e-3, omega_max=5000.0))[0]
    b = extract_rates(sx_model(w0=2.0, mode=300.0, sigma=2000.0, g=2e-3, omega_max=5000.0))[0]
    assert a / b == pytest.approx(4.0, rel=0.05)


def test_range_error_names_frequency():
    m = sx_model(w0=50.0, mode=10.0, omega_max=20.0)
    with pytest.raises(SpectralRangeError) as info:
        redfield_tensor(m)
    assert abs(info.value.frequency) == pytest.approx(50.0)


def test_propagation_invariants_and_relaxation():
    m = sx_model(g=0.05, sigma=5.0)
    T1, T2 = extract_rates(m)
    t_ps = np.linspace(0, 8 * T1 * 1e12, 60)
    res = propagate(m, excited_state(m), t_ps)
    assert np.max(res.trace_error()) < 1e-9
    assert np.max(np.abs(res.rho - res.rho.conj().transpose(0, 2, 1))) < 1e-10
    gibbs = gibbs_state(m.hamiltonian, 50.0)
    assert np.allclose(res.rho[-1], gibbs, atol=1e-3)
    # <S_z> relaxes exponentially at 1/T1
    Sz = spin_operators(0.5)[2]
    eq = np.real(np.trace(gibbs @ Sz))
    y = res.expect(Sz) - eq
    mid = len(t_ps) // 2
    assert y[mid] / y[0] == pytest.approx(np.exp(-t_ps[mid] * 1e-12 / T1), rel=1e-6)


def test_non_secular_still_preserves_trace():
    m = sx_model(g=0.05, sigma=5.0, secular=False)
    R = redfield_tensor(m)
    n = m.dim
    trace_row = np.eye(n).ravel() @ R
    assert np.max(np.abs(trace_row)) < 1e-15
    T1, _ = extract_rates(m)
    res = propagate(m, excited_state(m), np.linspace(0, T1 * 1e12, 20))
    assert np.max(res.trace_error()) < 1e-9


def test_rho0_validation():
    m = sx_model()
    with pytest.raises(ValueError):
        propagate(m, np.diag([0.7, 0.7]), [0.0, 1.0])
    with pytest.raises(ValueError):
        propagate(m, np.array([[0.5, 1.0], [0.0, 0.5]]), [0.0, 1.0])
    with pytest.raises(ValueError):
        propagate(m, np.diag([1.5, -0.5]), [0.0, 1.0])
    with pytest.raises(ValueError):
        propagate(m, np.diag([1.0, 0.0]), [1.0, 2.0])


def test_fit_agrees_with_eigenvalues():
    m = sx_model(g=0.02)
    T1, T2 = extract_rates(m)
    f1, f2 = fit_rates(m)
    assert f1 / T1 == pytest.approx(1.0, abs=5e-3)
    assert f2 / T2 == pytest.approx(1.0, abs=5e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", MultiExponentialWarning)
        extract_rates(m, cross_check=True)


def test_spin_one_ladder_relaxes_single_exponentially():
    # degenerate +-1 coherences mix, so only the population decay is single-exponential
    m = sx_model(s=1.0, mode=50.0, sigma=20.0, T=300.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        T1, _ = extract_rates(m, cross_check=True)
    assert np.isfinite(T1)
    assert not [r for r in rec if str(r.message).startswith("T1")]


def test_zero_field_split_spin_one_is_multi_exponential():
    Sx, Sy, Sz = spin_operators(1.0)
    kT = K_B_CM1_PER_K * 10.0
    kms = lambda w: 1e-4 * np.exp(np.asarray(w) / (2 * kT))
    zero = lambda w: np.zeros_like(np.asarray(w, dtype=float))
    m = RedfieldModel(20 * Sz @ Sz + 5 * Sz, [Sx, Sy, Sz], [kms, zero, zero])
    with pytest.warns(MultiExponentialWarning) as rec:
        extract_rates(m, cross_check=True)
    w = [r.message for r in rec if "T1" in str(r.message)][0]
    assert w.eigen_rate > 0 and w.fit_rate > 0
    assert fidelity(stationary_state(m), gibbs_state(m.hamiltonian, 10.0)) > 1 - 1e-9


def test_cross_correlations_reduce_to_diagonal_for_single_operator():
    a = sx_model(cross_correlations=True)
    b = sx_model()
    assert np.allclose(redfield_tensor(a), redfield_tensor(b))


def test_cross_correlations_change_rates_for_shared_mode():
    G = np.array([[0.01], [0.01], [0.0]])
    sd = spectral_density_full(G, [50.0], 50.0, broadening=2.0)
    H = hamiltonian_from_field((0, 0, 50.0))
    on = RedfieldModel(H, list(spin_operators(0.5)), sd, cross_correlations=True, secular=False)
    off = RedfieldModel(H, list(spin_operators(0.5)), sd, secular=False)
    # |<g|Sx+Sy|e>|^2 equals the incoherent 1/4 + 1/4, so populations agree;
    # the non-secular coherence transfer term does not
    assert np.allclose(pop_block(on), pop_block(off))
    assert not np.allclose(redfield_tensor(on), redfield_tensor(off))


def test_rate_analysis_eigenvalues():
    an = analyze(sx_model())
    assert np.min(np.abs(an.population_eigenvalues)) < 1e-18
    assert an.coherence_eigenvalues.size == 2
    assert np.all(an.coherence_eigenvalues.real < 0)
    assert rate_to_per_second(-an.coherence_eigenvalues.real.max()) == pytest.approx(1 / an.T2)


def test_coherent_state_is_equal_superposition():
    m = sx_model()
    rho = coherent_state(m)
    assert np.allclose(np.diag(rho), 0.5)
