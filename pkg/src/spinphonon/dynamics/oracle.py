"""Numerically exact spin + primary-mode dynamics.

The reduced Hamiltonian keeps the spin and its (at most three) primary
modes as explicit truncated oscillators::

    H_red = sum_a h_a S_a + sum_ar g_ar S_a x_r + sum_r w_r (n_r + 1/2)

with ``x_r = (a_r + a_r^dag) / sqrt(2 w_r)``.  The initial state is the spin
state times a thermal oscillator state, i.e. a Boltzmann-weighted mixture of
oscillator number states, and every component is propagated unitarily.

A finite mode lifetime can be imposed by averaging over a static Gaussian
distribution of mode frequencies (deterministic uniform quadrature).  This
is the microscopic picture behind a Gaussian-broadened spectral density.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..errors import ConvergenceError
from ..spin import spin_operators
from ..units import K_B_CM1_PER_K, ps_to_natural

#: Highest retained oscillator level must hold less than this population.
TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class ReducedHamiltonian:
    h: np.ndarray
    freqs: np.ndarray
    couplings: np.ndarray
    levels: tuple
    s: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float).reshape(3))
        w = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "freqs", w)
        g = np.asarray(self.couplings, dtype=float).reshape(3, w.size)
        object.__setattr__(self, "couplings", g)
        lv = tuple(int(x) for x in np.broadcast_to(self.levels, w.shape))
        if any(x < 2 for x in lv):
            raise ValueError("each oscillator needs at least 2 levels")
        object.__setattr__(self, "levels", lv)
        if w.size > 3:
            raise ValueError("the exact oracle handles at most 3 primary modes")

    @classmethod
    def from_embedding(cls, emb, h, levels, s=0.5):
        return cls(h, emb.primary_freqs, emb.couplings, levels, s)


@dataclass
class OracleResult:
    times_ps: np.ndarray
    spin: np.ndarray  # (n_t, 3): <Sx>, <Sy>, <Sz>


def top_level_population(omega, T, levels):
    """Thermal population of the highest of ``levels`` truncated levels."""
    if T == 0:
        return 0.0
    x = np.exp(-omega / (K_B_CM1_PER_K * T))
    return float(x ** (levels - 1) * (1 - x) / (1 - x**levels))


def required_levels(omega, T, tol=TRUNCATION_TOL):
    L = 2
    while top_level_population(omega, T, L) >= tol:
        L += 1
    return L


def _ladder(L):
    return np.diag(np.sqrt(np.arange(1, L)), k=1)


def _thermal(omega, T, L):
    if T == 0:
        p = np.zeros(L)
        p[0] = 1.0
        return p
    p = np.exp(-omega * np.arange(L) / (K_B_CM1_PER_K * T))
    return p / p.sum()


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _operators(red, freqs):
    S = spin_operators(red.s)
    ds = S[0].shape[0]
    eyes = [np.eye(L) for L in red.levels]
    H = sum(ha * _kron_all([Sa] + eyes) for ha, Sa in zip(red.h, S))
    for r, (w, L) in enumerate(zip(freqs, red.levels)):
        a = _ladder(L)
        local = [np.eye(ds)] + [np.eye(Lr) for Lr in red.levels]
        local[r + 1] = w * (a.T @ a + 0.5 * np.eye(L))
        H = H + _kron_all(local)
        x = (a + a.T) / np.sqrt(2.0 * w)
        for alpha in range(3):
            g = red.couplings[alpha, r]
            if g:
                local = [S[alpha]] + [np.eye(Lr) for Lr in red.levels]
                local[r + 1] = x
                H = H + g * _kron_all(local)
    spin_obs = [_kron_all([Sa] + eyes) for Sa in S]
    return H, spin_obs


def _evolve(red, freqs, T, rho_spin, t_nat):
    H, obs = _operators(red, freqs)
    E, V = np.linalg.eigh(H)
    rho_bath = _kron_all([np.diag(_thermal(w, T, L)) for w, L in zip(freqs, red.levels)])
    rho0 = np.kron(rho_spin, rho_bath)
    rt = V.conj().T @ rho0 @ V
    ph = np.exp(-1j * np.outer(t_nat, E))
    out = np.empty((t_nat.size, 3))
    for k, O in enumerate(obs):
        M = (V.conj().T @ O @ V).T * rt  # M_ij = O_ji rho_ij
        out[:, k] = np.real(np.einsum("ti,ij,tj->t", ph, M, ph.conj()))
    return out


def exact_oracle(red, T, t_grid, rho_spin0=None, broadening=None, n_ensemble=401, span=8.0):
    """Spin expectation values from exact spin + oscillator dynamics.

    Parameters
    ----------
    red : ReducedHamiltonian
    T : float
        Temperature (K) of the initial oscillator states.
    t_grid : array_like
        Times in ps.
    rho_spin0 : ndarray, optional
        Initial spin density matrix; defaults to the upper Zeeman eigenstate.
    broadening : float, optional
        Standard deviation (cm^-1) of a static Gaussian spread of mode
        frequencies.  ``None`` runs a single unitary simulation.
    n_ensemble, span :
        Uniform quadrature points per mode over ``+-span * broadening``.

    Returns
    -------
    OracleResult
    """
    for w, L in zip(red.freqs, red.levels):
        low = w - (span * broadening if broadening else 0.0)
        need = required_levels(max(low, 1e-12), T)
        if top_level_population(max(low, 1e-12), T, L) >= TRUNCATION_TOL:
            raise ConvergenceError(
                f"{L} levels are not enough for a {w:g} cm^-1 mode at {T:g} K; use at least {need}",
                suggested_levels=need,
            )
    S = spin_operators(red.s)
    if rho_spin0 is None:
        Hs = sum(ha * Sa for ha, Sa in zip(red.h, S))
        _, v = np.linalg.eigh(Hs)
        rho_spin0 = np.outer(v[:, -1], v[:, -1].conj())
    rho_spin0 = np.asarray(rho_spin0, dtype=complex)
    t_nat = ps_to_natural(t_grid)

    if not broadening:
        spin = _evolve(red, red.freqs, T, rho_spin0, t_nat)
        return OracleResult(np.asarray(t_grid, dtype=float), spin)

    x = np.linspace(-span, span, n_ensemble)
    wts = np.exp(-0.5 * x**2)
    acc = np.zeros((t_nat.size, 3))
    total = 0.0
    for idx in product(range(n_ensemble), repeat=red.freqs.size):
        freqs = red.freqs + broadening * x[list(idx)]
        if np.any(freqs <= 0):
            continue
        wt = float(np.prod(wts[list(idx)]))
        acc += wt * _evolve(red, freqs, T, rho_spin0, t_nat)
        total += wt
    return OracleResult(np.asarray(t_grid, dtype=float), acc / total)


def decay_rate(times_ps, values, equilibrium, window=None):
    """Initial relaxation rate (cm^-1) of ``values`` toward ``equilibrium``.

    Fits ``ln((v(t) - v_eq) / (v(0) - v_eq))`` linearly over ``window``
    (ps; default the whole trace) and returns minus the slope in natural
    units.
    """
    t = ps_to_natural(times_ps)
    f = (np.asarray(values) - equilibrium) / (values[0] - equilibrium)
    sel = np.ones_like(t, dtype=bool)
    if window is not None:
        lo, hi = ps_to_natural(window)
        sel = (t >= lo) & (t <= hi)
    slope = np.polyfit(t[sel], np.log(f[sel]), 1)[0]
    return -slope
