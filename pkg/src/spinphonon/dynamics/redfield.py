"""Bloch-Redfield master equation for a spin coupled to harmonic baths.

The system couples to each bath through a Hermitian operator ``A_a``.
Working in the eigenbasis of ``H_s`` with transition frequencies
``w = E_b - E_a`` attached to the element ``|a><b|``, the dissipator is::

    D(rho) = sum_a  L_a rho A_a - A_a L_a rho + h.c.
    (L_a)_ab = 1/2 sum_b' S_ab'(E_b - E_a) (A_b')_ab

i.e. only the real (rate) part of the one-sided bath integrals is kept and
Lamb shifts are dropped.  With this convention the transition rate
``b -> a`` equals ``|A_ab|^2 S(E_b - E_a)``, the golden-rule rate.
"""

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import sqrtm

from ..bath import SpectralDensity
from ..errors import MultiExponentialWarning, NumericalError, StiffnessError
from ..units import K_B_CM1_PER_K, ps_to_natural, rate_to_per_second

#: Default secular cutoff as a multiple of the largest Redfield tensor element.
SECULAR_FACTOR = 10.0

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-10


@dataclass
class RedfieldModel:
    """Spin Hamiltonian, coupling operators and their bath spectral densities.

    Parameters
    ----------
    hamiltonian : ndarray
        Hermitian ``H_s`` in cm^-1.
    operators : sequence of ndarray
        Hermitian coupling operators ``A_a``.
    spectra : SpectralDensity or sequence of callables
        One spectral density component per operator.  Callables map an
        array of frequencies (cm^-1) to ``S(w)``.
    secular : bool
        Drop tensor elements with ``|w_ab - w_cd| > secular_cutoff``.
    secular_cutoff : float, optional
        Defaults to ``SECULAR_FACTOR`` times the largest tensor element.
    cross_correlations : bool
        Use the full ``S_ab(w)`` matrix (needs a :class:`SpectralDensity`).
    """

    hamiltonian: np.ndarray
    operators: list
    spectra: object
    secular: bool = True
    secular_cutoff: float = None
    cross_correlations: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=complex)
        if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-12 * max(1.0, np.abs(H).max()):
            raise ValueError("Hamiltonian is not Hermitian")
        self.hamiltonian = H
        ops = [np.asarray(A, dtype=complex) for A in self.operators]
        for A in ops:
            if A.shape != H.shape or np.max(np.abs(A - A.conj().T)) > 1e-12:
                raise ValueError("coupling operators must be Hermitian and match H_s")
        self.operators = ops
        if self.cross_correlations and not isinstance(self.spectra, SpectralDensity):
            raise ValueError("cross correlations need a SpectralDensity")
        if not isinstance(self.spectra, SpectralDensity) and len(self.spectra) != len(ops):
            raise ValueError("need one spectral function per coupling operator")

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @cached_property
    def eigensystem(self):
        E, V = np.linalg.eigh(self.hamiltonian)
        return E, V

    @property
    def energies(self):
        return self.eigensystem[0]

    @cached_property
    def coherence_freqs(self):
        """``w_ab = E_a - E_b`` flattened in row-major Liouville order."""
        E = self.energies
        return np.subtract.outer(E, E).ravel()

    def _spectra_on(self, Omega):
        """Spectral matrix at every ``Omega[a, b]``: shape ``(n, n, n_s, n_s)``."""
        n_s = len(self.operators)
        if isinstance(self.spectra, SpectralDensity):
            if self.cross_correlations:
                out = np.empty(Omega.shape + (n_s, n_s))
                for idx in np.ndindex(Omega.shape):
                    out[idx] = self.spectra.matrix(Omega[idx])
                return out
            diag = self.spectra.evaluate(Omega)
        else:
            diag = np.array([np.broadcast_to(f(Omega), Omega.shape) for f in self.spectra], dtype=float)
        out = np.zeros(Omega.shape + (n_s, n_s))
        for a in range(n_s):
            out[..., a, a] = diag[a]
        return out


def _eig_ops(model):
    V = model.eigensystem[1]
    return [V.conj().T @ A @ V for A in model.operators]


def _dissipator(model):
    n = model.dim
    E = model.energies
    Omega = np.subtract.outer(E, E).T  # Omega[a, b] = E_b - E_a
    S = model._spectra_on(Omega)
    A = _eig_ops(model)
    I = np.eye(n)
    R = np.zeros((n * n, n * n), dtype=complex)
    for a, Aa in enumerate(A):
        Lam = 0.5 * sum(S[:, :, a, b] * Ab for b, Ab in enumerate(A))
        R += np.kron(Lam, Aa.T) + np.kron(Aa, Lam.conj())
        R -= np.kron(Aa @ Lam, I) + np.kron(I, (Lam.conj().T @ Aa).T)
    return R


def secular_mask(model, R):
    w = model.coherence_freqs
    cutoff = model.secular_cutoff
    if cutoff is None:
        cutoff = SECULAR_FACTOR * np.abs(R).max()
    return np.abs(np.subtract.outer(w, w)) <= cutoff


def redfield_tensor(model):
    """Redfield tensor ``R[ab, cd]`` in the ``H_s`` eigenbasis (row-major vec).

    ``d rho_ab / dt = -i w_ab rho_ab + sum_cd R[ab, cd] rho_cd`` in natural
    units (cm^-1, hbar = 1).
    """
    R = _dissipator(model)
    if model.secular:
        R = np.where(secular_mask(model, R), R, 0.0)
    return R


def liouvillian(model, R=None):
    """Full generator ``-i[H, .] + R`` in the eigenbasis."""
    if R is None:
        R = redfield_tensor(model)
    return -1j * np.diag(model.coherence_freqs) + R


def stationary_state(model):
    """Steady state of the generator, returned in the lab basis."""
    n = model.dim
    L = liouvillian(model)
    # row-major trace functional replaces one equation
    M = L.copy()
    M[0, :] = np.eye(n).ravel()
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    rho = np.linalg.solve(M, rhs).reshape(n, n)
    V = model.eigensystem[1]
    rho = V @ rho @ V.conj().T
    return 0.5 * (rho + rho.conj().T)


def gibbs_state(H, T):
    E, V = np.linalg.eigh(H)
    if T == 0:
        p = (E == E.min()).astype(float)
    else:
        p = np.exp(-(E - E.min()) / (K_B_CM1_PER_K * T))
    p /= p.sum()
    return (V * p) @ V.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    s = sqrtm(rho)
    return float(np.real(np.trace(sqrtm(s @ sigma @ s))) ** 2)


def _clusters(model, R):
    """Connected groups of Liouville indices coupled by the generator."""
    n2 = model.dim**2
    linked = (np.abs(R) > 0) | np.eye(n2, dtype=bool)
    label = -np.ones(n2, dtype=int)
    current = 0
    for start in range(n2):
        if label[start] >= 0:
            continue
        stack = [start]
        label[start] = current
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(linked[i] | linked[:, i]):
                if label[j] < 0:
                    label[j] = current
                    stack.append(j)
        current += 1
    return [np.flatnonzero(label == c) for c in range(current)]


@dataclass
class RateAnalysis:
    T1: float
    T2: float
    population_eigenvalues: np.ndarray
    coherence_eigenvalues: np.ndarray


def generator_rates(model):
    """Population and coherence decay eigenvalues (natural units, cm^-1).

    With the secular approximation the generator splits into independent
    blocks; each block is diagonalized on its own so relaxation rates many
    orders of magnitude below the Zeeman splitting stay accurate.
    """
    n = model.dim
    R = redfield_tensor(model)
    L = liouvillian(model, R)
    pop = set(range(0, n * n, n + 1))
    if model.secular:
        blocks = _clusters(model, R)
    else:
        blocks = [np.arange(n * n)]
    pop_ev, coh_ev = [], []
    for idx in blocks:
        ev, vec = np.linalg.eig(L[np.ix_(idx, idx)])
        in_pop = np.array([i in pop for i in idx])
        weight = np.sum(np.abs(vec[in_pop]) ** 2, axis=0)
        for lam, w in zip(ev, weight):
            (pop_ev if w > 0.5 else coh_ev).append(lam)
    pop_ev = np.array(pop_ev)
    coh_ev = np.array(coh_ev)
    # discard the stationary eigenvalue
    k = int(np.argmin(np.abs(pop_ev)))
    decaying = np.delete(pop_ev, k)
    return pop_ev, coh_ev, decaying


def _time_from(eigs):
    if eigs.size == 0:
        return float("inf")
    slowest = np.max(eigs.real)
    if slowest >= 0:
        return float("inf")
    return float(1.0 / rate_to_per_second(-slowest))


def extract_rates(model, cross_check=False):
    """``(T1, T2)`` in seconds from the slowest decaying generator eigenvalues.

    ``cross_check=True`` also fits propagated trajectories and warns with
    :class:`MultiExponentialWarning` when the two routes disagree by more
    than 0.5 %.
    """
    _, coh, decaying = generator_rates(model)
    T1, T2 = _time_from(decaying), _time_from(coh)
    if cross_check:
        T1f, T2f = fit_rates(model, T1=T1, T2=T2)
        for name, te, tf in (("T1", T1, T1f), ("T2", T2, T2f)):
            if np.isfinite(te) and abs(tf / te - 1.0) > 5e-3:
                warnings.warn(
                    MultiExponentialWarning(
                        f"{name}: eigenvalue {te:.6g} s vs trajectory fit {tf:.6g} s",
                        eigen_rate=1.0 / te, fit_rate=1.0 / tf,
                    )
                )
    return T1, T2


def analyze(model):
    pop, coh, decaying = generator_rates(model)
    return RateAnalysis(_time_from(decaying), _time_from(coh), pop, coh)


# -- propagation --------------------------------------------------------------


@dataclass
class RelaxationResult:
    """Trajectory and/or relaxation times for one model.

    ``rho`` is stored in the lab basis with shape ``(n_t, n, n)``; times in
    picoseconds, T1/T2 in seconds.
    """

    times_ps: np.ndarray = None
    rho: np.ndarray = None
    eigenvalues: np.ndarray = None
    T1: float = None
    T2: float = None
    temperature: float = None
    field: float = None
    source: str = None
    flavor: str = None

    def expect(self, op):
        return np.real(np.einsum("ij,tji->t", op, self.rho))

    def trace_error(self):
        return np.abs(np.trace(self.rho, axis1=1, axis2=2) - 1.0)


def _validate_rho0(rho0, n):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise ValueError(f"initial state must be {n}x{n}")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12:
        raise ValueError("initial state is not Hermitian")
    if abs(np.trace(rho0) - 1) > 1e-12:
        raise ValueError("initial state must have unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-12:
        raise ValueError("initial state is not positive semidefinite")
    return rho0


def _integrate(model, R, rho_eig0, t_nat, rtol, atol):
    """Integrate in the frame rotating with ``H_s``; returns eigenbasis rho(t)."""
    n = model.dim
    w = model.coherence_freqs
    dw = np.subtract.outer(w, w)
    nz = np.abs(R) > 0
    static = not np.any(dw[nz])
    if static:
        def rhs(t, y):
            return R @ y
    else:
        rows, cols = np.nonzero(nz)
        vals, phases = R[rows, cols], dw[rows, cols]

        def rhs(t, y):
            out = np.zeros_like(y)
            np.add.at(out, rows, vals * np.exp(1j * phases * t) * y[cols])
            return out

    y0 = rho_eig0.ravel()
    if t_nat[-1] == 0:
        ys = np.repeat(y0[:, None], t_nat.size, axis=1)
    else:
        sol = solve_ivp(rhs, (0.0, t_nat[-1]), y0, method="DOP853", t_eval=t_nat,
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffnessError(
                f"integration failed ({sol.message}); the problem may be stiff, "
                "consider rescaling the rates or shortening the time grid"
            )
        ys = sol.y
    rot = np.exp(-1j * np.outer(w, t_nat))
    return (ys * rot).T.reshape(t_nat.size, n, n)


def propagate(model, rho0, t_grid, rtol=1e-10, atol=1e-12):
    """Propagate ``rho0`` (lab basis) over ``t_grid`` (ps).

    Uses an adaptive 8th-order Runge-Kutta integrator in the frame rotating
    with ``H_s``.  Trace and Hermiticity are checked, not enforced.
    """
    n = model.dim
    rho0 = _validate_rho0(rho0, n)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and increase strictly")
    V = model.eigensystem[1]
    R = redfield_tensor(model)
    rho_t = _integrate(model, R, V.conj().T @ rho0 @ V, ps_to_natural(t_grid), rtol, atol)
    rho_t = V[None] @ rho_t @ V.conj().T[None]
    tr_err = np.max(np.abs(np.trace(rho_t, axis1=1, axis2=2) - 1.0))
    herm = np.max(np.abs(rho_t - rho_t.conj().transpose(0, 2, 1)))
    if tr_err > TRACE_TOL or herm > HERMITIAN_TOL:
        raise NumericalError(
            f"propagation broke invariants: trace error {tr_err:.2e}, Hermiticity defect {herm:.2e}"
        )
    an = analyze(model)
    return RelaxationResult(
        times_ps=t_grid, rho=rho_t,
        eigenvalues=np.concatenate([an.population_eigenvalues, an.coherence_eigenvalues]),
        T1=an.T1, T2=an.T2,
    )


def excited_state(model):
    V = model.eigensystem[1]
    v = V[:, -1]
    return np.outer(v, v.conj())


def coherent_state(model):
    V = model.eigensystem[1]
    v = (V[:, 0] + V[:, 1]) / np.sqrt(2.0)
    return np.outer(v, v.conj())


def _fit_decay(t, y):
    """Least-squares exponential fit of a positive decaying trace; returns (rate, rel residual)."""
    keep = y > 0
    t, y = t[keep], y[keep]
    A = np.vstack([np.ones_like(t), -t]).T
    (c, rate), *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    model = np.exp(c - rate * t)
    resid = np.sqrt(np.mean((model - y) ** 2)) / y[0]
    return rate, resid


def fit_rates(model, T1=None, T2=None, n_points=200, span=3.0):
    """Trajectory-fit ``(T1, T2)`` in seconds.

    T1 comes from the energy relaxation ``<H_s>(t) - <H_s>_ss`` after starting
    in the highest eigenstate; T2 from the envelope of the coherence between
    the two lowest eigenstates.  The fit window is ``span`` times the
    supplied (or eigenvalue) estimate.
    """
    if T1 is None or T2 is None:
        T1, T2 = extract_rates(model)
    n = model.dim
    R = redfield_tensor(model)
    V = model.eigensystem[1]
    E = model.energies
    out = []
    for kind, scale in (("T1", T1), ("T2", T2)):
        if not np.isfinite(scale):
            out.append(np.inf)
            continue
        t = np.linspace(0.0, span * rate_to_per_second(1.0) * scale, n_points)
        rho0 = excited_state(model) if kind == "T1" else coherent_state(model)
        rho = _integrate(model, R, V.conj().T @ rho0 @ V, t, 1e-10, 1e-14)
        if kind == "T1":
            ss = V.conj().T @ stationary_state(model) @ V
            y = np.real(np.einsum("a,taa->t", E, rho)) - np.real(np.sum(E * np.diag(ss)))
            y = y / y[0]
        else:
            y = np.abs(rho[:, 1, 0]) / np.abs(rho[0, 1, 0])
        rate, resid = _fit_decay(t, y)
        if resid > 1e-2:
            warnings.warn(
                MultiExponentialWarning(
                    f"{kind} trajectory is not single-exponential (residual {resid:.2%})",
                    eigen_rate=1.0 / scale, fit_rate=rate_to_per_second(rate),
                )
            )
        out.append(1.0 / rate_to_per_second(rate))
    return tuple(out)


__all__ = [
    "RedfieldModel", "RelaxationResult", "redfield_tensor", "liouvillian", "propagate",
    "extract_rates", "fit_rates", "stationary_state", "gibbs_state", "fidelity",
]
