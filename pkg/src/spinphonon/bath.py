"""Thermal occupations and bath spectral densities.

For a bath operator ``B_a = sum_k g_ak x_k`` (mass-weighted coordinates,
hbar = 1, cm^-1 units) the spectral density is the full Fourier transform
of ``<B_a(t) B_a(0)>``::

    S_a(w) = pi * sum_k g_ak^2 / w_k * [(n_k + 1) d(w - w_k) + n_k d(w + w_k)]

Positive frequencies are emission into the bath.  Delta functions are
replaced by normalized Gaussians of standard deviation ``broadening``.
The classical flavor uses ``n_cl = kT / w_k`` on both branches.
"""

from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import voigt_profile

from .embed import Embedding
from .errors import SpectralRangeError
from .ingest import CouplingMatrix, ModeSet
from .units import K_B_CM1_PER_K

#: 2 meV, in cm^-1.
DEFAULT_BROADENING = 16.0
DEFAULT_GRID_POINTS = 8192
DEFAULT_GRID_SPAN = 1.25

FLAVORS = ("quantum", "classical")


def bose_occupation(omega, T):
    """Bose-Einstein occupation ``1 / (exp(w / kT) - 1)`` for ``w`` in cm^-1, ``T`` in K."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("bose_occupation needs omega > 0")
    if np.any(np.asarray(T) < 0):
        raise ValueError("temperature must be non-negative")
    kT = K_B_CM1_PER_K * np.asarray(T, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        x = np.where(kT > 0, omega / np.where(kT > 0, kT, 1.0), np.inf)
        n = 1.0 / np.expm1(x)
    return n if n.ndim else float(n)


def classical_occupation(omega, T):
    """Equipartition occupation ``kT / w``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("classical_occupation needs omega > 0")
    return K_B_CM1_PER_K * np.asarray(T, dtype=float) / omega


def branch_weights(freqs, T, flavor):
    """Weights multiplying ``d(w - w_k)`` and ``d(w + w_k)`` for unit coupling."""
    freqs = np.asarray(freqs, dtype=float)
    if flavor == "quantum":
        n = bose_occupation(freqs, T)
        return np.pi * (n + 1.0) / freqs, np.pi * n / freqs
    if flavor == "classical":
        ncl = classical_occupation(freqs, T)
        w = np.pi * ncl / freqs
        return w, w.copy()
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def gaussian(x, sigma):
    return np.exp(-0.5 * (x / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)


def symmetric_grid(half_width, n_points=DEFAULT_GRID_POINTS):
    """Uniform grid on ``[-half_width, half_width]`` that is exactly sign-symmetric."""
    k = np.arange(n_points) - 0.5 * (n_points - 1)
    return k * (2.0 * half_width / (n_points - 1))


class SpectralDensity:
    """Sum of broadened peaks ``S_ab(w) = sum_p c_ap c_bp f_p(w)``.

    Each peak ``p`` sits at ``+-centers[p]`` with branch weights
    ``w_pos[p]`` / ``w_neg[p]`` and a Gaussian (``widths`` None) or Voigt
    line shape.  The density is defined on ``[-omega_max, omega_max]``;
    :meth:`evaluate` outside that window raises :class:`SpectralRangeError`.

    Attributes
    ----------
    omega : ndarray
        The sampling grid.
    values : ndarray, shape (n_s, n_points)
        Diagonal components on the grid, computed on first access.
    """

    def __init__(self, centers, couplings, w_pos, w_neg, broadening, flavor, temperature,
                 omega_max, n_points=DEFAULT_GRID_POINTS, widths=None):
        if not broadening > 0:
            raise ValueError("broadening must be positive")
        self.centers = np.asarray(centers, dtype=float)
        self.couplings = np.atleast_2d(np.asarray(couplings, dtype=float))
        self.w_pos = np.asarray(w_pos, dtype=float)
        self.w_neg = np.asarray(w_neg, dtype=float)
        self.widths = None if widths is None else np.asarray(widths, dtype=float)
        self.broadening = float(broadening)
        self.flavor = flavor
        self.temperature = float(temperature)
        self.omega_max = float(omega_max)
        self.n_points = int(n_points)

    @property
    def n_ops(self):
        return self.couplings.shape[0]

    def _shape(self, x):
        # x: (..., n_peaks) offsets from peak centers
        if self.widths is None:
            return gaussian(x, self.broadening)
        return voigt_profile(x, self.broadening, 0.5 * self.widths)

    def _lines(self, omega):
        w = np.asarray(omega, dtype=float)[..., None]
        return self.w_pos * self._shape(w - self.centers) + self.w_neg * self._shape(w + self.centers)

    def _check(self, omega):
        omega = np.asarray(omega, dtype=float)
        bad = np.abs(omega) > self.omega_max * (1 + 1e-12)
        if np.any(bad):
            f = float(omega[bad].flat[0])
            raise SpectralRangeError(
                f"spectral density undefined at {f!r} cm^-1 (window +-{self.omega_max} cm^-1)",
                frequency=f,
            )
        return omega

    def evaluate(self, omega):
        """Diagonal components ``S_a(w)``; returns shape ``(n_s,) + shape(omega)``."""
        omega = self._check(omega)
        lines = self._lines(omega)
        return np.einsum("ap,...p->a...", self.couplings**2, lines)

    def matrix(self, omega):
        """Full cross-correlation matrix ``S_ab(w)`` at scalar ``w``."""
        omega = self._check(float(omega))
        lines = self._lines(omega)
        c = self.couplings
        return (c * lines) @ c.T

    def __call__(self, omega):
        return self.evaluate(omega)

    @cached_property
    def omega(self):
        return symmetric_grid(self.omega_max, self.n_points)

    @cached_property
    def values(self):
        v = np.empty((self.n_ops, self.omega.size))
        for s in range(0, self.omega.size, 1024):
            v[:, s:s + 1024] = self.evaluate(self.omega[s:s + 1024])
        return v

    def integrated_weight(self):
        """Trapezoid integral of each component over the grid."""
        return trapezoid(self.values, self.omega, axis=1)


def _mass_weighted(gc):
    if isinstance(gc, CouplingMatrix):
        return gc.mass_weighted
    return np.atleast_2d(np.asarray(gc, dtype=float))


def _default_window(freqs):
    return DEFAULT_GRID_SPAN * float(np.max(freqs))


def spectral_density_full(gc, modes, T, broadening=DEFAULT_BROADENING, flavor="quantum",
                          omega_max=None, n_points=DEFAULT_GRID_POINTS, select=None):
    """Spectral density of the complete normal-mode bath.

    Parameters
    ----------
    gc : CouplingMatrix or array_like
        Arrays are mass-weighted couplings ``(n_s, n_q)``.
    modes : ModeSet or array_like
    T : float
        Temperature in K.
    select : array_like of int, optional
        Restrict the sum to these modes (e.g. a naive coupling cutoff).
    """
    freqs = modes.frequencies if isinstance(modes, ModeSet) else np.asarray(modes, dtype=float)
    g = _mass_weighted(gc)
    window = _default_window(freqs) if omega_max is None else omega_max
    if select is not None:
        select = np.asarray(select, dtype=int)
        freqs, g = freqs[select], g[:, select]
    wp, wn = branch_weights(freqs, T, flavor)
    return SpectralDensity(freqs, g, wp, wn, broadening, flavor, T, window, n_points)


def primary_lifetimes(emb, broadening=DEFAULT_BROADENING):
    """Golden-rule decay rates of each primary mode into the residual modes (cm^-1)."""
    wr = emb.primary_freqs[:, None]
    wj = emb.residual_freqs[None, :]
    terms = emb.gamma**2 / (2.0 * wr * wj) * gaussian(wr - wj, broadening)
    return np.pi * terms.sum(axis=1)


def spectral_density_effective(emb, T, broadening=DEFAULT_BROADENING, flavor="quantum",
                               method="exact", omega_max=None, n_points=DEFAULT_GRID_POINTS):
    """Spectral density seen by the spin through the embedded bath.

    ``method="exact"`` re-diagonalizes the primary + residual Hessian and
    carries the primary couplings into its eigenbasis, which reproduces the
    full-bath density.  ``method="lorentzian"`` keeps only the primary
    peaks, each given a Lorentzian lifetime width (FWHM equal to the
    golden-rule decay rate into the residual bath) convolved with the
    Gaussian broadening.
    """
    if not isinstance(emb, Embedding):
        raise TypeError("spectral_density_effective needs an Embedding")
    if method == "exact":
        lam, W = np.linalg.eigh(emb.hessian())
        freqs = np.sqrt(lam)
        g = np.zeros((emb.couplings.shape[0], emb.n_modes))
        g[:, : emb.rank] = emb.couplings
        g = g @ W
        window = _default_window(freqs) if omega_max is None else omega_max
        wp, wn = branch_weights(freqs, T, flavor)
        return SpectralDensity(freqs, g, wp, wn, broadening, flavor, T, window, n_points)
    if method == "lorentzian":
        freqs = emb.primary_freqs
        top = max(freqs.max(), emb.residual_freqs.max() if emb.residual_freqs.size else 0.0)
        window = DEFAULT_GRID_SPAN * top if omega_max is None else omega_max
        wp, wn = branch_weights(freqs, T, flavor)
        widths = primary_lifetimes(emb, broadening)
        return SpectralDensity(freqs, emb.couplings, wp, wn, broadening, flavor, T, window,
                               n_points, widths=widths)
    raise ValueError(f"unknown method {method!r}; expected 'exact' or 'lorentzian'")
