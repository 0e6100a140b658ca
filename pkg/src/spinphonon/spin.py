"""Spin algebra, g-tensors and the Zeeman spin Hamiltonian."""

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .units import MU_B_CM1_PER_T

#: g-tensor of VOPc(OH)8 computed with PBE (slightly asymmetric as published).
VOPC_G_TENSOR = np.array(
    [
        [2.073, -1.64e-2, -9.25e-3],
        [-1.64e-2, 2.037, 3.50e-3],
        [-9.22e-3, 3.58e-3, 2.032],
    ]
)


def _as_spin(s):
    two_s = Fraction(s).limit_denominator(1000) * 2
    if two_s.denominator != 1 or two_s < 0 or abs(float(two_s) - 2 * float(s)) > 1e-12:
        raise ValueError(f"spin quantum number must be a non-negative half-integer, got {s!r}")
    return int(two_s)


@dataclass(frozen=True)
class GTensor:
    """3x3 gyromagnetic tensor (dimensionless)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"g-tensor must be 3x3, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def symmetric(self):
        return 0.5 * (self.matrix + self.matrix.T)


def _g_matrix(g):
    return g.matrix if isinstance(g, GTensor) else np.asarray(g, dtype=float)


@dataclass(frozen=True)
class SpinSystem:
    """A single spin ``s`` with g-tensor ``g`` in a static field ``B`` (tesla)."""

    s: float
    g: GTensor
    B: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        _as_spin(self.s)
        if not isinstance(self.g, GTensor):
            object.__setattr__(self, "g", GTensor(self.g))
        b = np.array(self.B, dtype=float).reshape(3)
        b.setflags(write=False)
        object.__setattr__(self, "B", b)

    @property
    def dim(self):
        return _as_spin(self.s) + 1


def spin_operators(s):
    """Return ``(Sx, Sy, Sz)`` for spin ``s`` in the ``|s, m>`` basis, m descending.

    Parameters
    ----------
    s : float
        Spin quantum number; ``2*s`` must be a non-negative integer.

    Returns
    -------
    tuple of ndarray
        Three complex ``(2s+1, 2s+1)`` Hermitian matrices.
    """
    two_s = _as_spin(s)
    s = two_s / 2.0
    m = s - np.arange(two_s + 1)
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)) sits on the superdiagonal
    splus = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    sminus = splus.conj().T
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def field_vector(g, B):
    """Zeeman field components ``h_a = (mu_B/hc) sum_j g_aj B_j`` in cm^-1."""
    return MU_B_CM1_PER_T * _g_matrix(g) @ np.asarray(B, dtype=float).reshape(3)


def hamiltonian_from_field(h, s=0.5):
    """``H = sum_a h_a S_a`` for an explicit field vector ``h`` (cm^-1)."""
    ops = spin_operators(s)
    h = np.asarray(h, dtype=float).reshape(3)
    return sum(ha * op for ha, op in zip(h, ops))


def spin_hamiltonian(sys):
    """Zeeman Hamiltonian of a :class:`SpinSystem` in cm^-1."""
    return hamiltonian_from_field(field_vector(sys.g, sys.B), sys.s)


def principal_frame(g):
    """Principal g-values and the rotation into the principal frame.

    The tensor is symmetrized first.  Values are sorted descending; equal
    values keep the order of their original axis index.

    Returns
    -------
    values : ndarray, shape (3,)
    rotation : ndarray, shape (3, 3)
        Orthogonal ``R`` with ``R @ g_sym @ R.T == diag(values)``.
    """
    gs = 0.5 * (_g_matrix(g) + _g_matrix(g).T)
    w, v = np.linalg.eigh(gs)
    if np.any(w <= 0):
        warnings.warn(f"g-tensor has non-positive principal value(s): {w}", RuntimeWarning)
    # tie-break by the axis each eigenvector is most aligned with
    axis = np.argmax(np.abs(v), axis=0)
    order = sorted(range(3), key=lambda i: (-w[i], axis[i]))
    w = w[order]
    v = v[:, order]
    for i in range(3):
        if v[axis[order[i]], i] < 0:
            v[:, i] = -v[:, i]
    return w, v.T
