"""SVD mode projection of a harmonic bath.

The coupling matrix ``g`` (spin operators x modes, mass-weighted frame) is
decomposed as ``g = U S V^T``.  Right singular vectors with nonzero singular
value span the *primary* subspace ``ran(P)``; its complement ``ran(Q)``
holds the *residual* modes.  Diagonalizing the Hessian ``diag(w_k^2)``
inside each subspace gives primary frequencies ``w_r``, residual
frequencies ``w_j`` and the primary/residual couplings ``gamma_rj``.  The
spin then couples only to the primary modes, through ``g_tilde = g @ v_r``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, EmbeddingInstabilityError, EmptyProjectionError
from .ingest import CouplingMatrix, ModeSet

#: Singular values below this fraction of the largest are treated as zero.
DEFAULT_SV_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Projectors:
    P: np.ndarray
    Q: np.ndarray
    rank: int
    primary_basis: np.ndarray
    residual_basis: np.ndarray


@dataclass(frozen=True)
class Embedding:
    """Primary + residual representation of a harmonic bath.

    Attributes
    ----------
    primary_freqs : ndarray, shape (r,)
    residual_freqs : ndarray, shape (n_q - r,)
    couplings : ndarray, shape (n_s, r)
        Spin-to-primary couplings ``g_tilde`` (mass-weighted frame).
    gamma : ndarray, shape (r, n_q - r)
        Bilinear primary/residual couplings, cm^-2.
    transform : ndarray, shape (n_q, n_q)
        Columns are the primary then residual modes in the original basis.
    singular_values : ndarray
    """

    primary_freqs: np.ndarray
    residual_freqs: np.ndarray
    couplings: np.ndarray
    gamma: np.ndarray
    transform: np.ndarray
    singular_values: np.ndarray

    @property
    def rank(self):
        return self.primary_freqs.size

    @property
    def n_modes(self):
        return self.transform.shape[0]

    @property
    def primary_vectors(self):
        return self.transform[:, : self.rank]

    @property
    def residual_vectors(self):
        return self.transform[:, self.rank :]

    def hessian(self):
        """Reassembled Hessian in the primary + residual basis."""
        r = self.rank
        n = self.n_modes
        H = np.zeros((n, n))
        H[:r, :r] = np.diag(self.primary_freqs**2)
        H[r:, r:] = np.diag(self.residual_freqs**2)
        H[:r, r:] = self.gamma
        H[r:, :r] = self.gamma.T
        return H

    def entropies(self):
        return np.array([mode_entropy(v) for v in self.primary_vectors.T])

    def truncated(self, keep):
        """Embedding with only the primary modes indexed by ``keep`` coupled to the spin.

        Dropped primary modes keep their place in the bath but lose their spin
        coupling; intended for ablation studies.
        """
        c = np.zeros_like(self.couplings)
        c[:, keep] = self.couplings[:, keep]
        return Embedding(
            self.primary_freqs, self.residual_freqs, c, self.gamma, self.transform, self.singular_values
        )


@dataclass(frozen=True)
class RoundTripReport:
    max_rel_freq_error: float
    orthogonality_defect: float

    def ok(self, tol=1e-10):
        return self.max_rel_freq_error < tol and self.orthogonality_defect < tol


def _mass_weighted(gc):
    if isinstance(gc, CouplingMatrix):
        return gc.mass_weighted
    return np.atleast_2d(np.asarray(gc, dtype=float))


def _frequencies(modes):
    return modes.frequencies if isinstance(modes, ModeSet) else np.asarray(modes, dtype=float)


def svd_project(gc, sv_threshold=DEFAULT_SV_THRESHOLD, max_rank=None):
    """Projectors onto the coupled (primary) and uncoupled (residual) mode subspaces.

    Parameters
    ----------
    gc : CouplingMatrix or array_like, shape (n_s, n_q)
        Arrays are taken to be in the mass-weighted frame already.
    sv_threshold : float
        Keep directions with ``sigma_i > sv_threshold * sigma_max``.
    max_rank : int, optional
        Keep at most this many of the largest singular directions.

    Returns
    -------
    proj : Projectors
    sigma : ndarray
        All singular values, descending.
    U : ndarray
        Left singular vectors (spin-operator space).
    """
    g = _mass_weighted(gc)
    if not np.all(np.isfinite(g)):
        raise ValueError("coupling matrix has non-finite entries")
    if sv_threshold < 0:
        raise ValueError("sv_threshold must be non-negative")
    U, sigma, Vt = np.linalg.svd(g, full_matrices=True)
    if sigma.size == 0 or sigma[0] == 0.0:
        raise EmptyProjectionError("coupling matrix is identically zero; no primary modes exist")
    r = int(np.count_nonzero(sigma > sv_threshold * sigma[0]))
    if max_rank is not None:
        r = min(r, int(max_rank))
    if r < 1:
        raise EmptyProjectionError("no singular direction survives the retention threshold")
    Vp = Vt[:r].T
    Vq = Vt[r:].T
    P = Vp @ Vp.T
    P = 0.5 * (P + P.T)
    Q = np.eye(g.shape[1]) - P
    return Projectors(P, Q, r, Vp, Vq), sigma, U


def _sorted_eigh(A):
    w, v = np.linalg.eigh(0.5 * (A + A.T))
    # fix the sign so the largest-magnitude component is positive
    idx = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[idx, np.arange(v.shape[1])])
    order = sorted(range(w.size), key=lambda i: (w[i], tuple(v[:, i])))
    return w[order], v[:, order]


def build_embedding(proj, modes, gc):
    """Diagonalize the Hessian inside ``ran(P)`` and ``ran(Q)``.

    Each block is solved in its own orthonormal basis (``r`` and ``n_q - r``
    dimensional), so the rank-deficient full-size blocks never appear.
    """
    w = _frequencies(modes)
    g = _mass_weighted(gc)
    n = w.size
    if g.shape[1] != n or proj.P.shape != (n, n):
        raise ConsistencyError(
            f"coupling matrix {g.shape} / projector {proj.P.shape} inconsistent with {n} modes"
        )
    W2 = w**2
    Vp, Vq = proj.primary_basis, proj.residual_basis

    wp, up = _sorted_eigh((Vp.T * W2) @ Vp)
    if wp.size and wp[0] <= 0:
        raise EmbeddingInstabilityError(
            f"primary Hessian block has non-positive eigenvalue {wp[0]!r}", eigenvalue=float(wp[0])
        )
    if Vq.shape[1]:
        wq, uq = _sorted_eigh((Vq.T * W2) @ Vq)
        if wq[0] <= 0:
            raise EmbeddingInstabilityError(
                f"residual Hessian block has non-positive eigenvalue {wq[0]!r}", eigenvalue=float(wq[0])
            )
    else:
        wq, uq = np.zeros(0), np.zeros((0, 0))

    v_r = Vp @ up
    w_j = Vq @ uq
    gamma = (v_r.T * W2) @ w_j
    sigma = np.linalg.svd(g, compute_uv=False)
    return Embedding(
        primary_freqs=np.sqrt(wp),
        residual_freqs=np.sqrt(wq),
        couplings=g @ v_r,
        gamma=gamma,
        transform=np.hstack([v_r, w_j]),
        singular_values=sigma,
    )


def embed(gc, modes, sv_threshold=DEFAULT_SV_THRESHOLD, max_rank=None):
    """Convenience wrapper: :func:`svd_project` followed by :func:`build_embedding`."""
    proj, _, _ = svd_project(gc, sv_threshold, max_rank=max_rank)
    return build_embedding(proj, modes, gc)


def mode_entropy(vec):
    """Entropy ``-sum r_n^2 ln r_n^2`` of a mode vector's normalized components."""
    v = np.asarray(vec, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("mode entropy of a zero vector is undefined")
    p = (v / norm) ** 2
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def roundtrip_check(emb, modes):
    """Compare the spectrum of the reassembled Hessian with the original modes."""
    w = np.sort(_frequencies(modes) ** 2)
    lam = np.sort(np.linalg.eigvalsh(emb.hessian()))
    T = emb.transform
    return RoundTripReport(
        max_rel_freq_error=float(np.max(np.abs(lam - w) / w)),
        orthogonality_defect=float(np.max(np.abs(T @ T.T - np.eye(T.shape[0])))),
    )


def naive_cutoff(gc, frac=0.35):
    """Indices of modes whose coupling exceeds ``frac`` of the strongest one.

    The per-mode strength is the l2 norm over spin operators of the coupling
    per dimensionless displacement, which ranks modes by spectral weight.
    """
    vals = gc.values if isinstance(gc, CouplingMatrix) else np.atleast_2d(gc)
    strength = np.linalg.norm(vals, axis=0)
    return np.flatnonzero(strength > frac * strength.max())


def embedding_to_dict(emb, modes):
    """JSON-ready ``spd-emb-1`` payload."""
    rep = roundtrip_check(emb, modes)
    return {
        "schema": "spd-emb-1",
        "rank": emb.rank,
        "primary_freqs_cm1": emb.primary_freqs.tolist(),
        "residual_freqs_cm1": emb.residual_freqs.tolist(),
        "couplings": emb.couplings.tolist(),
        "gamma": emb.gamma.tolist(),
        "singular_values": emb.singular_values.tolist(),
        "entropies": emb.entropies().tolist(),
        "roundtrip": {
            "max_rel_freq_error": rep.max_rel_freq_error,
            "orthogonality_defect": rep.orthogonality_defect,
        },
    }
