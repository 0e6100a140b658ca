"""Dataset ingestion, g-tensor gradients and spin-phonon coupling matrices.

Two JSON schemas are understood.  ``spd-1`` carries normal-mode gradients
directly::

    {"schema": "spd-1",
     "g_tensor": [[...], [...], [...]],
     "b_field_tesla": [bx, by, bz],
     "modes": [{"freq_cm1": w, "dg_dq": [[...], [...], [...]]}, ...],
     "meta": {...}}

``spd-cart-1`` carries the raw finite-difference data::

    {"schema": "spd-cart-1",
     "g_tensor": ..., "b_field_tesla": ...,
     "delta_angstrom": 0.01,
     "atoms": [{"element": "V", "mass": 50.9415,
                "g_plus": [gx, gy, gz], "g_minus": [gx, gy, gz]}, ...],
     "frequencies_cm1": [...],
     "mode_vectors": [[... 3N ...], ...],
     "meta": {...}}

where ``g_plus[c]`` is the g-tensor with the atom displaced by
``+delta_angstrom`` along Cartesian axis ``c``.  Mode vectors are
orthonormal mass-weighted eigenvectors of the Hessian.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConsistencyError,
    PhysicalValidityError,
    SchemaError,
    UnsupportedOperationError,
)
from .spin import GTensor
from .units import HO_LENGTH_ANGSTROM, MU_B_CM1_PER_T

SCHEMA = "spd-1"
SCHEMA_CART = "spd-cart-1"

#: Modes below this frequency (cm^-1) are rejected; spectral weights divide by w.
DEFAULT_FREQ_FLOOR = 1.0

ORTHO_WARN = 1e-6
ORTHO_FAIL = 1e-3


@dataclass(frozen=True)
class ModeSet:
    """Harmonic normal modes.

    Attributes
    ----------
    frequencies : ndarray, shape (n_q,)
        Mode frequencies in cm^-1.
    vectors : ndarray, shape (n_q, 3N), optional
        Orthonormal mass-weighted Cartesian mode vectors.
    masses : ndarray, shape (N,), optional
        Atomic masses in amu.
    """

    frequencies: np.ndarray
    vectors: np.ndarray = None
    masses: np.ndarray = None
    freq_floor: float = DEFAULT_FREQ_FLOOR

    def __post_init__(self):
        w = _frozen(np.atleast_1d(np.asarray(self.frequencies, dtype=float)))
        if w.ndim != 1:
            raise ConsistencyError("frequencies must be a 1-d array")
        bad = np.flatnonzero(~np.isfinite(w) | (w < self.freq_floor))
        if bad.size:
            k = int(bad[0])
            raise PhysicalValidityError(
                f"mode {k} has frequency {w[k]!r} cm^-1; "
                f"all modes must be real and >= {self.freq_floor} cm^-1"
            )
        object.__setattr__(self, "frequencies", w)
        if self.vectors is not None:
            L = _frozen(np.asarray(self.vectors, dtype=float))
            if L.ndim != 2 or L.shape[0] != w.size:
                raise ConsistencyError(
                    f"mode_vectors shape {L.shape} does not match {w.size} modes"
                )
            defect = np.max(np.abs(L @ L.T - np.eye(w.size))) if w.size else 0.0
            if defect > ORTHO_FAIL:
                raise PhysicalValidityError(
                    f"mode vectors are not orthonormal (max defect {defect:.3e})"
                )
            if defect > ORTHO_WARN:
                warnings.warn(f"mode vectors orthonormal only to {defect:.3e}", RuntimeWarning)
            object.__setattr__(self, "vectors", L)
        if self.masses is not None:
            m = _frozen(np.asarray(self.masses, dtype=float))
            if np.any(m <= 0):
                raise PhysicalValidityError("atomic masses must be positive")
            if self.vectors is not None and 3 * m.size != self.vectors.shape[1]:
                raise ConsistencyError(
                    f"{m.size} atoms do not match mode vectors of length {self.vectors.shape[1]}"
                )
            object.__setattr__(self, "masses", m)

    @property
    def n_modes(self):
        return self.frequencies.size

    @property
    def hessian(self):
        return np.diag(self.frequencies**2)


@dataclass(frozen=True)
class GGradientSet:
    """Per-mode g-tensor derivatives with respect to dimensionless coordinates."""

    tensors: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensors, dtype=float)
        if t.ndim == 2 and t.shape == (3, 3):
            t = t[None]
        if t.ndim != 3 or t.shape[1:] != (3, 3):
            raise ConsistencyError(f"gradient tensors must have shape (n_q, 3, 3), got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise PhysicalValidityError("gradient tensors contain non-finite entries")
        object.__setattr__(self, "tensors", _frozen(t))

    def __len__(self):
        return self.tensors.shape[0]


@dataclass(frozen=True)
class CouplingMatrix:
    """Spin-phonon couplings ``g[a, k]`` in cm^-1 per unit dimensionless displacement.

    ``frequencies`` are the mode frequencies the columns refer to; they are
    needed to move to mass-weighted coordinates, which is the frame the
    embedding and the spectral densities work in.
    """

    values: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        v = _frozen(np.atleast_2d(np.asarray(self.values, dtype=float)))
        w = _frozen(np.atleast_1d(np.asarray(self.frequencies, dtype=float)))
        if v.shape[1] != w.size:
            raise ConsistencyError(f"coupling matrix has {v.shape[1]} columns but {w.size} modes")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "frequencies", w)

    @property
    def mass_weighted(self):
        """Couplings per unit mass-weighted coordinate, ``g * sqrt(w)``."""
        return self.values * np.sqrt(self.frequencies)

    def scaled(self, c):
        return CouplingMatrix(c * self.values, self.frequencies)


@dataclass(frozen=True)
class Dataset:
    g_tensor: GTensor
    modes: ModeSet
    gradients: GGradientSet
    b_field: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.gradients) != self.modes.n_modes:
            raise ConsistencyError(
                f"{len(self.gradients)} gradient tensors for {self.modes.n_modes} modes"
            )
        object.__setattr__(self, "b_field", _frozen(np.asarray(self.b_field, dtype=float).reshape(3)))

    def couplings(self, B=None):
        return coupling_matrix(self.gradients, self.b_field if B is None else B, self.modes)


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def fd_gradient(g_plus, g_minus, delta):
    """Central finite difference ``(g(+delta) - g(-delta)) / (2 delta)``."""
    if not delta > 0:
        raise ValueError(f"displacement step must be positive, got {delta!r}")
    gp = g_plus.matrix if isinstance(g_plus, GTensor) else np.asarray(g_plus, dtype=float)
    gm = g_minus.matrix if isinstance(g_minus, GTensor) else np.asarray(g_minus, dtype=float)
    return (gp - gm) / (2.0 * delta)


def cartesian_to_mode(grad_cart, modes, dimensionless=True):
    """Chain-rule Cartesian g-gradients onto normal modes.

    Parameters
    ----------
    grad_cart : array_like, shape (3N, 3, 3)
        ``dg/dX_ix`` in 1/angstrom, atom-major (x, y, z per atom).
    modes : ModeSet
        Must carry ``vectors`` and ``masses``.
    dimensionless : bool
        If True (default) return derivatives with respect to
        ``q_k = sqrt(w_k) x_k / HO_LENGTH_ANGSTROM``; otherwise with respect
        to the mass-weighted coordinate ``x_k`` (sqrt(amu) angstrom).
    """
    if modes.vectors is None or modes.masses is None:
        raise UnsupportedOperationError("Cartesian projection needs mode vectors and atomic masses")
    G = np.asarray(grad_cart, dtype=float)
    if G.shape != (modes.vectors.shape[1], 3, 3):
        raise ConsistencyError(
            f"Cartesian gradient shape {G.shape} does not match mode vectors {modes.vectors.shape}"
        )
    inv_sqrt_m = np.repeat(1.0 / np.sqrt(modes.masses), 3)
    dg_dx = np.einsum("kc,cij->kij", modes.vectors * inv_sqrt_m, G)
    if dimensionless:
        dg_dx = dg_dx * (HO_LENGTH_ANGSTROM / np.sqrt(modes.frequencies))[:, None, None]
    return GGradientSet(dg_dx)


def coupling_matrix(grads, B, modes):
    """Spin-phonon coupling ``g[a, k] = (mu_B/hc) sum_j dg_aj/dq_k B_j``.

    Parameters
    ----------
    grads : GGradientSet
    B : array_like, shape (3,)
        Field in tesla.
    modes : ModeSet or array_like
        Mode frequencies matching the gradients.
    """
    w = modes.frequencies if isinstance(modes, ModeSet) else np.asarray(modes, dtype=float)
    t = grads.tensors if isinstance(grads, GGradientSet) else np.asarray(grads, dtype=float)
    vals = MU_B_CM1_PER_T * np.einsum("kaj,j->ak", t, np.asarray(B, dtype=float).reshape(3))
    return CouplingMatrix(vals, w)


def participation_norms(grads, frobenius=False):
    """Per-mode amplitude of the g-tensor gradient.

    By default the entrywise sum ``sum_ij sqrt((dg_ij/dq_k)^2)`` (i.e. the
    sum of absolute values); ``frobenius=True`` gives ``sqrt(sum_ij dg_ij^2)``.
    """
    t = grads.tensors if isinstance(grads, GGradientSet) else np.asarray(grads, dtype=float)
    if frobenius:
        return np.sqrt(np.einsum("kij,kij->k", t, t))
    return np.abs(t).sum(axis=(1, 2))


# -- file I/O ---------------------------------------------------------------


def _require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        name = f"{where}.{key}" if where else key
        raise SchemaError(f"missing required field '{name}'", field=name)
    return doc[key]


def _matrix(value, name, shape):
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field '{name}' is not numeric: {exc}", field=name) from None
    if a.shape != shape:
        raise SchemaError(f"field '{name}' must have shape {shape}, got {a.shape}", field=name)
    return a


def _load_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read dataset {path}: {exc}", path=str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})", path=str(path)
        ) from None


def dataset_from_dict(doc, freq_floor=DEFAULT_FREQ_FLOOR):
    """Validate a decoded dataset document and build a :class:`Dataset`."""
    schema = _require(doc, "schema", "")
    g = GTensor(_matrix(_require(doc, "g_tensor", ""), "g_tensor", (3, 3)))
    B = _matrix(_require(doc, "b_field_tesla", ""), "b_field_tesla", (3,))
    meta = dict(doc.get("meta", {}))

    if schema == SCHEMA:
        entries = _require(doc, "modes", "")
        if not isinstance(entries, list):
            raise SchemaError("field 'modes' must be a list", field="modes")
        freqs, tensors = [], []
        for k, m in enumerate(entries):
            freqs.append(float(_matrix(_require(m, "freq_cm1", f"modes[{k}]"), f"modes[{k}].freq_cm1", ())))
            if "dg_dq" not in m:
                raise SchemaError(f"missing required field 'modes[{k}].dg_dq'", field=f"modes[{k}].dg_dq")
            tensors.append(_matrix(m["dg_dq"], f"modes[{k}].dg_dq", (3, 3)))
        modes = ModeSet(np.array(freqs), freq_floor=freq_floor)
        grads = GGradientSet(np.array(tensors).reshape(len(tensors), 3, 3))
    elif schema == SCHEMA_CART:
        delta = float(_matrix(_require(doc, "delta_angstrom", ""), "delta_angstrom", ()))
        atoms = _require(doc, "atoms", "")
        freqs = np.array(_require(doc, "frequencies_cm1", ""), dtype=float)
        vecs = np.array(_require(doc, "mode_vectors", ""), dtype=float)
        masses, grad_cart = [], []
        for i, atom in enumerate(atoms):
            masses.append(float(_require(atom, "mass", f"atoms[{i}]")))
            gp = _matrix(_require(atom, "g_plus", f"atoms[{i}]"), f"atoms[{i}].g_plus", (3, 3, 3))
            gm = _matrix(_require(atom, "g_minus", f"atoms[{i}]"), f"atoms[{i}].g_minus", (3, 3, 3))
            grad_cart.extend(fd_gradient(gp[c], gm[c], delta) for c in range(3))
        if vecs.ndim != 2 or vecs.shape[0] != freqs.size:
            raise ConsistencyError(
                f"{vecs.shape[0] if vecs.ndim else 0} mode vectors for {freqs.size} frequencies"
            )
        modes = ModeSet(freqs, vectors=vecs, masses=np.array(masses), freq_floor=freq_floor)
        grads = cartesian_to_mode(np.array(grad_cart), modes)
        meta.setdefault("displacement_step_angstrom", delta)
    else:
        raise SchemaError(f"unknown schema {schema!r}", field="schema")
    meta.setdefault("source_schema", schema)
    return Dataset(g, modes, grads, B, meta)


def parse_dataset(path, fmt=None, freq_floor=DEFAULT_FREQ_FLOOR):
    """Read and validate a dataset file.

    ``fmt`` forces a schema (``"spd-1"`` or ``"spd-cart-1"``); by default the
    document's own ``schema`` field decides.
    """
    doc = _load_json(path)
    if fmt is not None and isinstance(doc, dict) and doc.get("schema") != fmt:
        raise SchemaError(f"expected schema {fmt!r}, file declares {doc.get('schema')!r}", field="schema")
    try:
        return dataset_from_dict(doc, freq_floor=freq_floor)
    except SchemaError as exc:
        exc.path = str(path)
        exc.args = (f"{path}: {exc.args[0]}",)
        raise


def dataset_to_dict(ds):
    """Serialize to an ``spd-1`` document (Cartesian inputs are written projected)."""
    return {
        "schema": SCHEMA,
        "g_tensor": ds.g_tensor.matrix.tolist(),
        "b_field_tesla": ds.b_field.tolist(),
        "modes": [
            {"freq_cm1": float(w), "dg_dq": t.tolist()}
            for w, t in zip(ds.modes.frequencies, ds.gradients.tensors)
        ],
        "meta": ds.meta,
    }


def write_dataset(ds, path):
    Path(path).write_text(json.dumps(dataset_to_dict(ds), indent=1, sort_keys=True) + "\n")
