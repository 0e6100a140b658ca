"""Temperature/field scans of T1 and T2 for a dataset."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..bath import DEFAULT_BROADENING, spectral_density_effective, spectral_density_full
from ..embed import DEFAULT_SV_THRESHOLD, embed, naive_cutoff
from ..errors import DegenerateSpectrumError
from ..ingest import coupling_matrix
from ..spin import field_vector, hamiltonian_from_field, spin_operators
from .redfield import RedfieldModel, RelaxationResult, analyze

SOURCES = ("full", "projected", "naive-cutoff")


@dataclass(frozen=True)
class ScanOptions:
    flavor: str = "quantum"
    broadening: float = DEFAULT_BROADENING
    secular: bool = True
    cross_correlations: bool = False
    sv_threshold: float = DEFAULT_SV_THRESHOLD
    max_rank: int = None
    drop_primary: tuple = ()
    effective_method: str = "exact"
    cutoff_frac: float = 0.35
    spin: float = 0.5


def field_direction(B):
    B = np.asarray(B, dtype=float)
    n = np.linalg.norm(B)
    return B / n if n > 0 else np.array([0.0, 0.0, 1.0])


def build_model(ds, T, B, source="full", opts=ScanOptions()):
    """Redfield model of ``ds`` at temperature ``T`` (K) and field magnitude ``B`` (T).

    The field points along the dataset's ``b_field`` direction.  ``source``
    picks the bath: the complete mode set, the embedded (projected) bath,
    or the modes passing a naive coupling cutoff.
    """
    Bvec = B * field_direction(ds.b_field)
    h = field_vector(ds.g_tensor, Bvec)
    H = hamiltonian_from_field(h, opts.spin)
    E = np.linalg.eigvalsh(H)
    if np.min(np.diff(E)) <= 1e-12 * max(1.0, np.abs(E).max()):
        raise DegenerateSpectrumError(
            f"no Zeeman splitting at B = {B!r} T; the direct process needs a nonzero field"
        )
    gc = coupling_matrix(ds.gradients, Bvec, ds.modes)
    window = 1.25 * ds.modes.frequencies.max()
    kw = dict(broadening=opts.broadening, flavor=opts.flavor, omega_max=window)
    if source == "full":
        sd = spectral_density_full(gc, ds.modes, T, **kw)
    elif source == "projected":
        emb = embed(gc, ds.modes, opts.sv_threshold, max_rank=opts.max_rank)
        if opts.drop_primary:
            emb = emb.truncated([r for r in range(emb.rank) if r not in opts.drop_primary])
        sd = spectral_density_effective(emb, T, method=opts.effective_method, **kw)
    elif source == "naive-cutoff":
        sd = spectral_density_full(gc, ds.modes, T, select=naive_cutoff(gc, opts.cutoff_frac), **kw)
    else:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")
    return RedfieldModel(H, list(spin_operators(opts.spin)), sd, secular=opts.secular,
                         cross_correlations=opts.cross_correlations)


def _point(args):
    ds, T, B, source, opts = args
    an = analyze(build_model(ds, T, B, source, opts))
    return RelaxationResult(
        eigenvalues=np.concatenate([an.population_eigenvalues, an.coherence_eigenvalues]),
        T1=float(an.T1), T2=float(an.T2), temperature=float(T), field=float(B),
        source=source, flavor=opts.flavor,
    )


def _run(tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point, tasks))


def relax_scan(ds, temperatures, fields, source="full", opts=ScanOptions(), jobs=1):
    """T1/T2 on the grid ``temperatures x fields``; rows sorted by ``(T, B)``."""
    if not len(temperatures) or not len(fields):
        raise ValueError("temperature and field lists must be non-empty")
    grid = sorted((float(T), float(B)) for T in temperatures for B in fields)
    return _run([(ds, T, B, source, opts) for T, B in grid], jobs)


@dataclass(frozen=True)
class ComparisonRow:
    T: float
    T1_full: float
    T1_proj: float
    T1_naive: float = None

    @property
    def rel_dev(self):
        return abs(self.T1_proj - self.T1_full) / self.T1_full


def compare_t1(ds, temperatures, B, opts=ScanOptions(), include_naive=False, jobs=1):
    """Full-bath against projected-bath T1 at field ``B`` for every temperature."""
    full = relax_scan(ds, temperatures, [B], "full", opts, jobs)
    proj = relax_scan(ds, temperatures, [B], "projected", opts, jobs)
    naive = relax_scan(ds, temperatures, [B], "naive-cutoff", opts, jobs) if include_naive else None
    rows = []
    for i, (f, p) in enumerate(zip(full, proj)):
        rows.append(ComparisonRow(f.temperature, f.T1, p.T1, naive[i].T1 if naive else None))
    return rows
