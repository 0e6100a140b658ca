"""Spin-phonon relaxation with SVD mode-projection embedding.

Submodules
----------
spin      spin operators, g-tensors, Zeeman Hamiltonian
ingest    dataset files, g-gradients, coupling matrices
embed     SVD projection into primary and residual modes
bath      thermal occupations and spectral densities
dynamics  Bloch-Redfield relaxation, scans and the exact oracle
"""

__version__ = "0.1.0"

from .bath import (
    SpectralDensity,
    bose_occupation,
    spectral_density_effective,
    spectral_density_full,
)
from .embed import (
    Embedding,
    Projectors,
    build_embedding,
    embed,
    mode_entropy,
    roundtrip_check,
    svd_project,
)
from .ingest import (
    CouplingMatrix,
    Dataset,
    GGradientSet,
    ModeSet,
    cartesian_to_mode,
    coupling_matrix,
    fd_gradient,
    parse_dataset,
    participation_norms,
    write_dataset,
)
from .spin import (
    VOPC_G_TENSOR,
    GTensor,
    SpinSystem,
    field_vector,
    principal_frame,
    spin_hamiltonian,
    spin_operators,
)
from .synth import synthetic_dataset
