from .oracle import OracleResult, ReducedHamiltonian, decay_rate, exact_oracle, required_levels
from .redfield import (
    RedfieldModel,
    RelaxationResult,
    extract_rates,
    fidelity,
    fit_rates,
    gibbs_state,
    liouvillian,
    propagate,
    redfield_tensor,
    stationary_state,
)
from .scan import ScanOptions, build_model, compare_t1, relax_scan
