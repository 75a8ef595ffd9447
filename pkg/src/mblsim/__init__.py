"""Simulator for thermalization and localization dynamics of a
disordered long-range XY qubit chain, with open-system evolution, a
free-fermion baseline, and a config-driven experiment harness."""

from .evolve import (
    CollapseChannel,
    TimeGrid,
    collapse_channels,
    evolve_pure,
    iter_trajectories,
    lindblad_evolve,
    propagator,
)
from .fermion import (
    correlation_series,
    entropy_from_correlation,
    evolve_correlation,
    initial_correlation,
    occupations,
    single_particle_hamiltonian,
)
from .model import (
    DeviceParams,
    DisorderSpec,
    HamiltonianMatrix,
    SectorBasis,
    SpinModel,
    build_hamiltonian,
    derive_couplings,
    domain_wall_occupations,
    full_basis,
    neel_occupations,
    restrict_nearest_neighbor,
    ring_pairs,
    sample_disorder,
    sector_basis,
    submodel,
    super_exchange,
)
from .observables import (
    ObservableSeries,
    delta_n,
    ensemble_stats,
    imbalance_domain,
    imbalance_neel,
    partial_trace,
    post_select,
    sample_shots,
    site_averaged_entropy,
    site_probabilities,
    site_probability_series,
    trace_distance,
    von_neumann_entropy,
    write_series_csv,
)
from .state import (
    QuantumState,
    basis_state,
    bitstring_state,
    density_state,
    domain_wall_state,
    neel_state,
    product_state,
    pure_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
