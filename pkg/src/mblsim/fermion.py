"""Free-fermion engine for the nearest-neighbor (open-chain) model.

A spin chain with only nearest-neighbor XY couplings maps to
noninteracting fermions, so its dynamics is fully captured by the n x n
correlation matrix C_ij = <c_i' c_j>.  This gives an exact,
exponentially cheaper simulation of the single-particle-localization
baseline and an independent cross-check of the many-body engine.

The evolution convention C(t) = e^{+i 2 pi h t} C0 e^{-i 2 pi h t} is
fixed so that diag(C(t)) equals the spin simulator's site probabilities.
"""

from __future__ import annotations

import numpy as np

from .model import SpinModel

EIGENVALUE_CLIP = 1e-12


def single_particle_hamiltonian(model: SpinModel) -> np.ndarray:
    """The n x n hopping matrix of a nearest-neighbor-only spin model.

    Diagonal entries are h_i + dh_i, first off-diagonals J_{i,i+1}.  Any
    coupling beyond the first off-diagonal (including the ring-closing
    corner) is rejected: with such terms the fermionized model is no
    longer quadratic.
    """
    n = model.n_sites
    beyond = model.J.copy()
    for i in range(n - 1):
        beyond[i, i + 1] = beyond[i + 1, i] = 0.0
    if np.any(beyond != 0.0):
        raise ValueError(
            "model has couplings beyond nearest neighbors; "
            "restrict_nearest_neighbor(..., keep_ring_pair=False) first"
        )
    h = np.diag(model.total_field).astype(float)
    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = model.J[i, i + 1]
    return h


def initial_correlation(occupied, n_sites: int) -> np.ndarray:
    """Correlation matrix of a product state: diagonal 0/1 occupations."""
    C = np.zeros((n_sites, n_sites), dtype=complex)
    for i in occupied:
        if not 0 <= i < n_sites:
            raise ValueError(f"site {i} outside 0..{n_sites - 1}")
        C[i, i] = 1.0
    return C


def evolve_correlation(h: np.ndarray, C0: np.ndarray, t: float) -> np.ndarray:
    """C(t) = e^{i 2 pi h t} C0 e^{-i 2 pi h t}."""
    w, V = np.linalg.eigh(h)
    phases = np.exp(2j * np.pi * w * t)
    U = (V * phases) @ V.conj().T
    return U @ C0 @ U.conj().T


def correlation_series(h: np.ndarray, C0: np.ndarray, times) -> list[np.ndarray]:
    """C(t) at many times, reusing one eigendecomposition."""
    w, V = np.linalg.eigh(h)
    C_mode = V.conj().T @ C0 @ V
    out = []
    for t in np.asarray(times, dtype=float):
        phases = np.exp(2j * np.pi * w * t)
        out.append(V @ (np.outer(phases, phases.conj()) * C_mode) @ V.conj().T)
    return out


def occupations(C: np.ndarray) -> np.ndarray:
    return np.diag(C).real.copy()


def entropy_from_correlation(C: np.ndarray, subset) -> float:
    """Entanglement entropy of a Gaussian state restricted to ``subset``.

    S = -sum_k [l_k ln l_k + (1 - l_k) ln(1 - l_k)] over the eigenvalues
    l_k of the restricted correlation matrix, clipped away from {0, 1}.
    """
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    sub = np.asarray(C)[np.ix_(subset, subset)]
    lam = np.linalg.eigvalsh(sub)
    lam = np.clip(lam, EIGENVALUE_CLIP, 1.0 - EIGENVALUE_CLIP)
    return float(-np.sum(lam * np.log(lam) + (1.0 - lam) * np.log(1.0 - lam)))
