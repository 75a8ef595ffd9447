"""Measured quantities: site probabilities, imbalance, reduced density
matrices, entanglement entropies, ensemble statistics, and shot sampling.

All functions are pure; site indices are 0-based.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from math import log2

import numpy as np

from .evolve import TimeGrid
from .model import SectorBasis
from .rng import rng_for
from .state import DENSITY, QuantumState

ENTROPY_EIGENVALUE_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Site probabilities and imbalance
# ---------------------------------------------------------------------------


def site_probabilities(state: QuantumState) -> np.ndarray:
    """Per-site excited-state probabilities <n_i>."""
    occ = state.basis.occupations
    if state.is_pure:
        weights = np.abs(state.data) ** 2
    else:
        weights = np.diag(state.data).real
    return weights @ occ


def site_probability_series(states) -> np.ndarray:
    """(n_times, n_sites) probabilities along a trajectory."""
    return np.asarray([site_probabilities(s) for s in states])


def imbalance_neel(p) -> float:
    """(N_even - N_odd)/(N_even + N_odd) over 1-based even/odd site labels."""
    p = np.asarray(p, dtype=float)
    n_even = p[1::2].sum()  # Q2, Q4, ... are the even-numbered qubits
    n_odd = p[0::2].sum()
    total = n_even + n_odd
    if total <= 0:
        raise ValueError("imbalance undefined for zero total excitation")
    return float((n_even - n_odd) / total)


def imbalance_domain(p) -> float:
    """(N_left - N_right)/(N_left + N_right) over the two half-chains."""
    p = np.asarray(p, dtype=float)
    half = p.size // 2
    n_left = p[:half].sum()
    n_right = p[half:].sum()
    total = n_left + n_right
    if total <= 0:
        raise ValueError("imbalance undefined for zero total excitation")
    return float((n_left - n_right) / total)


def delta_n(p, reference: float = 0.5) -> float:
    """Root-sum-square deviation of probabilities from the thermal value."""
    p = np.asarray(p, dtype=float)
    return float(np.sqrt(np.sum((reference - p) ** 2)))


# ---------------------------------------------------------------------------
# Projections and reduced density matrices
# ---------------------------------------------------------------------------


def post_select(state: QuantumState, m: int) -> QuantumState:
    """Project onto the m-excitation sector and renormalize."""
    if not state.basis.is_full:
        raise ValueError("post-selection expects a full-basis state")
    occ_counts = state.basis.occupations.sum(axis=1)
    in_sector = occ_counts == m
    if state.is_pure:
        vec = np.where(in_sector, state.data, 0.0)
        weight = np.linalg.norm(vec)
        if weight**2 <= 1e-14:
            raise ValueError(f"state has no weight in the {m}-excitation sector")
        return QuantumState(state.basis, state.kind, vec / weight)
    proj = np.where(in_sector[:, None] & in_sector[None, :], state.data, 0.0)
    weight = np.trace(proj).real
    if weight <= 1e-14:
        raise ValueError(f"state has no weight in the {m}-excitation sector")
    return QuantumState(state.basis, state.kind, proj / weight)


def _reduce_density_pure(vec: np.ndarray, keep, n_sites: int) -> np.ndarray:
    rest = [i for i in range(n_sites) if i not in keep]
    tensor = vec.reshape((2,) * n_sites).transpose(tuple(keep) + tuple(rest))
    mat = tensor.reshape(2 ** len(keep), 2 ** len(rest))
    return mat @ mat.conj().T


def _reduce_density_matrix(rho: np.ndarray, keep, n_sites: int) -> np.ndarray:
    rest = [i for i in range(n_sites) if i not in keep]
    perm = tuple(keep) + tuple(rest)
    tensor = rho.reshape((2,) * (2 * n_sites))
    tensor = tensor.transpose(perm + tuple(n_sites + p for p in perm))
    d_keep, d_rest = 2 ** len(keep), 2 ** len(rest)
    tensor = tensor.reshape(d_keep, d_rest, d_keep, d_rest)
    return np.einsum("abcb->ac", tensor)


def partial_trace(state: QuantumState, keep) -> np.ndarray:
    """Reduced density matrix on the kept sites (in the order given)."""
    keep = list(keep)
    if not keep:
        raise ValueError("must keep at least one site")
    n = state.n_sites
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise ValueError(f"kept sites must be distinct members of 0..{n - 1}")
    full = state.in_full_basis()
    if full.is_pure:
        return _reduce_density_pure(full.data, keep, n)
    return _reduce_density_matrix(full.data, keep, n)


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------


def von_neumann_entropy(rho: np.ndarray, hermitian_tol: float = 1e-8) -> float:
    """S = -tr(rho ln rho) in natural-log units.

    Eigenvalues below the 1e-12 floor contribute zero, which keeps
    numerically rank-deficient reduced matrices from producing NaNs.
    """
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T)) > hermitian_tol:
        raise ValueError("entropy requires a Hermitian matrix")
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > ENTROPY_EIGENVALUE_FLOOR]
    return float(-np.sum(lam * np.log(lam)))


def site_averaged_entropy(rho: np.ndarray, n_keep: int) -> float:
    """Mean entanglement entropy over all n_keep-site subsets of rho's sites."""
    n_sites = int(log2(rho.shape[0]))
    if 2**n_sites != rho.shape[0]:
        raise ValueError("density matrix dimension is not a power of two")
    if not 1 <= n_keep <= n_sites:
        raise ValueError(f"subset size {n_keep} outside 1..{n_sites}")
    if n_keep == n_sites:
        return von_neumann_entropy(rho)
    values = [
        von_neumann_entropy(_reduce_density_matrix(rho, subset, n_sites))
        for subset in combinations(range(n_sites), n_keep)
    ]
    return float(np.mean(values))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """T(a, b) = 1/2 * sum of singular values of (a - b)."""
    diff = np.asarray(a) - np.asarray(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


# ---------------------------------------------------------------------------
# Ensemble statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Time-gridded values for every realization plus ensemble mean/SD.

    ``values`` has shape (n_realizations, n_times).  The SD uses the
    population (divide by k) convention.
    """

    grid: TimeGrid
    values: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    @property
    def n_realizations(self) -> int:
        return self.values.shape[0]


def ensemble_stats(grid: TimeGrid, values) -> ObservableSeries:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != len(grid):
        raise ValueError("values do not match the time grid")
    return ObservableSeries(
        grid=grid,
        values=values,
        mean=values.mean(axis=0),
        sd=values.std(axis=0),
    )


# ---------------------------------------------------------------------------
# Shot sampling
# ---------------------------------------------------------------------------


def sample_shots(p, n_shots: int, seed) -> np.ndarray:
    """Multinomial counts over outcomes, deterministic under a fixed seed."""
    p = np.asarray(p, dtype=float)
    if n_shots < 0:
        raise ValueError("n_shots must be >= 0")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("outcome probabilities must be a distribution")
    if n_shots == 0:
        return np.zeros(p.size, dtype=np.int64)
    rng = np.random.default_rng(seed)
    clipped = np.clip(p, 0.0, None)
    return rng.multinomial(n_shots, clipped / clipped.sum())


def shot_probabilities(state: QuantumState, n_shots: int, seed) -> np.ndarray:
    """Empirical per-basis-state probabilities from sampled measurement shots."""
    if state.is_pure:
        p = np.abs(state.data) ** 2
    else:
        p = np.diag(state.data).real
    counts = sample_shots(p / p.sum(), n_shots, seed)
    return counts / max(n_shots, 1)


def site_probabilities_from_distribution(p, basis: SectorBasis) -> np.ndarray:
    """Per-site probabilities implied by a distribution over basis states."""
    return np.asarray(p, dtype=float) @ basis.occupations


def post_select_distribution(p, basis: SectorBasis, m: int) -> np.ndarray:
    """Restrict a basis-state distribution to the m-excitation sector."""
    keep = basis.occupations.sum(axis=1) == m
    out = np.where(keep, np.asarray(p, dtype=float), 0.0)
    total = out.sum()
    if total <= 0:
        raise ValueError(f"no weight in the {m}-excitation sector")
    return out / total


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def write_series_csv(path, series: ObservableSeries) -> None:
    """CSV columns: time_us, mean, sd, then one column per realization."""
    k = series.n_realizations
    width = max(2, len(str(k)))
    header = ["time_us", "mean", "sd"] + [f"r{i + 1:0{width}d}" for i in range(k)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t_idx, t in enumerate(series.grid.times):
            row = [_fmt(t), _fmt(series.mean[t_idx]), _fmt(series.sd[t_idx])]
            row += [_fmt(v) for v in series.values[:, t_idx]]
            writer.writerow(row)


def series_to_json(series: ObservableSeries) -> dict:
    return {
        "time_us": series.grid.times.tolist(),
        "mean": series.mean.tolist(),
        "sd": series.sd.tolist(),
        "realizations": series.values.tolist(),
    }


def matrix_to_json(matrix: np.ndarray) -> list:
    """Row-major nested lists of [real, imag] pairs."""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.asarray([[complex(re, im) for re, im in row] for row in data])
