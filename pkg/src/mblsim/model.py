"""Spin model of a resonator-coupled transmon ring.

Builds the long-range XY coupling matrix and on-site fields from measured
device constants, draws reproducible on-site disorder, and assembles
Hamiltonian matrices either in the full 2^n product basis or restricted to
a fixed excitation-number sector.

Unit conventions: all stored frequencies are cyclic (already divided by
2*pi) in MHz, times are in microseconds, so an evolution phase is
2*pi*f*t.  Site indices are 0-based in code; formatted output uses the
1-based qubit labels Q1..Q10.  A basis configuration is an integer whose
most significant bit (of n_sites bits) is site 0, so the ket |0101010101>
is the integer 0b0101010101.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from .rng import DISORDER_STREAM, rng_for

# Calibrated constants of the 10-qubit device.  g: qubit-resonator
# couplings (MHz); lambda_c: nearest-neighbor crosstalk couplings (MHz),
# entry p couples the ring pair (p, p+1 mod n), so the last entry is the
# Q10-Q1 pair; t1: energy lifetimes (us).
DEFAULT_N_SITES = 10
DEFAULT_G = (14.2, 20.5, 19.9, 20.2, 15.2, 19.9, 19.6, 18.9, 19.8, 16.3)
DEFAULT_LAMBDA_C = (1.8, 1.9, 1.9, 1.8, 0.1, 1.8, 1.8, 1.9, 1.8, 0.0)
DEFAULT_DELTA = -650.0
DEFAULT_T1 = (25.6, 21.6, 9.8, 14.3, 14.2, 32.5, 11.9, 9.4, 17.9, 30.6)
DEFAULT_T_PHI = 30.0


def _frozen_array(values, n: int, name: str) -> np.ndarray:
    arr = np.array(np.broadcast_to(np.asarray(values, dtype=float), n))
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DeviceParams:
    """Measured chip constants.

    Attributes
    ----------
    n_sites : int
        Number of qubits on the ring.
    g : (n,) array
        Per-site qubit-resonator couplings g_i/2pi in MHz.
    lambda_c : (n,) array
        Nearest-neighbor crosstalk couplings in MHz; entry p couples the
        ring pair (p, p+1 mod n).
    delta : float
        Common qubit-resonator detuning Delta/2pi in MHz (negative in
        normal operation).
    t1 : (n,) array
        Per-site energy lifetimes in us.
    t_phi : (n,) array
        Per-site pure dephasing times in us.
    """

    n_sites: int
    g: np.ndarray
    lambda_c: np.ndarray
    delta: float
    t1: np.ndarray
    t_phi: np.ndarray

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 2:
            raise ValueError(f"n_sites must be >= 2, got {n}")
        object.__setattr__(self, "n_sites", n)
        for name in ("g", "lambda_c", "t1", "t_phi"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), n, name))
        object.__setattr__(self, "delta", float(self.delta))
        if self.delta == 0.0:
            raise ValueError("detuning delta must be nonzero")
        if not np.all(self.g > 0):
            raise ValueError("all couplings g must be positive")
        if not np.all(self.lambda_c >= 0):
            raise ValueError("crosstalk couplings must be nonnegative")
        if not np.all(self.t1 > 0):
            raise ValueError("energy lifetimes t1 must be positive")
        if not np.all(self.t_phi > 0):
            raise ValueError("dephasing times t_phi must be positive")

    @classmethod
    def default(cls) -> "DeviceParams":
        """The calibrated 10-qubit device."""
        return cls(
            n_sites=DEFAULT_N_SITES,
            g=DEFAULT_G,
            lambda_c=DEFAULT_LAMBDA_C,
            delta=DEFAULT_DELTA,
            t1=DEFAULT_T1,
            t_phi=DEFAULT_T_PHI,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceParams":
        base = cls.default()
        known = {"n_sites", "g", "lambda_c", "delta", "t1", "t_phi"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown device parameter keys: {sorted(unknown)}")
        merged = {k: data.get(k, getattr(base, k)) for k in known}
        if "n_sites" in data and "g" not in data and int(data["n_sites"]) != base.n_sites:
            raise ValueError("overriding n_sites requires per-site arrays as well")
        return cls(**merged)

    @classmethod
    def from_json(cls, path: str | Path) -> "DeviceParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "g": self.g.tolist(),
            "lambda_c": self.lambda_c.tolist(),
            "delta": self.delta,
            "t1": self.t1.tolist(),
            "t_phi": self.t_phi.tolist(),
        }


@dataclass(frozen=True, eq=False)
class SpinModel:
    """Pairwise XY couplings and on-site fields, all cyclic MHz.

    J is symmetric with zero diagonal; h holds the inherent fields and dh
    one disorder realization (zero when no disorder is applied).
    """

    J: np.ndarray
    h: np.ndarray
    dh: np.ndarray

    def __post_init__(self):
        J = np.array(np.asarray(self.J, dtype=float))
        h = np.asarray(self.h, dtype=float).copy()
        dh = np.asarray(self.dh, dtype=float).copy()
        n = h.shape[0]
        if J.shape != (n, n) or dh.shape != (n,):
            raise ValueError("inconsistent model dimensions")
        if not np.array_equal(J, J.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(J) != 0.0):
            raise ValueError("coupling matrix must have zero diagonal")
        for name, arr in (("J", J), ("h", h), ("dh", dh)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_sites(self) -> int:
        return self.h.shape[0]

    @property
    def total_field(self) -> np.ndarray:
        return self.h + self.dh

    def with_disorder(self, dh) -> "SpinModel":
        return SpinModel(J=self.J, h=self.h, dh=dh)


def ring_pairs(n: int) -> list[tuple[int, int]]:
    """Ring-ordered nearest-neighbor pairs: (0,1), ..., (n-2,n-1), (n-1,0)."""
    return [(i, i + 1) for i in range(n - 1)] + [(n - 1, 0)]


def derive_couplings(params: DeviceParams) -> SpinModel:
    """Derive the spin model from device constants.

    Every pair acquires the resonator-mediated super-exchange coupling
    g_i*g_j/delta; ring-adjacent pairs additionally get the direct
    crosstalk coupling.  On-site fields are h_i = g_i^2/delta.  The
    returned model carries zero disorder.
    """
    if params.delta == 0.0:
        raise ValueError("detuning delta must be nonzero")
    g = params.g
    J = np.outer(g, g) / params.delta
    np.fill_diagonal(J, 0.0)
    for p, (i, j) in enumerate(ring_pairs(params.n_sites)):
        J[i, j] += params.lambda_c[p]
        J[j, i] += params.lambda_c[p]
    h = g * g / params.delta
    return SpinModel(J=J, h=h, dh=np.zeros(params.n_sites))


def super_exchange(params: DeviceParams) -> np.ndarray:
    """The pure resonator-mediated part g_i*g_j/delta (zero diagonal)."""
    J = np.outer(params.g, params.g) / params.delta
    np.fill_diagonal(J, 0.0)
    return J


def restrict_nearest_neighbor(model: SpinModel, keep_ring_pair: bool = True) -> SpinModel:
    """Zero all couplings beyond nearest neighbors.

    Entries J_ij with |i-j| != 1 are set to zero; the ring-closing
    (n-1, 0) pair counts as nearest-neighbor unless ``keep_ring_pair`` is
    False.  The open-chain variant (``keep_ring_pair=False``) is the one
    that maps to a noninteracting fermion chain and is what the
    single-particle engine accepts.
    """
    n = model.n_sites
    mask = np.zeros((n, n), dtype=bool)
    for i, j in ring_pairs(n):
        if (i, j) == (n - 1, 0) and not keep_ring_pair:
            continue
        mask[i, j] = mask[j, i] = True
    return SpinModel(J=np.where(mask, model.J, 0.0), h=model.h, dh=model.dh)


def submodel(model: SpinModel, sites) -> SpinModel:
    """Restrict the model to a subset of sites (order given)."""
    ix = np.asarray(sites, dtype=int)
    return SpinModel(J=model.J[np.ix_(ix, ix)], h=model.h[ix], dh=model.dh[ix])


@dataclass(frozen=True)
class DisorderSpec:
    """Uniform on-site disorder: dh_i ~ U[-bound, +bound] MHz.

    Realization k is an addressable, counter-style function of
    (seed, k, site): the unit draws depend only on (seed, k), so sweeps
    over different bounds with the same seed are paired sample-by-sample.
    """

    bound: float
    n_realizations: int = 30
    seed: int = 42

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("disorder bound must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")


def sample_disorder(spec: DisorderSpec, k: int, n_sites: int = DEFAULT_N_SITES) -> np.ndarray:
    """Per-site offsets for realization k (1-based), reproducible bitwise."""
    if not 1 <= k <= spec.n_realizations:
        raise ValueError(f"realization index {k} outside 1..{spec.n_realizations}")
    rng = rng_for(spec.seed, DISORDER_STREAM, k)
    return spec.bound * rng.uniform(-1.0, 1.0, size=n_sites)


# ---------------------------------------------------------------------------
# Bases and Hamiltonian assembly
# ---------------------------------------------------------------------------


def site_bit(n_sites: int, site: int) -> int:
    """Bit value of ``site`` in a configuration integer (site 0 = MSB)."""
    return 1 << (n_sites - 1 - site)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of n-site configurations, full or fixed-excitation.

    ``states`` lists configuration integers in ascending order;
    ``excitation_count`` is None for the full 2^n basis.
    """

    n_sites: int
    excitation_count: int | None
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def is_full(self) -> bool:
        return self.excitation_count is None

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {int(s): i for i, s in enumerate(self.states)}

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, n_sites) array of 0/1 site occupations per basis state."""
        n = self.n_sites
        occ = np.zeros((self.dim, n))
        for i in range(n):
            occ[:, i] = (self.states >> (n - 1 - i)) & 1
        return occ

    def site_bit(self, site: int) -> int:
        return site_bit(self.n_sites, site)

    def compatible_with(self, other: "SectorBasis") -> bool:
        return (
            self.n_sites == other.n_sites
            and self.excitation_count == other.excitation_count
            and self.dim == other.dim
        )


def sector_basis(n_sites: int, excitations: int | None) -> SectorBasis:
    """Basis of the m-excitation sector, or the full basis for m=None."""
    if excitations is None or excitations == "full":
        states = np.arange(2**n_sites, dtype=np.int64)
        return SectorBasis(n_sites=n_sites, excitation_count=None, states=states)
    m = int(excitations)
    if not 0 <= m <= n_sites:
        raise ValueError(f"excitation count {m} outside 0..{n_sites}")
    configs = sorted(
        sum(site_bit(n_sites, i) for i in occ)
        for occ in combinations(range(n_sites), m)
    )
    states = np.asarray(configs, dtype=np.int64)
    assert states.shape[0] == comb(n_sites, m)
    return SectorBasis(n_sites=n_sites, excitation_count=m, states=states)


def full_basis(n_sites: int) -> SectorBasis:
    return sector_basis(n_sites, None)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Hamiltonian in a given basis; entries in cyclic MHz.

    Evolution code multiplies by 2*pi, so eigenvalues of ``entries`` are
    directly the frequencies printed on device datasheets.
    """

    basis: SectorBasis
    entries: np.ndarray

    def __post_init__(self):
        E = self.entries
        if E.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix dimension does not match basis")
        scale = max(1.0, float(np.max(np.abs(E))) if E.size else 1.0)
        if float(np.max(np.abs(E - E.conj().T))) > 1e-12 * scale:
            raise ValueError("Hamiltonian must be Hermitian")

    @property
    def dim(self) -> int:
        return self.basis.dim


def build_hamiltonian(model: SpinModel, basis: SectorBasis) -> HamiltonianMatrix:
    """Assemble the XY Hamiltonian matrix in the given basis.

    Diagonal entries are the summed fields h_i + dh_i of occupied sites;
    a pair of states related by a single hop i -> j carries the matrix
    element J_ij.  Couplings are real, so the matrix is real symmetric.
    """
    n = model.n_sites
    if basis.n_sites != n:
        raise ValueError(f"basis has {basis.n_sites} sites, model has {n}")
    H = np.zeros((basis.dim, basis.dim))
    np.fill_diagonal(H, basis.occupations @ model.total_field)
    iu, ju = np.nonzero(np.triu(model.J))
    pairs = [
        (site_bit(n, int(i)), site_bit(n, int(j)), model.J[i, j])
        for i, j in zip(iu, ju)
    ]
    index_of = basis.index_of
    for a, s in enumerate(basis.states.tolist()):
        for bi, bj, Jij in pairs:
            if (s & bi) and not (s & bj):
                b = index_of[(s ^ bi) | bj]
                H[a, b] = Jij
                H[b, a] = Jij
    return HamiltonianMatrix(basis=basis, entries=H)


# ---------------------------------------------------------------------------
# Reference occupation patterns
# ---------------------------------------------------------------------------


def neel_occupations(n_sites: int) -> tuple[int, ...]:
    """Occupied sites of the alternating state |0101...>: Q2, Q4, ..."""
    return tuple(range(1, n_sites, 2))


def domain_wall_occupations(n_sites: int) -> tuple[int, ...]:
    """Occupied sites of the half-filled wall |11..100..0>."""
    return tuple(range(n_sites // 2))


def occupations_to_config(occupied, n_sites: int) -> int:
    """Configuration integer with the given sites occupied."""
    config = 0
    for i in occupied:
        if not 0 <= i < n_sites:
            raise ValueError(f"site {i} outside 0..{n_sites - 1}")
        config |= site_bit(n_sites, i)
    return config
