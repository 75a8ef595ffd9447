"""Quantum states tagged with their basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import (
    SectorBasis,
    domain_wall_occupations,
    full_basis,
    neel_occupations,
    occupations_to_config,
    sector_basis,
)

PURE = "pure"
DENSITY = "density"


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state vector or density matrix in a tagged basis."""

    basis: SectorBasis
    kind: Literal["pure", "density"]
    data: np.ndarray

    @property
    def is_pure(self) -> bool:
        return self.kind == PURE

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    @property
    def dim(self) -> int:
        return self.basis.dim

    def to_density(self) -> "QuantumState":
        if self.kind == DENSITY:
            return self
        return QuantumState(self.basis, DENSITY, np.outer(self.data, self.data.conj()))

    def in_full_basis(self) -> "QuantumState":
        """Embed into the full 2^n basis (identity if already full)."""
        if self.basis.is_full:
            return self
        fb = full_basis(self.n_sites)
        if self.is_pure:
            vec = np.zeros(fb.dim, dtype=complex)
            vec[self.basis.states] = self.data
            return QuantumState(fb, PURE, vec)
        mat = np.zeros((fb.dim, fb.dim), dtype=complex)
        mat[np.ix_(self.basis.states, self.basis.states)] = self.data
        return QuantumState(fb, DENSITY, mat)

    def validate(self, check_spectrum: bool = False) -> None:
        """Raise if the state violates its normalization contracts."""
        if self.is_pure:
            if self.data.shape != (self.dim,):
                raise ValueError("pure state has wrong shape")
            if abs(np.linalg.norm(self.data) - 1.0) > 1e-10:
                raise ValueError("pure state is not normalized")
            return
        rho = self.data
        if rho.shape != (self.dim, self.dim):
            raise ValueError("density matrix has wrong shape")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-8:
            raise ValueError("density matrix trace is not 1")
        if check_spectrum and np.linalg.eigvalsh(rho).min() < -1e-8:
            raise ValueError("density matrix has a significantly negative eigenvalue")


def pure_state(basis: SectorBasis, amplitudes) -> QuantumState:
    vec = np.asarray(amplitudes, dtype=complex)
    state = QuantumState(basis, PURE, vec)
    state.validate()
    return state


def density_state(basis: SectorBasis, matrix) -> QuantumState:
    rho = np.asarray(matrix, dtype=complex)
    state = QuantumState(basis, DENSITY, rho)
    state.validate()
    return state


def basis_state(basis: SectorBasis, config: int) -> QuantumState:
    """The computational basis state with the given configuration integer."""
    vec = np.zeros(basis.dim, dtype=complex)
    vec[basis.index_of[int(config)]] = 1.0
    return QuantumState(basis, PURE, vec)


def product_state(occupied, n_sites: int, sector: bool = True) -> QuantumState:
    """Product state with the listed sites excited.

    ``sector=True`` places it in its fixed-excitation sector basis,
    otherwise in the full basis.
    """
    occupied = tuple(occupied)
    basis = sector_basis(n_sites, len(occupied)) if sector else full_basis(n_sites)
    return basis_state(basis, occupations_to_config(occupied, n_sites))


def bitstring_state(bits: str, sector: bool = True) -> QuantumState:
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    occupied = tuple(i for i, b in enumerate(bits) if b == "1")
    return product_state(occupied, len(bits), sector=sector)


def neel_state(n_sites: int, sector: bool = True) -> QuantumState:
    return product_state(neel_occupations(n_sites), n_sites, sector=sector)


def domain_wall_state(n_sites: int, sector: bool = True) -> QuantumState:
    return product_state(domain_wall_occupations(n_sites), n_sites, sector=sector)
