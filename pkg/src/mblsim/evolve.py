"""Time evolution: unitary propagation and the Lindblad master equation.

Closed-system evolution diagonalizes the (real symmetric) Hamiltonian
once and reuses the spectrum across the whole time grid.  Open-system
evolution integrates

    drho/dt = -i*2*pi*[H, rho]
              + sum_c rate_c * (L_c rho L_c' - 1/2 {L_c' L_c, rho})

with fixed-step RK4 (default step 1 ns), or averages quantum-jump
unravelings of the same equation.  Hamiltonians are cyclic MHz and times
microseconds, so commutators carry the explicit 2*pi while collapse rates
(1/us) do not.

Channel conventions: relaxation uses the lowering operator at rate 1/T1;
dephasing uses the Pauli-Z operator at rate 1/(2*T_phi), which makes a
lone qubit's coherence decay as exp(-t/T_phi) and the combined
off-diagonal decay rate 1/(2*T1) + 1/T_phi.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Literal

import numpy as np
import scipy.sparse

from .model import DeviceParams, HamiltonianMatrix, SectorBasis
from .rng import TRAJECTORY_STREAM, rng_for
from .state import DENSITY, PURE, QuantumState

TWO_PI = 2.0 * np.pi
DEFAULT_STEP_US = 1e-3  # 1 ns

RELAXATION = "relaxation"
DEPHASING = "dephasing"


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Sample times in us; strictly increasing, starting at 0."""

    times: np.ndarray

    def __post_init__(self):
        t = np.array(np.asarray(self.times, dtype=float))
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid must be a nonempty 1-d sequence")
        if t[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def linear(cls, stop: float, n_points: int) -> "TimeGrid":
        return cls(np.linspace(0.0, stop, n_points))

    @classmethod
    def logarithmic(cls, first: float, stop: float, n_points: int) -> "TimeGrid":
        """0 followed by n_points-1 log-spaced samples on [first, stop]."""
        if first <= 0:
            raise ValueError("first log sample must be positive")
        return cls(np.concatenate(([0.0], np.geomspace(first, stop, n_points - 1))))

    def __len__(self) -> int:
        return self.times.size

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Indices of samples with lo <= t <= hi."""
        return np.nonzero((self.times >= lo - 1e-12) & (self.times <= hi + 1e-12))[0]


# ---------------------------------------------------------------------------
# Unitary evolution
# ---------------------------------------------------------------------------


def propagator(H: HamiltonianMatrix, t: float) -> np.ndarray:
    """U = exp(-i*2*pi*H*t) via Hermitian eigendecomposition."""
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    w, V = np.linalg.eigh(H.entries)
    return (V * np.exp(-1j * TWO_PI * w * t)) @ V.conj().T


def evolve_pure(H: HamiltonianMatrix, psi0: QuantumState, grid: TimeGrid) -> list[QuantumState]:
    """Unitary trajectory of a pure state at every grid time."""
    if not psi0.is_pure:
        raise ValueError("evolve_pure requires a pure state")
    if not psi0.basis.compatible_with(H.basis):
        raise ValueError("state basis does not match Hamiltonian basis")
    w, V = np.linalg.eigh(H.entries)
    coeff = V.conj().T @ psi0.data
    # (n_times, dim) phases in one shot; columns of V recombine per time
    phases = np.exp(-1j * TWO_PI * np.outer(grid.times, w))
    vectors = (phases * coeff) @ V.T
    return [QuantumState(psi0.basis, PURE, vectors[i]) for i in range(len(grid))]


# ---------------------------------------------------------------------------
# Collapse channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollapseChannel:
    """One single-site dissipation channel with rate in 1/us."""

    site: int
    kind: Literal["relaxation", "dephasing"]
    rate: float

    def __post_init__(self):
        if self.kind not in (RELAXATION, DEPHASING):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.rate < 0:
            raise ValueError("channel rate must be >= 0")


def collapse_channels(params: DeviceParams) -> list[CollapseChannel]:
    """Per-site relaxation (1/T1) and dephasing (1/(2*T_phi)) channels.

    Channels whose rate is exactly zero (infinite lifetimes) are omitted.
    """
    channels = []
    for i in range(params.n_sites):
        gamma1 = 1.0 / params.t1[i]
        gphi = 1.0 / (2.0 * params.t_phi[i])
        if gamma1 > 0:
            channels.append(CollapseChannel(site=i, kind=RELAXATION, rate=float(gamma1)))
        if gphi > 0:
            channels.append(CollapseChannel(site=i, kind=DEPHASING, rate=float(gphi)))
    return channels


class _ChannelOps:
    """Channel actions compiled against a fixed basis.

    relax: list of (rate, src_indices, dst_indices) where the lowering
    operator maps basis state src[p] to dst[p].  deph: list of
    (rate, sign_vector).  decay: diagonal of sum_c rate_c * L_c' L_c.
    """

    def __init__(self, basis: SectorBasis, channels):
        n = basis.n_sites
        self.dim = basis.dim
        self.decay = np.zeros(basis.dim)
        self.relax: list[tuple[float, np.ndarray, np.ndarray]] = []
        self.deph: list[tuple[float, np.ndarray]] = []
        for ch in channels:
            if ch.rate == 0.0:
                continue
            if not 0 <= ch.site < n:
                raise ValueError(f"channel site {ch.site} outside 0..{n - 1}")
            occ = basis.occupations[:, ch.site]
            if ch.kind == RELAXATION:
                if not basis.is_full:
                    raise ValueError(
                        "relaxation channels change the excitation number; "
                        "use the full basis"
                    )
                src = np.nonzero(occ)[0]
                dst_states = basis.states[src] - basis.site_bit(ch.site)
                dst = np.searchsorted(basis.states, dst_states)
                self.relax.append((ch.rate, src, dst))
                self.decay += ch.rate * occ
            else:
                z = 2.0 * occ - 1.0
                self.deph.append((ch.rate, z))
                self.decay += ch.rate

    @property
    def has_channels(self) -> bool:
        return bool(self.relax or self.deph)

    def dense_mask(self) -> np.ndarray | None:
        """Elementwise factor combining dephasing jumps and all decays."""
        if not self.has_channels:
            return None
        mask = -0.5 * (self.decay[:, None] + self.decay[None, :])
        for rate, z in self.deph:
            mask += rate * np.outer(z, z)
        return mask

    def jump_weights(self, psi: np.ndarray) -> np.ndarray:
        w = [rate * float(np.sum(np.abs(psi[src]) ** 2)) for rate, src, _ in self.relax]
        norm2 = float(np.vdot(psi, psi).real)
        w += [rate * norm2 for rate, _ in self.deph]
        return np.asarray(w)

    def apply_jump(self, psi: np.ndarray, index: int) -> np.ndarray:
        if index < len(self.relax):
            _, src, dst = self.relax[index]
            out = np.zeros_like(psi)
            out[dst] = psi[src]
        else:
            _, z = self.deph[index - len(self.relax)]
            out = z * psi
        return out / np.linalg.norm(out)


# ---------------------------------------------------------------------------
# Lindblad evolution
# ---------------------------------------------------------------------------


def _rk4_step(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs(y + (0.5 * h) * k1)
    k3 = rhs(y + (0.5 * h) * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dense_rhs(H: HamiltonianMatrix, ops: _ChannelOps):
    Hs = scipy.sparse.csr_matrix(H.entries)
    mask = ops.dense_mask()

    def rhs(rho):
        hr = Hs @ rho
        # (H rho)' = rho H for Hermitian rho, saving one multiply
        out = (-1j * TWO_PI) * (hr - hr.conj().T)
        if mask is not None:
            out += mask * rho
        for rate, src, dst in ops.relax:
            out[np.ix_(dst, dst)] += rate * rho[np.ix_(src, src)]
        return out

    return rhs


def _substeps(t_a: float, t_b: float, step_us: float) -> tuple[int, float]:
    n = max(1, ceil((t_b - t_a) / step_us - 1e-9))
    return n, (t_b - t_a) / n


def _check_lindblad_args(H, rho0, channels, step_us):
    if step_us <= 0:
        raise ValueError("integration step must be positive")
    if not rho0.basis.compatible_with(H.basis):
        raise ValueError("state basis does not match Hamiltonian basis")
    if not H.basis.is_full and any(
        ch.kind == RELAXATION and ch.rate > 0 for ch in channels
    ):
        raise ValueError(
            "relaxation channels change the excitation number; use the full basis"
        )


def lindblad_evolve(
    H: HamiltonianMatrix,
    rho0: QuantumState,
    channels,
    grid: TimeGrid,
    method: str = "dense-rk4",
    *,
    step_us: float = DEFAULT_STEP_US,
    n_traj: int | None = None,
    seed: int | None = None,
) -> list[QuantumState]:
    """Density matrices at every grid time under the master equation.

    ``method='dense-rk4'`` integrates the full density matrix with
    fixed-step RK4.  ``method='trajectory'`` averages ``n_traj``
    quantum-jump unravelings (requires a pure initial state and a seed)
    and converges to the dense result at the Monte-Carlo rate.
    """
    _check_lindblad_args(H, rho0, channels, step_us)
    if method == "dense-rk4":
        ops = _ChannelOps(H.basis, channels)
        rhs = _dense_rhs(H, ops)
        rho = rho0.to_density().data.astype(complex)
        out = [QuantumState(H.basis, DENSITY, rho.copy())]
        times = grid.times
        for i in range(1, len(times)):
            n, h = _substeps(times[i - 1], times[i], step_us)
            for _ in range(n):
                rho = _rk4_step(rhs, rho, h)
            out.append(QuantumState(H.basis, DENSITY, rho.copy()))
        return out
    if method == "trajectory":
        if n_traj is None or n_traj <= 0:
            raise ValueError("trajectory method needs a positive n_traj")
        if seed is None:
            raise ValueError("trajectory method needs a seed")
        if not rho0.is_pure:
            raise ValueError("trajectory unraveling starts from a pure state")
        acc = np.zeros((len(grid), H.dim, H.dim), dtype=complex)
        for states in iter_trajectories(
            H, rho0, channels, grid, n_traj, seed, step_us=step_us
        ):
            acc += np.einsum("ti,tj->tij", states, states.conj())
        acc /= n_traj
        return [QuantumState(H.basis, DENSITY, acc[i]) for i in range(len(grid))]
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Quantum-jump trajectories
# ---------------------------------------------------------------------------


def iter_trajectories(
    H: HamiltonianMatrix,
    psi0: QuantumState,
    channels,
    grid: TimeGrid,
    n_traj: int,
    seed: int,
    *,
    step_us: float = DEFAULT_STEP_US,
    key: tuple[int, ...] = (),
):
    """Yield (n_times, dim) arrays of normalized states, one trajectory each.

    Between jumps the state evolves under the non-Hermitian generator
    -i*2*pi*H - decay/2, and a jump fires when the squared norm crosses a
    uniform threshold; the crossing is located by linear interpolation
    within the step.  Trajectory j draws from the stream addressed by
    (seed, *key, j) only, so results are independent of iteration order;
    callers running several ensembles from one base seed pass a distinct
    ``key`` per ensemble member.
    """
    _check_lindblad_args(H, psi0, channels, step_us)
    if not psi0.is_pure:
        raise ValueError("trajectory unraveling starts from a pure state")
    if n_traj <= 0:
        raise ValueError("n_traj must be positive")
    ops = _ChannelOps(H.basis, channels)
    Hs = scipy.sparse.csr_matrix(H.entries)
    decay = ops.decay

    def rhs(psi):
        return (-1j * TWO_PI) * (Hs @ psi) - (0.5 * decay) * psi

    for j in range(n_traj):
        rng = rng_for(seed, TRAJECTORY_STREAM, *key, j)
        yield _single_trajectory(rhs, ops, psi0.data.astype(complex), grid, rng, step_us)


def _single_trajectory(rhs, ops: _ChannelOps, psi, grid: TimeGrid, rng, step_us):
    out = np.empty((len(grid), psi.size), dtype=complex)
    out[0] = psi / np.linalg.norm(psi)
    threshold = rng.random()
    times = grid.times
    for i in range(1, len(times)):
        n, h = _substeps(times[i - 1], times[i], step_us)
        for _ in range(n):
            psi, threshold = _advance_with_jumps(rhs, ops, psi, h, threshold, rng)
        out[i] = psi / np.linalg.norm(psi)
    return out


def _advance_with_jumps(rhs, ops, psi, h, threshold, rng):
    """One step of size h, applying jumps at interpolated crossing times."""
    remaining = h
    while True:
        n2_prev = float(np.vdot(psi, psi).real)
        psi_next = _rk4_step(rhs, psi, remaining)
        n2_next = float(np.vdot(psi_next, psi_next).real)
        if n2_next > threshold:
            return psi_next, threshold
        frac = (n2_prev - threshold) / max(n2_prev - n2_next, 1e-300)
        frac = min(max(frac, 1e-12), 1.0)
        at_jump = psi_next if frac >= 1.0 else _rk4_step(rhs, psi, frac * remaining)
        weights = ops.jump_weights(at_jump)
        total = float(weights.sum())
        if total <= 0.0:
            return psi_next, threshold
        choice = int(np.searchsorted(np.cumsum(weights), rng.random() * total))
        choice = min(choice, weights.size - 1)
        psi = ops.apply_jump(at_jump, choice)
        threshold = rng.random()
        remaining = (1.0 - frac) * remaining
        if remaining <= 0.0:
            return psi, threshold
