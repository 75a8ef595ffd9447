import numpy as np
import pytest
import scipy.linalg

import mblsim as m
from mblsim.evolve import CollapseChannel, TimeGrid


def _zero_hamiltonian(n):
    basis = m.full_basis(n)
    return m.HamiltonianMatrix(basis=basis, entries=np.zeros((basis.dim, basis.dim)))


def _two_site_swap(J=0.8, h=None):
    h = np.zeros(2) if h is None else np.asarray(h, float)
    model = m.SpinModel(J=np.array([[0.0, J], [J, 0.0]]), h=h, dh=np.zeros(2))
    return m.build_hamiltonian(model, m.full_basis(2))


def _superoperator(H_entries, channels, basis):
    """Independent Liouvillian: vectorize rho and apply expm."""
    d = H_entries.shape[0]
    eye = np.eye(d)
    L = -2j * np.pi * (np.kron(H_entries, eye) - np.kron(eye, H_entries.T))
    for ch in channels:
        if ch.kind == "relaxation":
            op = np.zeros((d, d))
            for a, s in enumerate(basis.states.tolist()):
                if (s >> (basis.n_sites - 1 - ch.site)) & 1:
                    op[basis.index_of[s ^ basis.site_bit(ch.site)], a] = 1.0
        else:
            op = np.diag(2.0 * basis.occupations[:, ch.site] - 1.0)
        ldl = op.T.conj() @ op
        L += ch.rate * (
            np.kron(op, op.conj())
            - 0.5 * np.kron(ldl, eye)
            - 0.5 * np.kron(eye, ldl.T)
        )
    return L


def _expm_lindblad(H, channels, rho0, times):
    L = _superoperator(H.entries, channels, H.basis)
    vec0 = rho0.reshape(-1)
    return [(scipy.linalg.expm(L * t) @ vec0).reshape(rho0.shape) for t in times]


# ---------------------------------------------------------------------------
# Time grids
# ---------------------------------------------------------------------------


def test_grid_must_start_at_zero():
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.1, 0.2]))


def test_grid_must_increase():
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 0.2, 0.2]))


def test_log_grid_starts_at_zero():
    grid = TimeGrid.logarithmic(0.01, 1.0, 30)
    assert grid.times[0] == 0.0
    assert grid.times[1] == pytest.approx(0.01)
    assert grid.times[-1] == pytest.approx(1.0)
    assert len(grid) == 30


def test_grid_window():
    grid = TimeGrid.linear(1.0, 11)
    idx = grid.window(0.25, 1.0)
    assert grid.times[idx[0]] == pytest.approx(0.3)
    assert grid.times[idx[-1]] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Propagator
# ---------------------------------------------------------------------------


def test_identity_at_t0(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    U = m.propagator(H, 0.0)
    assert np.allclose(U, np.eye(H.dim), atol=1e-12)


def test_negative_time_rejected(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    with pytest.raises(ValueError):
        m.propagator(H, -0.1)


def test_two_site_rabi_oscillation():
    # analytic two-level solution: P(other site) = sin^2(2 pi J t)
    J = 0.8
    H = _two_site_swap(J)
    psi0 = m.basis_state(H.basis, 0b10)
    idx01 = H.basis.index_of[0b01]
    for t in (0.0, 0.1, 0.31, 0.625, 1.0):
        U = m.propagator(H, t)
        prob = abs((U @ psi0.data)[idx01]) ** 2
        assert prob == pytest.approx(np.sin(2 * np.pi * J * t) ** 2, abs=1e-10)


def test_propagator_group_property(model):
    H = m.build_hamiltonian(m.submodel(model, range(4)), m.sector_basis(4, 2))
    U1 = m.propagator(H, 0.3)
    U2 = m.propagator(H, 0.45)
    U12 = m.propagator(H, 0.75)
    assert np.max(np.abs(U12 - U2 @ U1)) < 1e-9


def test_propagator_unitary(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    U = m.propagator(H, 0.7)
    assert np.max(np.abs(U.conj().T @ U - np.eye(H.dim))) < 1e-10


# ---------------------------------------------------------------------------
# Pure-state evolution
# ---------------------------------------------------------------------------


def test_diagonal_hamiltonian_keeps_populations():
    basis = m.full_basis(3)
    H = m.HamiltonianMatrix(basis=basis, entries=np.diag(np.arange(8.0)))
    psi0 = m.basis_state(basis, 0b101)
    states = m.evolve_pure(H, psi0, TimeGrid.linear(1.0, 6))
    for st in states:
        assert np.allclose(np.abs(st.data) ** 2, np.abs(psi0.data) ** 2, atol=1e-12)


def test_eigenvector_is_stationary(model):
    basis = m.sector_basis(6, 3)
    H = m.build_hamiltonian(m.submodel(model, range(6)), basis)
    _, V = np.linalg.eigh(H.entries)
    psi0 = m.pure_state(basis, V[:, 0])
    for st in m.evolve_pure(H, psi0, TimeGrid.linear(0.8, 5)):
        assert abs(abs(np.vdot(psi0.data, st.data)) - 1.0) < 1e-10


def test_basis_mismatch_rejected(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    psi0 = m.neel_state(10, sector=False)
    with pytest.raises(ValueError):
        m.evolve_pure(H, psi0, TimeGrid.linear(1.0, 3))


def test_evolve_pure_requires_pure(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    rho0 = m.neel_state(10).to_density()
    with pytest.raises(ValueError):
        m.evolve_pure(H, rho0, TimeGrid.linear(1.0, 3))


def test_norm_drift_below_tolerance(model):
    H = m.build_hamiltonian(model, m.sector_basis(10, 5))
    states = m.evolve_pure(H, m.neel_state(10), TimeGrid.linear(1.0, 21))
    for st in states:
        assert abs(np.linalg.norm(st.data) - 1.0) < 1e-10


def test_excitation_and_energy_conserved(model):
    rng = np.random.default_rng(8)
    disordered = model.with_disorder(rng.uniform(-12, 12, 10))
    basis = m.full_basis(10)
    H = m.build_hamiltonian(disordered, basis)
    psi0 = m.neel_state(10, sector=False)
    number = basis.occupations.sum(axis=1)
    e_scale = max(1.0, abs(float(np.vdot(psi0.data, H.entries @ psi0.data).real)))
    for st in m.evolve_pure(H, psi0, TimeGrid.linear(1.0, 11)):
        n_exp = float(np.sum(number * np.abs(st.data) ** 2))
        assert abs(n_exp - 5.0) < 1e-10
        e_exp = float(np.vdot(st.data, H.entries @ st.data).real)
        e0 = float(np.vdot(psi0.data, H.entries @ psi0.data).real)
        assert abs(e_exp - e0) / e_scale < 1e-9


def test_neel_probabilities_approach_half(model):
    # no disorder: every site probability near 0.5 once quasi-steady;
    # residual oscillation makes the single-sample value marginal, so the
    # check uses the quasi-steady window average like the crossover summary
    basis = m.sector_basis(10, 5)
    H = m.build_hamiltonian(model, basis)
    grid = TimeGrid.linear(1.0, 101)
    states = m.evolve_pure(H, m.neel_state(10), grid)
    probs = m.site_probability_series(states)
    window_mean = probs[grid.window(0.25, 1.0)].mean(axis=0)
    assert np.all(np.abs(window_mean - 0.5) < 0.15)


# ---------------------------------------------------------------------------
# Collapse channels
# ---------------------------------------------------------------------------


def test_collapse_rates(device):
    channels = m.collapse_channels(device)
    relax = {c.site: c.rate for c in channels if c.kind == "relaxation"}
    deph = {c.site: c.rate for c in channels if c.kind == "dephasing"}
    assert relax[0] == pytest.approx(1 / 25.6, abs=1e-12)
    assert relax[0] == pytest.approx(0.03906, abs=5e-5)
    assert deph[0] == pytest.approx(1 / 60.0, abs=1e-12)
    assert len(channels) == 20


def test_infinite_lifetimes_give_no_channels():
    dev = m.DeviceParams.from_dict({"t1": np.inf, "t_phi": np.inf})
    assert m.collapse_channels(dev) == []


def test_channel_validation():
    with pytest.raises(ValueError):
        CollapseChannel(site=0, kind="depolarizing", rate=0.1)
    with pytest.raises(ValueError):
        CollapseChannel(site=0, kind="relaxation", rate=-0.1)


# ---------------------------------------------------------------------------
# Lindblad evolution, dense RK4
# ---------------------------------------------------------------------------


def test_single_qubit_relaxation_decay():
    H = _zero_hamiltonian(1)
    gamma = 0.25
    grid = TimeGrid.linear(1.0, 11)
    rhos = m.lindblad_evolve(
        H, m.basis_state(H.basis, 1), [CollapseChannel(0, "relaxation", gamma)], grid
    )
    p1 = np.array([m.site_probabilities(r)[0] for r in rhos])
    assert np.allclose(p1, np.exp(-gamma * grid.times), atol=1e-9)


def test_dephasing_coherence_convention():
    # rate 1/(2 T_phi) with a Pauli-Z jump operator gives exp(-t/T_phi)
    H = _zero_hamiltonian(1)
    t_phi = 3.0
    plus = m.pure_state(H.basis, np.array([1.0, 1.0]) / np.sqrt(2))
    grid = TimeGrid.linear(1.0, 11)
    rhos = m.lindblad_evolve(
        H, plus, [CollapseChannel(0, "dephasing", 1 / (2 * t_phi))], grid
    )
    coh = np.array([r.data[0, 1].real for r in rhos])
    assert np.allclose(coh, 0.5 * np.exp(-grid.times / t_phi), atol=1e-9)


def test_combined_offdiagonal_decay_rate():
    H = _zero_hamiltonian(1)
    t1, t_phi = 5.0, 3.0
    plus = m.pure_state(H.basis, np.array([1.0, 1.0]) / np.sqrt(2))
    channels = [
        CollapseChannel(0, "relaxation", 1 / t1),
        CollapseChannel(0, "dephasing", 1 / (2 * t_phi)),
    ]
    grid = TimeGrid.linear(1.0, 11)
    rhos = m.lindblad_evolve(H, plus, channels, grid)
    coh = np.array([abs(r.data[0, 1]) for r in rhos])
    expected = 0.5 * np.exp(-grid.times * (1 / (2 * t1) + 1 / t_phi))
    assert np.allclose(coh, expected, atol=1e-9)


def test_no_channels_matches_pure_evolution(model):
    sub = m.submodel(model, range(3))
    basis = m.full_basis(3)
    H = m.build_hamiltonian(sub, basis)
    psi0 = m.bitstring_state("010", sector=False)
    grid = TimeGrid.linear(0.5, 6)
    rhos = m.lindblad_evolve(H, psi0, [], grid)
    pures = m.evolve_pure(H, psi0, grid)
    for rho, psi in zip(rhos, pures):
        assert np.max(np.abs(rho.data - np.outer(psi.data, psi.data.conj()))) < 1e-8


def test_trace_hermiticity_positivity(model):
    rng = np.random.default_rng(11)
    sub = m.submodel(model, range(3)).with_disorder(rng.uniform(-2, 2, 3))
    H = m.build_hamiltonian(sub, m.full_basis(3))
    channels = [
        CollapseChannel(0, "relaxation", 0.1),
        CollapseChannel(1, "relaxation", 0.05),
        CollapseChannel(2, "dephasing", 1 / 60),
    ]
    psi0 = m.bitstring_state("110", sector=False)
    rhos = m.lindblad_evolve(H, psi0, channels, TimeGrid.linear(1.0, 5))
    for r in rhos:
        assert abs(np.trace(r.data).real - 1.0) < 1e-6
        assert np.max(np.abs(r.data - r.data.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(r.data).min() > -1e-6


def _swap_scenario(device, model):
    sub = m.submodel(model, [6, 7])
    H = m.build_hamiltonian(sub, m.full_basis(2))
    psi0 = m.basis_state(H.basis, 0b10)
    channels = [
        CollapseChannel(0, "relaxation", 1 / device.t1[6]),
        CollapseChannel(1, "relaxation", 1 / device.t1[7]),
        CollapseChannel(0, "dephasing", 1 / 60),
        CollapseChannel(1, "dephasing", 1 / 60),
    ]
    return H, psi0, channels


def test_damped_swap_matches_superoperator_oracle(device, model):
    H, psi0, channels = _swap_scenario(device, model)
    grid = TimeGrid.linear(1.0, 51)
    rhos = m.lindblad_evolve(H, psi0, channels, grid)
    p_first = np.array([m.site_probabilities(r)[0] for r in rhos])
    oracle = _expm_lindblad(H, channels, psi0.to_density().data, grid.times)
    p_oracle = np.array([(np.diag(r).real @ H.basis.occupations)[0] for r in oracle])
    assert np.max(np.abs(p_first - p_oracle)) < 1e-3


def test_rk4_step_halving(device, model):
    H, psi0, channels = _swap_scenario(device, model)
    grid = TimeGrid.linear(1.0, 6)
    coarse = m.lindblad_evolve(H, psi0, channels, grid, step_us=1e-3)
    fine = m.lindblad_evolve(H, psi0, channels, grid, step_us=5e-4)
    for a, b in zip(coarse, fine):
        pa = m.site_probabilities(a)
        pb = m.site_probabilities(b)
        assert np.max(np.abs(pa - pb)) < 1e-6


def test_sector_basis_with_relaxation_rejected(model):
    basis = m.sector_basis(10, 5)
    H = m.build_hamiltonian(model, basis)
    rho0 = m.neel_state(10).to_density()
    with pytest.raises(ValueError, match="full basis"):
        m.lindblad_evolve(H, rho0, [CollapseChannel(0, "relaxation", 0.1)], TimeGrid.linear(0.1, 2))


def test_sector_dephasing_only_matches_full_basis(model):
    sub = m.submodel(model, range(4))
    channels = [CollapseChannel(i, "dephasing", 1 / 60) for i in range(4)]
    grid = TimeGrid.linear(0.5, 6)
    rho_sector = m.lindblad_evolve(
        m.build_hamiltonian(sub, m.sector_basis(4, 2)),
        m.neel_state(4).to_density(),
        channels,
        grid,
    )
    rho_full = m.lindblad_evolve(
        m.build_hamiltonian(sub, m.full_basis(4)),
        m.neel_state(4, sector=False).to_density(),
        channels,
        grid,
    )
    for rs, rf in zip(rho_sector, rho_full):
        ps = m.site_probabilities(rs)
        pf = m.site_probabilities(rf)
        assert np.allclose(ps, pf, atol=1e-10)


def test_invalid_method_and_parameters(model):
    H = m.build_hamiltonian(m.submodel(model, range(2)), m.full_basis(2))
    rho0 = m.bitstring_state("10", sector=False).to_density()
    grid = TimeGrid.linear(0.1, 2)
    with pytest.raises(ValueError):
        m.lindblad_evolve(H, rho0, [], grid, method="magnus")
    with pytest.raises(ValueError):
        m.lindblad_evolve(H, rho0, [], grid, step_us=0.0)
    with pytest.raises(ValueError):
        m.lindblad_evolve(H, rho0, [], grid, method="trajectory", n_traj=0, seed=1)
    with pytest.raises(ValueError):
        m.lindblad_evolve(H, rho0, [], grid, method="trajectory", n_traj=10)


# ---------------------------------------------------------------------------
# Quantum-jump trajectories
# ---------------------------------------------------------------------------


def test_trajectory_without_channels_is_pure_evolution(model):
    sub = m.submodel(model, range(3))
    H = m.build_hamiltonian(sub, m.full_basis(3))
    psi0 = m.bitstring_state("101", sector=False)
    grid = TimeGrid.linear(0.4, 5)
    rhos = m.lindblad_evolve(H, psi0, [], grid, method="trajectory", n_traj=3, seed=0)
    pures = m.evolve_pure(H, psi0, grid)
    for rho, psi in zip(rhos, pures):
        assert np.max(np.abs(rho.data - np.outer(psi.data, psi.data.conj()))) < 1e-8


def test_trajectory_deterministic_under_seed(device, model):
    H, psi0, channels = _swap_scenario(device, model)
    grid = TimeGrid.linear(0.3, 4)
    a = m.lindblad_evolve(H, psi0, channels, grid, method="trajectory", n_traj=20, seed=3)
    b = m.lindblad_evolve(H, psi0, channels, grid, method="trajectory", n_traj=20, seed=3)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.data, rb.data)


def test_trajectory_matches_dense_within_mc_error(device, model):
    H, psi0, channels = _swap_scenario(device, model)
    grid = TimeGrid.linear(1.0, 6)
    dense = m.lindblad_evolve(H, psi0, channels, grid)
    p_dense = np.array([m.site_probabilities(r) for r in dense])
    n_traj = 500
    samples = np.zeros((n_traj, len(grid), 2))
    for j, states in enumerate(
        m.iter_trajectories(H, psi0, channels, grid, n_traj, seed=12)
    ):
        samples[j] = np.abs(states) ** 2 @ H.basis.occupations
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0) / np.sqrt(n_traj)
    diff = np.abs(mean - p_dense)[1:]
    assert np.all(diff <= 3.0 * stderr[1:] + 1e-12)


def test_trajectory_requires_pure_initial_state(device, model):
    H, psi0, channels = _swap_scenario(device, model)
    with pytest.raises(ValueError, match="pure"):
        m.lindblad_evolve(
            H, psi0.to_density(), channels, TimeGrid.linear(0.1, 2),
            method="trajectory", n_traj=5, seed=1,
        )


def test_trajectory_relaxation_statistics():
    # single decaying qubit: trajectory average must reproduce exp(-gamma t)
    H = _zero_hamiltonian(1)
    gamma = 0.8
    grid = TimeGrid.linear(1.0, 6)
    n_traj = 400
    p1 = np.zeros((n_traj, len(grid)))
    for j, states in enumerate(
        m.iter_trajectories(
            H, m.basis_state(H.basis, 1), [CollapseChannel(0, "relaxation", gamma)],
            grid, n_traj, seed=21,
        )
    ):
        p1[j] = np.abs(states[:, H.basis.index_of[1]]) ** 2
    mean = p1.mean(axis=0)
    stderr = p1.std(axis=0) / np.sqrt(n_traj) + 1e-12
    expected = np.exp(-gamma * grid.times)
    assert np.all(np.abs(mean - expected)[1:] <= 4.0 * stderr[1:])
