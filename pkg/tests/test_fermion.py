import numpy as np
import pytest

import mblsim as m
from mblsim.evolve import TimeGrid


def _open_chain(rng, n, disorder=12.0):
    J = np.zeros((n, n))
    for i in range(n - 1):
        J[i, i + 1] = J[i + 1, i] = rng.uniform(0.3, 1.5)
    return m.SpinModel(
        J=J,
        h=rng.uniform(-0.7, -0.3, n),
        dh=rng.uniform(-disorder, disorder, n),
    )


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def test_initial_correlation_is_diagonal_occupation():
    C = m.initial_correlation(m.neel_occupations(10), 10)
    assert np.array_equal(np.diag(C).real, [0, 1, 0, 1, 0, 1, 0, 1, 0, 1])
    assert np.count_nonzero(C - np.diag(np.diag(C))) == 0


def test_initial_correlation_edge_cases():
    assert np.array_equal(m.initial_correlation([], 4), np.zeros((4, 4)))
    assert np.array_equal(m.initial_correlation(range(4), 4), np.eye(4))
    with pytest.raises(ValueError):
        m.initial_correlation([4], 4)


def test_single_particle_matrix_values(model):
    nn = m.restrict_nearest_neighbor(model, keep_ring_pair=False)
    h = m.single_particle_hamiltonian(nn)
    assert h.shape == (10, 10)
    assert np.array_equal(np.diag(h), nn.total_field)
    assert h[4, 5] == nn.J[4, 5]
    assert h[0, 9] == 0.0
    assert np.array_equal(h, h.T)


def test_single_particle_rejects_long_range(model):
    with pytest.raises(ValueError, match="nearest"):
        m.single_particle_hamiltonian(model)


def test_single_particle_rejects_ring_corner(model):
    ring = m.restrict_nearest_neighbor(model, keep_ring_pair=True)
    with pytest.raises(ValueError, match="nearest"):
        m.single_particle_hamiltonian(ring)


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def test_zero_time_returns_initial():
    rng = np.random.default_rng(0)
    model = _open_chain(rng, 6)
    h = m.single_particle_hamiltonian(model)
    C0 = m.initial_correlation([0, 2, 4], 6)
    assert np.allclose(m.evolve_correlation(h, C0, 0.0), C0, atol=1e-12)


def test_diagonal_hamiltonian_keeps_occupations():
    h = np.diag([0.3, -0.5, 1.2])
    C0 = m.initial_correlation([1], 3)
    for t in (0.1, 0.7):
        C = m.evolve_correlation(h, C0, t)
        assert np.allclose(np.diag(C).real, [0, 1, 0], atol=1e-12)


def test_two_site_analytic_oscillation():
    J = 0.6
    h = np.array([[0.0, J], [J, 0.0]])
    C0 = m.initial_correlation([0], 2)
    for t in (0.05, 0.31, 0.8):
        C = m.evolve_correlation(h, C0, t)
        assert C[0, 0].real == pytest.approx(np.cos(2 * np.pi * J * t) ** 2, abs=1e-12)


def test_hermiticity_and_spectrum_preserved():
    rng = np.random.default_rng(3)
    model = _open_chain(rng, 8)
    h = m.single_particle_hamiltonian(model)
    C0 = m.initial_correlation(m.neel_occupations(8), 8)
    for t in rng.uniform(0.0, 1.0, 5):
        C = m.evolve_correlation(h, C0, t)
        assert np.max(np.abs(C - C.conj().T)) < 1e-12
        lam = np.linalg.eigvalsh(C)
        assert lam.min() > -1e-9 and lam.max() < 1 + 1e-9


def test_particle_number_conserved():
    rng = np.random.default_rng(4)
    model = _open_chain(rng, 10)
    h = m.single_particle_hamiltonian(model)
    C0 = m.initial_correlation(m.neel_occupations(10), 10)
    for C in m.correlation_series(h, C0, np.linspace(0, 1, 9)):
        assert abs(np.trace(C).real - 5.0) < 1e-10


def test_correlation_series_matches_single_time():
    rng = np.random.default_rng(5)
    model = _open_chain(rng, 6)
    h = m.single_particle_hamiltonian(model)
    C0 = m.initial_correlation([1, 3, 5], 6)
    times = [0.0, 0.2, 0.9]
    series = m.correlation_series(h, C0, times)
    for t, C in zip(times, series):
        assert np.allclose(C, m.evolve_correlation(h, C0, t), atol=1e-12)


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------


def test_product_state_entropy_zero():
    C = m.initial_correlation([0, 2], 4)
    for subset in ([0], [1, 2], [0, 1, 2, 3]):
        assert m.entropy_from_correlation(C, subset) == pytest.approx(0.0, abs=1e-9)


def test_half_occupied_mode_gives_ln2():
    C = np.array([[0.5, 0.5], [0.5, 0.5]])  # eigenvalues 0 and 1; submatrix 0.5
    assert m.entropy_from_correlation(C, [0]) == pytest.approx(np.log(2), abs=1e-12)


def test_empty_subset_rejected():
    with pytest.raises(ValueError):
        m.entropy_from_correlation(np.eye(4), [])


# ---------------------------------------------------------------------------
# Cross-engine equivalence: the reason this module exists
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_matches_exact_spin_simulation(n):
    rng = np.random.default_rng(100 + n)
    model = _open_chain(rng, n)
    occupied = m.neel_occupations(n)
    basis = m.sector_basis(n, len(occupied))
    H = m.build_hamiltonian(model, basis)
    psi0 = m.neel_state(n)
    times = np.concatenate(([0.0], np.sort(rng.uniform(0.01, 1.0, 20))))
    states = m.evolve_pure(H, psi0, TimeGrid(times))
    h_sp = m.single_particle_hamiltonian(model)
    Cs = m.correlation_series(h_sp, m.initial_correlation(occupied, n), times)
    half = list(range(n // 4, n // 4 + n // 2))
    for state, C in zip(states, Cs):
        assert np.max(np.abs(m.site_probabilities(state) - m.occupations(C))) < 1e-8
        s_spin = m.von_neumann_entropy(m.partial_trace(state, half))
        s_ferm = m.entropy_from_correlation(C, half)
        assert abs(s_spin - s_ferm) < 1e-8


def test_entropy_saturates_under_strong_disorder(model):
    # nearest-neighbor chains localize: entropy at 0.25 us and 1.0 us differ
    # far less than the early-time growth
    nn = m.restrict_nearest_neighbor(model, keep_ring_pair=False)
    spec = m.DisorderSpec(bound=12.0, n_realizations=10, seed=7)
    half = [2, 3, 4, 5, 6]
    growth_early, growth_late = [], []
    for k in range(1, 11):
        h_sp = m.single_particle_hamiltonian(nn.with_disorder(m.sample_disorder(spec, k)))
        C0 = m.initial_correlation(m.neel_occupations(10), 10)
        Cs = m.correlation_series(h_sp, C0, [0.0, 0.05, 0.25, 1.0])
        s = [m.entropy_from_correlation(C, half) for C in Cs]
        growth_early.append(s[1] - s[0])
        growth_late.append(abs(s[3] - s[2]))
    assert np.mean(growth_late) < 0.5 * np.mean(growth_early)
