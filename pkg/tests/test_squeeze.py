import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.optimize import minimize_scalar
from scipy.stats import binom

from oracles import JX, JY, JZ, all_down, collective, dense_ising_x, ising_moments, ring_jz, ring_variance
from riqs import squeeze
from riqs.hilbert import StateVector
from riqs.lattice import LatticeConfig, sample_occupations
from riqs.squeeze import CouplingMap, UndefinedSqueezingError


def ring(n):
    cfg = LatticeConfig.filled(n, "periodic")
    return cfg, squeeze.neighbor_coupling_map(cfg, 1)


def random_map(rng, n):
    chi = rng.uniform(0, 1.2, size=(n, n))
    chi = (chi + chi.T) / 2
    np.fill_diagonal(chi, 0)
    return CouplingMap(n, chi)


def test_coupling_map_validation():
    with pytest.raises(ValueError):
        CouplingMap(2, np.array([[0, 1.0], [0.9, 0]]))
    with pytest.raises(ValueError):
        CouplingMap(2, np.eye(2))
    with pytest.raises(ValueError):
        CouplingMap(3, np.zeros((2, 2)))


def test_neighbor_map_ring_pairs():
    _, cmap = ring(4)
    assert len(cmap.coupled_pairs()) == 4


def test_neighbor_map_full_graph():
    cfg = LatticeConfig.filled(6)
    cmap = squeeze.neighbor_coupling_map(cfg, 5)
    assert len(cmap.coupled_pairs()) == 15
    with pytest.raises(ValueError):
        squeeze.neighbor_coupling_map(cfg, 6)
    with pytest.raises(ValueError):
        squeeze.neighbor_coupling_map(cfg, 0)


def test_neighbor_map_skips_holes():
    cfg = LatticeConfig(5, "open", (1, 0, 1, 1, 0))
    e = squeeze.neighbor_coupling_map(cfg, 2).entries
    assert not e[1].any() and not e[4].any()
    assert e[0, 2] == 1 and e[2, 3] == 1 and e[0, 3] == 0


def test_neighbor_map_visits_two_sided():
    cfg = LatticeConfig.filled(7)
    e = squeeze.neighbor_coupling_map(cfg, 2).entries
    assert e[3].sum() == 4


def test_evolve_start_state():
    cfg, cmap = ring(6)
    psi = squeeze.ising_x_evolve(cfg, cmap, 0.0)
    assert np.allclose(squeeze.mean_spin(psi), [0, 0, -3])


def test_two_atoms_against_dense():
    cfg = LatticeConfig.filled(2)
    cmap = CouplingMap(2, np.array([[0, 0.7], [0.7, 0]]))
    psi = squeeze.ising_x_evolve(cfg, cmap, 1.3)
    assert np.abs(psi.amps - dense_ising_x(cmap.entries, 1.3) @ all_down(2)).max() < 1e-12


@pytest.mark.parametrize("n", [3, 6, 8])
def test_exact_evolution_against_dense(rng, n):
    cmap = random_map(rng, n)
    psi = squeeze.ising_x_evolve(LatticeConfig.filled(n), cmap, 0.9)
    assert np.abs(psi.amps - dense_ising_x(cmap.entries, 0.9) @ all_down(n)).max() < 1e-12


def test_mean_jx_vanishes_n3(rng):
    cmap = random_map(rng, 3)
    jx = collective(JX, 3)
    for t in np.linspace(0, 3, 7):
        psi = squeeze.ising_x_evolve(LatticeConfig.filled(3), cmap, t)
        assert abs(np.vdot(psi.amps, jx @ psi.amps)) < 1e-14
        assert abs(squeeze.mean_spin(psi)[0]) < 1e-14


@pytest.mark.parametrize("n", [5, 7])
def test_moments_against_closed_form(rng, n):
    cmap = random_map(rng, n)
    cfg = LatticeConfig.filled(n)
    for t in (0.2, 0.9, 2.4):
        mean, second = squeeze.moments(squeeze.ising_x_evolve(cfg, cmap, t))
        ref_mean, ref_second = ising_moments(cmap.entries, t)
        assert np.abs(mean - ref_mean).max() < 1e-12
        assert np.abs(second - ref_second).max() < 1e-12


@pytest.mark.parametrize("n", [4, 8, 15])
def test_ring_jz_law(n):
    cfg, cmap = ring(n)
    for t in np.linspace(0, 1.5, 16):
        jz = squeeze.mean_spin(squeeze.ising_x_evolve(cfg, cmap, t))[2]
        assert abs(jz - ring_jz(n, t)) < 1e-9


@pytest.mark.parametrize("n", [4, 8, 15])
def test_ring_variance_law(n):
    # the ordered-pair Hamiltonian puts 2 chi t inside the sine
    cfg, cmap = ring(n)
    for t in np.linspace(0, 1.5, 16):
        psi = squeeze.ising_x_evolve(cfg, cmap, t)
        for theta in (-math.pi / 4, 0.3):
            assert abs(squeeze.variance_theta(psi, theta) - ring_variance(n, t, theta)) < 1e-9


def test_open_chain_edge_correction():
    n = 15
    cfg = LatticeConfig.filled(n)
    cmap = squeeze.neighbor_coupling_map(cfg, 1)
    t = 0.8
    jz = squeeze.mean_spin(squeeze.ising_x_evolve(cfg, cmap, t))[2]
    # two edge atoms have one neighbour: each contributes -cos(t)/2 instead of -cos(t)^2/2
    expected = ring_jz(n - 2, t) - math.cos(t)
    assert abs(jz - expected) < 1e-12
    assert abs(jz - ring_jz(n, t)) == pytest.approx(math.cos(t) * (1 - math.cos(t)), abs=1e-12)


def test_variance_at_start_is_coherent():
    cfg = LatticeConfig.filled(5)
    psi = squeeze.ising_x_evolve(cfg, squeeze.neighbor_coupling_map(cfg, 2), 0.0)
    for theta in np.linspace(-1.5, 1.5, 7):
        assert squeeze.variance_theta(psi, theta) == pytest.approx(5 / 4, abs=1e-14)


def test_variance_against_dense_n3(rng):
    cmap = random_map(rng, 3)
    psi = squeeze.ising_x_evolve(LatticeConfig.filled(3), cmap, 1.1)
    jx, jy = collective(JX, 3), collective(JY, 3)
    for theta in rng.uniform(-math.pi, math.pi, 5):
        op = math.cos(theta) * jx + math.sin(theta) * jy
        ref = np.vdot(psi.amps, op @ op @ psi.amps).real - np.vdot(psi.amps, op @ psi.amps).real ** 2
        assert abs(squeeze.variance_theta(psi, theta) - ref) < 1e-12


def test_xi_squared_start_and_undefined():
    cfg, cmap = ring(7)
    assert squeeze.xi_squared(squeeze.ising_x_evolve(cfg, cmap, 0.0), 0.4) == 1.0
    with pytest.raises(UndefinedSqueezingError):
        squeeze.xi_squared(squeeze.ising_x_evolve(cfg, cmap, math.pi / 2), 0.1)


def test_xi_squared_matches_composition():
    n = 15
    cfg, cmap = ring(n)
    for t in np.linspace(0.05, 1.2, 9):
        psi = squeeze.ising_x_evolve(cfg, cmap, t)
        ref = n * ring_variance(n, t, -math.pi / 4) / ring_jz(n, t) ** 2
        assert abs(squeeze.xi_squared(psi, -math.pi / 4) - ref) < 1e-9


def test_heisenberg_bound(rng):
    cfg = LatticeConfig.filled(7)
    cmap = squeeze.neighbor_coupling_map(cfg, 2)
    for t in np.linspace(0, 2, 11):
        psi = squeeze.ising_x_evolve(cfg, cmap, t)
        mean = squeeze.mean_spin(psi)
        vx = squeeze.variance_theta(psi, 0.0)
        vy = squeeze.variance_theta(psi, math.pi / 2)
        assert vx * vy >= mean[2] ** 2 / 4 - 1e-9


def test_variance_periodic_and_axes_orthogonal():
    cfg, cmap = ring(9)
    psi = squeeze.ising_x_evolve(cfg, cmap, 0.4)
    for theta in (-1.0, 0.2, 1.3):
        assert squeeze.variance_theta(psi, theta) == pytest.approx(squeeze.variance_theta(psi, theta + math.pi))
    mean, second = squeeze.moments(psi)
    th_min, _ = squeeze.minimize_variance(mean, second, 1e-9)
    th_max = minimize_scalar(lambda th: -squeeze.variance_theta(psi, th), bounds=(th_min, th_min + math.pi),
                             method="bounded", options={"xatol": 1e-10}).x
    assert (th_max - th_min) % math.pi == pytest.approx(math.pi / 2, abs=1e-6)


def test_minimize_variance_flat_tie_break():
    mean = np.array([0, 0, -1.0])
    second = np.diag([0.5, 0.5, 1.0])
    assert squeeze.minimize_variance(mean, second) == (-math.pi / 4, pytest.approx(0.5))


def test_minimize_xi_single_start_time():
    cfg, cmap = ring(5)
    res = squeeze.minimize_xi(cfg, cmap, [0.0])
    assert res.xi2_min == 1.0 and res.theta_opt == -math.pi / 4 and res.t_opt == 0.0


def test_minimize_xi_errors():
    cfg, cmap = ring(5)
    with pytest.raises(ValueError):
        squeeze.minimize_xi(cfg, cmap, [])
    with pytest.raises(UndefinedSqueezingError):
        squeeze.minimize_xi(cfg, cmap, [math.pi / 2])


def analytic_ring_minimum(n):
    """Scalar optimization of the closed-form xi^2 over (t, theta)."""

    def best_theta(t):
        r = minimize_scalar(lambda th: ring_variance(n, t, th), bounds=(-math.pi / 2, 0.0),
                            method="bounded", options={"xatol": 1e-12})
        return r.fun, r.x

    def xi2(t):
        return n * best_theta(t)[0] / ring_jz(n, t) ** 2

    r = minimize_scalar(xi2, bounds=(0.05, 1.2), method="bounded", options={"xatol": 1e-12})
    return r.fun, r.x, best_theta(r.x)[1]


def test_minimize_xi_against_analytic_ring():
    n = 15
    cfg, cmap = ring(n)
    xi_ref, t_ref, th_ref = analytic_ring_minimum(n)
    res = squeeze.minimize_xi(cfg, cmap, squeeze.default_time_grid())
    assert abs(res.xi2_min - xi_ref) < 1e-6
    assert abs(res.t_opt - t_ref) < 1e-3
    assert abs(res.theta_opt - th_ref) < 1e-3
    assert res.xi2_min < 1
    assert res.mean_spin[2] == pytest.approx(ring_jz(n, res.t_opt), abs=1e-9)


def test_short_time_angle():
    cfg, cmap = ring(15)
    res = squeeze.minimize_xi(cfg, cmap, [0.01])
    assert abs(res.theta_opt + math.pi / 4) < 0.01


def test_min_variance_curve_start():
    cfg, cmap = ring(6)
    ts = squeeze.min_variance_curve(cfg, cmap, [0.0, 0.3])
    assert ts["variance_min"][0] == pytest.approx(1.5)
    assert ts["variance_min"][1] < 1.5


def test_more_neighbours_squeeze_more():
    cfg = LatticeConfig.filled(9)
    values = [squeeze.minimize_xi(cfg, squeeze.neighbor_coupling_map(cfg, k), squeeze.default_time_grid()).xi2_min
              for k in (1, 2, 3)]
    assert values[0] > values[1] > values[2]


def test_stable_mean():
    vals = [0.1] * 7
    assert squeeze.stable_mean(vals) == (0.1, 0.0)
    rng = np.random.default_rng(5)
    x = rng.normal(size=50)
    a = squeeze.stable_mean(x)
    b = squeeze.stable_mean(rng.permutation(x))
    assert a == b
    assert math.isnan(squeeze.stable_mean([1.0])[1])
    with pytest.raises(ValueError):
        squeeze.stable_mean([])


def test_monte_carlo_full_filling_is_deterministic():
    grid = np.linspace(0, 1.5, 16)
    res = squeeze.monte_carlo_xi(1.0, 1, n_atoms=7, trials=4, seed=3, t_grid=grid)
    direct = squeeze.minimize_xi(LatticeConfig.filled(7), squeeze.neighbor_coupling_map(LatticeConfig.filled(7), 1), grid)
    assert res.stderr == 0.0 and res.mean == direct.xi2_min
    assert [r["trial"] for r in res.records] == [0, 1, 2, 3]


def test_monte_carlo_reproducible_and_parallel_safe():
    grid = np.linspace(0, 1.5, 16)
    a = squeeze.monte_carlo_xi(0.5, 1, n_atoms=6, trials=4, seed=9, t_grid=grid)
    b = squeeze.monte_carlo_xi(0.5, 1, n_atoms=6, trials=4, seed=9, t_grid=grid, workers=2)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert [r["seed"] for r in a.records] == [r["seed"] for r in b.records]
    c = squeeze.monte_carlo_xi(0.5, 1, n_atoms=6, trials=4, seed=10, t_grid=grid)
    assert c.mean != a.mean
    with pytest.raises(ValueError):
        squeeze.monte_carlo_xi(0.5, 1, trials=0)


def test_trial_uses_sampled_lattice():
    seeds = squeeze.trial_seeds(4, 2)
    res = squeeze.monte_carlo_xi(0.3, 2, n_atoms=5, trials=2, seed=4, t_grid=np.linspace(0, 1.5, 8))
    for s, r in zip(seeds, res.records):
        assert r["occupations"] == sample_occupations(0.3, 5, s).occupations


def test_counting_rotation_targets_axis():
    for theta in (-0.8, 0.0, 1.1):
        u = squeeze.counting_rotation(theta)
        state = np.array([np.exp(0.5j * theta), np.exp(-0.5j * theta)]) / math.sqrt(2)
        assert np.allclose(u @ state, [0, 1])
        assert np.allclose(u.conj().T @ u, np.eye(2))


@pytest.mark.parametrize("theta", [-math.pi / 4, 0.0, 0.9])
def test_counting_coherent_is_binomial(theta):
    n = 9
    psi = StateVector.basis((2,) * n, [0] * n)
    dist = squeeze.counting_statistics(psi, theta)
    assert np.abs(dist - binom.pmf(np.arange(n + 1), n, 0.5)).max() < 1e-14


def test_counting_squeezed_is_sub_binomial():
    n = 9
    cfg, cmap = ring(n)
    res = squeeze.minimize_xi(cfg, cmap, squeeze.default_time_grid())
    psi = squeeze.ising_x_evolve(cfg, cmap, res.t_opt)
    dist = squeeze.counting_statistics(psi, res.theta_opt)
    k = np.arange(n + 1)
    var = dist @ k**2 - (dist @ k) ** 2
    assert abs(dist.sum() - 1) < 1e-12
    assert var < n / 4
    assert var == pytest.approx(squeeze.variance_theta(psi, res.theta_opt), abs=1e-10)


def test_jz_operator_oracle_consistency():
    # the collective z operator from the oracle agrees with the moments kernel
    n = 4
    psi = StateVector((2,) * n, expm(-0.4j * collective(JX, n)) @ all_down(n))
    assert squeeze.mean_spin(psi)[2] == pytest.approx(np.vdot(psi.amps, collective(JZ, n) @ psi.amps).real)
