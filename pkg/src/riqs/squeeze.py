"""Spin squeezing from lattice-displacement Ising couplings.

Atoms start in |-1/2> and evolve under ``H = sum_{k,l} chi_kl j_x,k j_x,l``,
the sum running over ordered pairs so each coupled pair contributes
``2 chi j_x j_x``. With one neighbour on a ring this gives
``<J_z> = -(N/2) cos^2(chi t)``. Times are in units of 1/chi.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .hilbert import SPIN_HALF, StateVector, TimeSeries
from .lattice import (
    X_BASIS,
    LatticeConfig,
    all_down,
    random_structure_evolve,
    sample_occupations,
    to_x_basis,
    x_basis_energies,
)

THETA_SEEDS = 49
DEFAULT_THETA = -math.pi / 4


class UndefinedSqueezingError(ArithmeticError):
    """Mean spin vanishes, so xi^2 is undefined."""


@dataclass(frozen=True)
class CouplingMap:
    n_sites: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.shape != (self.n_sites, self.n_sites):
            raise ValueError(f"coupling matrix shape {e.shape} for {self.n_sites} sites")
        if np.max(np.abs(e - e.T), initial=0.0) > 1e-15:
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(e) != 0):
            raise ValueError("coupling matrix must have zero diagonal")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def coupled_pairs(self) -> list[tuple[int, int]]:
        k, l = np.nonzero(np.triu(self.entries, 1))
        return list(zip(k.tolist(), l.tolist()))


def neighbor_coupling_map(
    cfg: LatticeConfig, n_neighbors: int, boundary: str | None = None, chi: float = 1.0
) -> CouplingMap:
    """Equal couplings between occupied sites at most ``n_neighbors`` apart."""
    boundary = boundary or cfg.boundary
    n = cfg.n_sites
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be >= 1")
    if n_neighbors > max(n - 1, 1):
        raise ValueError(f"{n_neighbors} neighbours exceed a lattice of {n} sites")
    k = np.arange(n)
    dist = np.abs(k[:, None] - k[None, :])
    if boundary == "periodic":
        dist = np.minimum(dist, n - dist)
    elif boundary != "open":
        raise ValueError(f"unknown boundary {boundary!r}")
    h = np.array(cfg.occupations, dtype=float)
    mask = (dist > 0) & (dist <= n_neighbors)
    return CouplingMap(n, chi * mask * np.outer(h, h))


def ising_x_evolve(cfg: LatticeConfig, cmap: CouplingMap, t: float) -> StateVector:
    """All-down initial state evolved under the random-structure Ising model."""
    return random_structure_evolve(all_down(cfg), cfg, cmap, t)


# --------------------------------------------------------------------------
# collective moments


def moments(psi: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """(<J_a>, Re <J_a J_b>) for a, b in x, y, z."""
    return kernels.collective_moments(psi.amps, len(psi.dims))


def mean_spin(psi: StateVector) -> np.ndarray:
    return moments(psi)[0]


def _axis(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta), 0.0])


def _variance(mean, second, theta) -> float:
    # double-angle form keeps isotropic states exact for every theta
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    sxx, syy, sxy = second[0, 0], second[1, 1], second[0, 1]
    along = _axis(theta) @ mean
    return float((sxx + syy) / 2 + c2 * (sxx - syy) / 2 + s2 * sxy - along * along)


def variance_theta(psi: StateVector, theta: float) -> float:
    """Variance of J_theta = cos(theta) J_x + sin(theta) J_y."""
    return _variance(*moments(psi), theta)


def _xi2(n: int, variance: float, jz: float) -> float:
    if jz * jz < 1e-12 * n * n:
        raise UndefinedSqueezingError(f"<J_z> = {jz:.3e} vanishes; xi^2 undefined")
    return n * variance / (jz * jz)


def xi_squared(psi: StateVector, theta: float) -> float:
    """N (Delta J_theta)^2 / <J_z>^2."""
    mean, second = moments(psi)
    return _xi2(len(psi.dims), _variance(mean, second, theta), mean[2])


def minimize_variance(mean, second, tol: float = 1e-6) -> tuple[float, float]:
    """(theta, variance) minimizing Var(J_theta) over theta in [-pi/2, pi/2)."""
    grid = -math.pi / 2 + math.pi * np.arange(THETA_SEEDS) / THETA_SEEDS
    values = np.array([_variance(mean, second, th) for th in grid])
    if np.ptp(values) <= 1e-12 * max(1.0, abs(values[0])):
        return DEFAULT_THETA, float(_variance(mean, second, DEFAULT_THETA))
    i = int(np.argmin(values))
    step = math.pi / THETA_SEEDS
    res = minimize_scalar(
        lambda th: _variance(mean, second, th),
        bounds=(grid[i] - step, grid[i] + step),
        method="bounded",
        options={"xatol": tol},
    )
    theta = (res.x + math.pi / 2) % math.pi - math.pi / 2
    best = float(res.fun)
    if values[i] < best:
        theta, best = float(grid[i]), float(values[i])
    return float(theta), best


# --------------------------------------------------------------------------
# optimization over time and angle


def _all_down_amps(n: int) -> np.ndarray:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1
    return amps


class _Trajectory:
    """Cached x-basis data for one configuration: each time costs one phase multiply."""

    def __init__(self, cfg: LatticeConfig, cmap: CouplingMap):
        self.n = cfg.n_atoms
        energies = x_basis_energies(cfg, cmap)
        # equal couplings give few distinct levels; exponentiate each once
        self.levels, self.level_of = np.unique(np.round(energies, 12), return_inverse=True)
        self.start = to_x_basis(all_down(cfg))
        # single-spin map from physical axes to x-basis axes
        frame = np.empty((3, 3))
        ops = [2 * SPIN_HALF[a] for a in "xyz"]
        for a in range(3):
            rotated = X_BASIS.conj().T @ ops[a] @ X_BASIS
            for b in range(3):
                frame[a, b] = 0.5 * np.trace(rotated @ ops[b]).real
        self.frame = frame

    def moments(self, t: float):
        if t == 0:
            # identity evolution; skip the basis change so the start state stays exact
            return kernels.collective_moments(_all_down_amps(self.n), self.n)
        amps = np.exp(-1j * t * self.levels)[self.level_of] * self.start
        mean, second = kernels.collective_moments(amps, self.n)
        return self.frame @ mean, self.frame @ second @ self.frame.T

    def best_at(self, t: float, tol: float):
        """(xi2_min, theta_opt, variance_min, mean) at time t."""
        mean, second = self.moments(t)
        theta, var = minimize_variance(mean, second, tol)
        return _xi2(self.n, var, mean[2]), theta, var, mean


@dataclass
class SqueezingResult:
    t_opt: float
    theta_opt: float
    xi2_min: float
    mean_spin: np.ndarray
    variance_curve: TimeSeries


def minimize_xi(
    cfg: LatticeConfig,
    cmap: CouplingMap,
    t_grid: Sequence[float],
    theta_tol: float = 1e-6,
    t_tol: float = 1e-9,
) -> SqueezingResult:
    """Smallest xi^2 over the time grid and the in-plane angle.

    The best grid time is refined by a bounded Brent search between its
    neighbours.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("time grid is empty")
    traj = _Trajectory(cfg, cmap)
    n_t = t_grid.size
    xi2 = np.full(n_t, np.nan)
    theta = np.full(n_t, np.nan)
    var = np.full(n_t, np.nan)
    jz = np.empty(n_t)
    for i, t in enumerate(t_grid):
        mean, second = traj.moments(t)
        jz[i] = mean[2]
        th, v = minimize_variance(mean, second, theta_tol)
        theta[i], var[i] = th, v
        try:
            xi2[i] = _xi2(traj.n, v, mean[2])
        except UndefinedSqueezingError:
            pass
    if np.all(np.isnan(xi2)):
        raise UndefinedSqueezingError("xi^2 undefined at every grid time")
    i = int(np.nanargmin(xi2))
    best = (xi2[i], float(t_grid[i]), theta[i])
    if n_t > 1:
        lo = t_grid[max(i - 1, 0)]
        hi = t_grid[min(i + 1, n_t - 1)]

        def objective(t):
            try:
                return traj.best_at(t, theta_tol)[0]
            except UndefinedSqueezingError:
                return math.inf

        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": t_tol})
        if res.fun < best[0]:
            xi_r, th_r, _, _ = traj.best_at(res.x, theta_tol)
            best = (xi_r, float(res.x), th_r)
    xi_min, t_opt, theta_opt = best
    mean_opt = traj.moments(t_opt)[0]
    curve = TimeSeries(
        t_grid,
        {"xi2_min": xi2, "theta_opt": theta, "variance_min": var, "jz": jz},
        unit="1/chi",
    )
    return SqueezingResult(float(t_opt), float(theta_opt), float(xi_min), mean_opt, curve)


def min_variance_curve(cfg: LatticeConfig, cmap: CouplingMap, t_grid, theta_tol: float = 1e-6) -> TimeSeries:
    """Angle-minimized (Delta J_theta)^2 along a time grid."""
    traj = _Trajectory(cfg, cmap)
    rows = {"variance_min": [], "theta_opt": [], "jz": []}
    for t in t_grid:
        mean, second = traj.moments(t)
        th, v = minimize_variance(mean, second, theta_tol)
        rows["variance_min"].append(v)
        rows["theta_opt"].append(th)
        rows["jz"].append(mean[2])
    return TimeSeries(t_grid, rows, unit="1/chi")


# --------------------------------------------------------------------------
# Monte Carlo over fillings


def default_time_grid() -> np.ndarray:
    return np.linspace(0.0, 1.5, 31)


@dataclass
class MonteCarloResult:
    mean: float
    stderr: float
    records: list[dict] = field(default_factory=list)


def trial_seeds(seed: int, trials: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _run_trial(args):
    p, n_neighbors, n_atoms, trial_seed, t_grid, boundary = args
    cfg = sample_occupations(p, n_atoms, trial_seed, boundary)
    cmap = neighbor_coupling_map(cfg, n_neighbors)
    res = minimize_xi(cfg, cmap, t_grid)
    return {
        "seed": trial_seed,
        "n_sites": cfg.n_sites,
        "n_coupled_pairs": len(cmap.coupled_pairs()),
        "xi2_min": res.xi2_min,
        "t_opt": res.t_opt,
        "theta_opt": res.theta_opt,
        "occupations": cfg.occupations,
    }


def stable_mean(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error; exact for identical inputs, order independent."""
    values = sorted(float(v) for v in values)
    n = len(values)
    if n == 0:
        raise ValueError("no values")
    ref = values[0]
    mean = ref + math.fsum(v - ref for v in values) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def monte_carlo_xi(
    p: float,
    n_neighbors: int,
    n_atoms: int = 15,
    trials: int = 200,
    seed: int = 0,
    t_grid: Sequence[float] | None = None,
    boundary: str = "open",
    workers: int = 1,
) -> MonteCarloResult:
    """Mean minimal xi^2 over random fillings; deterministic given ``seed``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t_grid = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    seeds = trial_seeds(seed, trials)
    jobs = [(p, n_neighbors, n_atoms, s, t_grid, boundary) for s in seeds]
    if p == 1.0:
        # every trial sees the same filled lattice
        first = _run_trial(jobs[0])
        records = [dict(first, seed=s) for s in seeds]
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs))
    else:
        records = [_run_trial(j) for j in jobs]
    for i, r in enumerate(records):
        r["trial"] = i
    mean, stderr = stable_mean(r["xi2_min"] for r in records)
    return MonteCarloResult(mean, stderr, records)


# --------------------------------------------------------------------------
# readout


def counting_rotation(theta: float) -> np.ndarray:
    """Single-atom unitary taking (e^{-i theta/2}|+1/2> + e^{i theta/2}|-1/2>)/sqrt(2) to |+1/2>."""
    along = np.array([np.exp(0.5j * theta), np.exp(-0.5j * theta)]) / math.sqrt(2)
    against = np.array([np.exp(0.5j * theta), -np.exp(-0.5j * theta)]) / math.sqrt(2)
    return np.vstack([against.conj(), along.conj()])


def counting_statistics(psi: StateVector, theta: float) -> np.ndarray:
    """P(N_up = k), k = 0..N, after rotating the theta axis onto |+1/2>."""
    n = len(psi.dims)
    rotated = kernels.apply_uniform_1q(psi.amps, n, counting_rotation(theta))
    n_up = (kernels.spin_table(n) + 0.5).sum(axis=1).astype(int)
    return np.bincount(n_up, weights=np.abs(rotated) ** 2, minlength=n + 1)
