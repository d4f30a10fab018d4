"""Optical-lattice spin engine built from state-selective displacement gates.

Atoms occupy a subset of lattice sites; the state vector lives on the
occupied sites only (one qubit per atom, in site order). Qubit value 1 is
|1> = |+1/2>, value 0 is |0> = |-1/2>.

A displacement gate adds the phase e^{i phi} to every |1>_k |0>_{k+d}
component with both sites occupied. Sweeping it over a chain realizes

    exp(-i phi sum_k (j_z,k + 1/2)(j_z,k+d - 1/2)),

i.e. the Ising coupling plus linear terms that cancel on a ring or when
both displacement directions are used with half the phase each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .hilbert import SPIN_HALF, StateVector, TimeSeries

Boundary = Literal["open", "periodic"]
Scheme = Literal["forward", "symmetric"]


@dataclass(frozen=True)
class LatticeConfig:
    n_sites: int
    boundary: Boundary = "open"
    occupations: tuple[int, ...] = ()
    seed: int = 0
    phase_per_step: float = 0.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("lattice needs at least one site")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        occ = tuple(int(h) for h in self.occupations) or (1,) * self.n_sites
        if len(occ) != self.n_sites:
            raise ValueError(f"{len(occ)} occupations for {self.n_sites} sites")
        if any(h not in (0, 1) for h in occ):
            raise ValueError("occupations must be 0 or 1")
        if sum(occ) < 1:
            raise ValueError("lattice holds no atoms")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def filled(cls, n_atoms: int, boundary: Boundary = "open", **kw) -> "LatticeConfig":
        return cls(n_atoms, boundary, (1,) * n_atoms, **kw)

    @property
    def atom_sites(self) -> tuple[int, ...]:
        return tuple(k for k, h in enumerate(self.occupations) if h)

    @property
    def n_atoms(self) -> int:
        return sum(self.occupations)


@dataclass(frozen=True)
class HeisenbergCouplings:
    chi: float = 1.0
    eta_c: float = 1.0
    lambda_c: float = 1.0


def all_down(cfg: LatticeConfig) -> StateVector:
    return StateVector.basis((2,) * cfg.n_atoms, [0] * cfg.n_atoms)


def _check_state(psi: StateVector, cfg: LatticeConfig):
    if psi.dims != (2,) * cfg.n_atoms:
        raise ValueError(f"state dims {psi.dims} do not match {cfg.n_atoms} atoms")


# --------------------------------------------------------------------------
# displacement primitive


def neighbor_pairs(cfg: LatticeConfig, direction: int = 1, distance: int = 1) -> list[tuple[int, int]]:
    """Atom index pairs (a, b) with atom b sitting ``direction * distance`` sites from atom a."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    atom_of = {site: i for i, site in enumerate(cfg.atom_sites)}
    pairs = []
    for site, a in atom_of.items():
        other = site + direction * distance
        if cfg.boundary == "periodic":
            other %= cfg.n_sites
        elif not 0 <= other < cfg.n_sites:
            continue
        if other == site:
            continue
        b = atom_of.get(other)
        if b is not None:
            pairs.append((a, b))
    return pairs


@lru_cache(maxsize=64)
def _displacement_counts(cfg: LatticeConfig, direction: int) -> np.ndarray:
    """Number of |1>_a |0>_b pairs in each basis state."""
    n = cfg.n_atoms
    bits = (kernels.spin_table(n) + 0.5).astype(np.intp)
    counts = np.zeros(1 << n, dtype=np.intp)
    for a, b in neighbor_pairs(cfg, direction):
        counts += bits[:, a] * (1 - bits[:, b])
    counts.setflags(write=False)
    return counts


def _phase_of_counts(counts: np.ndarray, phi: float) -> np.ndarray:
    # counts are small integers, so exponentiate once per distinct value
    return np.exp(1j * phi * np.arange(counts.max() + 1))[counts]


def displacement_gate(psi: StateVector, cfg: LatticeConfig, direction: int, phi: float) -> StateVector:
    """Phase e^{i phi} on each |1>_k |0>_{k+direction} component of occupied pairs."""
    _check_state(psi, cfg)
    counts = _displacement_counts(cfg, direction)
    return psi.with_amps(_phase_of_counts(counts, phi) * psi.amps)


# --------------------------------------------------------------------------
# single-particle pulses


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle j_axis) for one spin-1/2."""
    sigma = 2 * SPIN_HALF[axis]
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma


def global_pulse(psi: StateVector, axis: str, angle: float) -> StateVector:
    """Identical rotation exp(-i angle j_axis) on every atom."""
    n = len(psi.dims)
    return psi.with_amps(kernels.apply_uniform_1q(psi.amps, n, rotation_matrix(axis, angle)))


# --------------------------------------------------------------------------
# Ising / Heisenberg steps


def linear_residual(cfg: LatticeConfig, scheme: Scheme = "forward") -> np.ndarray:
    """Per-atom coefficient c_a of the leftover sum_a c_a j_z,a in an hzz step.

    The realized generator is ``sum_pairs j_z j_z + sum_a c_a j_z,a``. It is
    zero on a filled ring and for the symmetric scheme.
    """
    c = np.zeros(cfg.n_atoms)
    if scheme == "symmetric":
        return c
    for a, b in neighbor_pairs(cfg, 1):
        c[a] -= 0.5
        c[b] += 0.5
    return c


def hzz_step(psi: StateVector, cfg: LatticeConfig, phi: float, scheme: Scheme = "forward") -> StateVector:
    """exp(-i phi sum_<k,l> j_z,k j_z,l), up to the edge terms of :func:`linear_residual`.

    ``forward`` sweeps the displacement once with phase phi. ``symmetric``
    sweeps both directions with phi/2 each, which cancels the linear terms
    on any boundary. The constant phase of the sweep is removed.
    """
    _check_state(psi, cfg)
    if scheme == "forward":
        counts, unit = _displacement_counts(cfg, 1), phi
    elif scheme == "symmetric":
        counts, unit = _symmetric_counts(cfg), phi / 2
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    # the sweep's constant phase is unit * n_pairs / 4 per direction used
    offset = unit * len(neighbor_pairs(cfg, 1)) / 4
    if scheme == "symmetric":
        offset += unit * len(neighbor_pairs(cfg, -1)) / 4
    return psi.with_amps(np.exp(-1j * offset) * _phase_of_counts(counts, unit) * psi.amps)


@lru_cache(maxsize=64)
def _symmetric_counts(cfg: LatticeConfig) -> np.ndarray:
    counts = _displacement_counts(cfg, 1) + _displacement_counts(cfg, -1)
    counts.setflags(write=False)
    return counts


def hxx_step(psi: StateVector, cfg: LatticeConfig, phi: float, scheme: Scheme = "forward") -> StateVector:
    """hzz conjugated by pi/2 pulses about y: exp(-i phi sum j_x j_x)."""
    psi = global_pulse(psi, "y", math.pi / 2)
    psi = hzz_step(psi, cfg, phi, scheme)
    return global_pulse(psi, "y", -math.pi / 2)


def hyy_step(psi: StateVector, cfg: LatticeConfig, phi: float, scheme: Scheme = "forward") -> StateVector:
    """hzz conjugated by pi/2 pulses about x: exp(-i phi sum j_y j_y)."""
    psi = global_pulse(psi, "x", math.pi / 2)
    psi = hzz_step(psi, cfg, phi, scheme)
    return global_pulse(psi, "x", -math.pi / 2)


def trotter_evolve(
    psi: StateVector,
    cfg: LatticeConfig,
    c: HeisenbergCouplings,
    t_final: float,
    n_steps: int,
    scheme: Scheme = "forward",
) -> StateVector:
    """First-order product formula: n_steps of hzz(chi dt) hxx(eta dt) hyy(lambda dt)."""
    _check_state(psi, cfg)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    dt = t_final / n_steps
    for _ in range(n_steps):
        if c.chi:
            psi = hzz_step(psi, cfg, c.chi * dt, scheme)
        if c.eta_c:
            psi = hxx_step(psi, cfg, c.eta_c * dt, scheme)
        if c.lambda_c:
            psi = hyy_step(psi, cfg, c.lambda_c * dt, scheme)
    return psi


def site_magnetization(psi: StateVector) -> np.ndarray:
    """<j_z,k> for every atom."""
    n = len(psi.dims)
    probs = np.abs(psi.amps) ** 2
    return probs @ kernels.spin_table(n)


def spin_wave_sim(
    n_atoms: int,
    flip_index: int,
    c: HeisenbergCouplings,
    t_grid: Sequence[float],
    n_steps: int,
    boundary: Boundary = "open",
    scheme: Scheme = "symmetric",
) -> TimeSeries:
    """<j_z,k>(t) after flipping one atom of an all-down filled chain.

    ``n_steps`` Trotter steps are taken between consecutive grid times
    (and from t=0 to the first grid time).
    """
    if not 0 <= flip_index < n_atoms:
        raise IndexError(f"flip_index {flip_index} outside 0..{n_atoms - 1}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] < 0:
        raise ValueError("time grid must be non-empty and non-negative")
    cfg = LatticeConfig.filled(n_atoms, boundary)
    digits = [0] * n_atoms
    digits[flip_index] = 1
    psi = StateVector.basis((2,) * n_atoms, digits)
    rows = np.empty((t_grid.size, n_atoms))
    t_prev = 0.0
    for i, t in enumerate(t_grid):
        if t > t_prev:
            psi = trotter_evolve(psi, cfg, c, t - t_prev, n_steps, scheme)
        rows[i] = site_magnetization(psi)
        t_prev = t
    values = {f"jz_{k}": rows[:, k] for k in range(n_atoms)}
    meta = {
        "boundary": boundary,
        "scheme": scheme,
        "edge_linear_terms": bool(np.any(linear_residual(cfg, scheme))),
        "n_steps_per_interval": n_steps,
        "couplings": [c.chi, c.eta_c, c.lambda_c],
    }
    return TimeSeries(t_grid, values, unit="1/chi", meta=meta)


# --------------------------------------------------------------------------
# disorder and temperature


def sample_occupations(p: float, n_atoms: int, seed: int, boundary: Boundary = "open") -> LatticeConfig:
    """Fill sites with probability p until ``n_atoms`` atoms have been placed."""
    if not 0 < p <= 1:
        raise ValueError(f"filling probability must be in (0, 1], got {p}")
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    rng = np.random.default_rng(seed)
    occ: list[int] = []
    placed = 0
    chunk = max(16, int(2 * n_atoms / p))
    while placed < n_atoms:
        for u in rng.random(chunk):
            h = int(u < p)
            occ.append(h)
            placed += h
            if placed == n_atoms:
                break
    return LatticeConfig(len(occ), boundary, tuple(occ), seed=seed)


class NotProductStateError(ValueError):
    """Thermal pumping is defined only on z-basis product states."""


def thermal_pump(psi: StateVector, cfg: LatticeConfig, fraction: float, seed: int) -> StateVector:
    """Reset a random subset of round(fraction * N) atoms to |+1/2>."""
    _check_state(psi, cfg)
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    nonzero = np.flatnonzero(np.abs(psi.amps) > 1e-12)
    if nonzero.size != 1:
        raise NotProductStateError(f"state has {nonzero.size} z-basis components, expected 1")
    n = cfg.n_atoms
    k = int(math.floor(fraction * n + 0.5))
    chosen = np.random.default_rng(seed).choice(n, size=k, replace=False)
    index = int(nonzero[0])
    for a in chosen:
        index |= 1 << (n - 1 - int(a))
    amps = np.zeros_like(psi.amps)
    amps[index] = psi.amps[nonzero[0]]
    return psi.with_amps(amps)


# --------------------------------------------------------------------------
# random-structure Ising model in the x basis

# columns are the j_x eigenvectors for -1/2 and +1/2
X_BASIS = np.array([[1, 1], [-1, 1]], dtype=np.complex128) / math.sqrt(2)


def atom_couplings(cfg: LatticeConfig, coupling_map) -> np.ndarray:
    """Restrict a site coupling matrix to occupied sites."""
    chi = np.asarray(getattr(coupling_map, "entries", coupling_map), dtype=float)
    if chi.shape != (cfg.n_sites, cfg.n_sites):
        raise ValueError(f"coupling map shape {chi.shape} does not match {cfg.n_sites} sites")
    if not np.allclose(chi, chi.T, rtol=0, atol=1e-15):
        raise ValueError("coupling map must be symmetric")
    sites = list(cfg.atom_sites)
    return chi[np.ix_(sites, sites)]


def x_basis_energies(cfg: LatticeConfig, coupling_map) -> np.ndarray:
    """Diagonal of sum_{k,l} chi_kl j_x,k j_x,l in the j_x product basis (ordered pairs)."""
    return kernels.ising_diagonal(cfg.n_atoms, atom_couplings(cfg, coupling_map))


def to_x_basis(psi: StateVector) -> np.ndarray:
    return kernels.apply_uniform_1q(psi.amps, len(psi.dims), X_BASIS.conj().T)


def from_x_basis(amps: np.ndarray, n: int) -> np.ndarray:
    return kernels.apply_uniform_1q(amps, n, X_BASIS)


def random_structure_evolve(psi: StateVector, cfg: LatticeConfig, coupling_map, t: float) -> StateVector:
    """Exact exp(-i H t) for H = sum_{k,l} chi_kl h_k j_x,k h_l j_x,l."""
    _check_state(psi, cfg)
    energies = x_basis_energies(cfg, coupling_map)
    if t == 0:
        return psi
    phased = np.exp(-1j * t * energies) * to_x_basis(psi)
    return psi.with_amps(from_x_basis(phased, cfg.n_atoms))
