"""Symmetric (Dicke) collective-spin states of N two-level particles.

Amplitudes are indexed by M = -J..J in ascending order; M counts excitations
as N_e = J + M, so ``amps[0]`` is |g...g> and ``amps[-1]`` is |e...e>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .hilbert import NORM_TOL, StateVector


class SymmetryError(ValueError):
    """Projection onto the symmetric subspace lost norm."""

    def __init__(self, lost_norm: float):
        super().__init__(f"state is not exchange symmetric: projection lost norm {lost_norm:.3e}")
        self.lost_norm = lost_norm


def _as_spin(J) -> Fraction:
    twice = Fraction(J) * 2
    if twice.denominator != 1 or twice < 1:
        raise ValueError(f"J must be a positive half-integer, got {J}")
    return Fraction(J)


@dataclass(frozen=True)
class DickeState:
    J: Fraction
    amps: np.ndarray

    def __post_init__(self):
        J = _as_spin(self.J)
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != int(2 * J + 1):
            raise ValueError(f"{amps.size} amplitudes for J={J}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("Dicke state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "amps", amps)

    @property
    def n_particles(self) -> int:
        return int(2 * self.J)

    @property
    def m_values(self) -> np.ndarray:
        j = float(self.J)
        return np.arange(-j, j + 1)

    @classmethod
    def ground(cls, n_particles: int) -> "DickeState":
        """|J, -J> = |g...g>."""
        amps = np.zeros(n_particles + 1, dtype=np.complex128)
        amps[0] = 1
        return cls(Fraction(n_particles, 2), amps)

    @classmethod
    def basis(cls, J, M) -> "DickeState":
        J = _as_spin(J)
        idx = Fraction(M) + J
        if idx.denominator != 1 or not 0 <= idx <= 2 * J:
            raise ValueError(f"M={M} invalid for J={J}")
        amps = np.zeros(int(2 * J + 1), dtype=np.complex128)
        amps[int(idx)] = 1
        return cls(J, amps)


@lru_cache(maxsize=128)
def _collective(twice_j: int, which: str) -> np.ndarray:
    j = twice_j / 2
    m = np.arange(-j, j + 1)
    up = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(up, k=-1).astype(np.complex128)
    ops = {
        "J+": jp,
        "J-": jp.conj().T,
        "Jz": np.diag(m).astype(np.complex128),
        "Jx": (jp + jp.conj().T) / 2,
        "Jy": (jp - jp.conj().T) / 2j,
    }
    if which not in ops:
        raise ValueError(f"unknown collective operator {which!r}")
    op = ops[which]
    op.setflags(write=False)
    return op


def collective_op(J, which: str) -> np.ndarray:
    """Angular-momentum matrix in the |J, M> basis (M ascending)."""
    return _collective(int(2 * _as_spin(J)), which).copy()


@lru_cache(maxsize=128)
def _eigen(twice_j: int, which: str):
    w, v = np.linalg.eigh(_collective(twice_j, which))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _apply_function(s: DickeState, which: str, fn) -> np.ndarray:
    w, v = _eigen(int(2 * s.J), which)
    return v @ (fn(w) * (v.conj().T @ s.amps))


def one_axis_twist(s: DickeState, A: float) -> DickeState:
    """exp(-i A J_y^2) applied to ``s``."""
    return DickeState(s.J, _apply_function(s, "Jy", lambda w: np.exp(-1j * A * w * w)))


def rotate(s: DickeState, axis: str, angle: float) -> DickeState:
    """exp(-i angle J_axis) applied to ``s``."""
    which = {"x": "Jx", "y": "Jy", "z": "Jz"}[axis]
    return DickeState(s.J, _apply_function(s, which, lambda w: np.exp(-1j * angle * w)))


def kicked_rotor_step(s: DickeState, kick: float, rotation: float) -> DickeState:
    """One period: rotation about x, then a J_y^2 kick scaled by 1/(2J+1)."""
    rotated = rotate(s, "x", rotation)
    scale = kick / float(2 * s.J + 1)
    return DickeState(s.J, _apply_function(rotated, "Jy", lambda w: np.exp(-1j * scale * w * w)))


def mean_spin(s: DickeState) -> np.ndarray:
    twice = int(2 * s.J)
    return np.array(
        [np.vdot(s.amps, _collective(twice, k) @ s.amps).real for k in ("Jx", "Jy", "Jz")]
    )


def ghz_fidelity(s: DickeState) -> tuple[float, float, float]:
    """Best overlap with (e^{i phi_g}|g..g> + e^{i phi_e}|e..e>)/sqrt(2).

    Returns ``(fidelity, phi_g, phi_e)``. The optimal phases are the
    arguments of the two extreme amplitudes.
    """
    a_g, a_e = s.amps[0], s.amps[-1]
    fid = (abs(a_g) + abs(a_e)) ** 2 / 2
    return float(min(fid, 1.0)), float(np.angle(a_g)), float(np.angle(a_e))


# --------------------------------------------------------------------------
# embedding into the full N-qubit space


def _excitation_count(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.array([bin(i).count("1") for i in idx])


def symmetric_embed(s: DickeState) -> StateVector:
    """Map |J, M> to the normalized sum of product states with J+M excitations."""
    n = s.n_particles
    if n > 20:
        raise ValueError("symmetric_embed supports at most 20 qubits")
    counts = _excitation_count(n)
    weights = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    amps = s.amps[counts] / np.sqrt(weights[counts])
    return StateVector((2,) * n, amps)


def symmetric_project(psi: StateVector, tol: float = 1e-9) -> DickeState:
    """Inverse of :func:`symmetric_embed`; raises if norm outside the symmetric subspace exceeds ``tol``."""
    n = len(psi.dims)
    if any(d != 2 for d in psi.dims):
        raise ValueError("symmetric_project needs a pure qubit register")
    counts = _excitation_count(n)
    sums = np.bincount(counts, weights=psi.amps.real, minlength=n + 1) + 1j * np.bincount(
        counts, weights=psi.amps.imag, minlength=n + 1
    )
    weights = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    amps = sums / np.sqrt(weights)
    lost = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if lost > tol:
        raise SymmetryError(lost)
    return DickeState(Fraction(n, 2), amps / np.linalg.norm(amps))

