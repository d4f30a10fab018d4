"""Bichromatic gate on trapped ions coupled to the centre-of-mass mode.

Time is measured in units of 1/nu when ``nu = 1``. The interaction-picture
Hamiltonian is

    H(t) = -sqrt(2) eta Omega J_y [x cos(w t) + p sin(w t)],   w = nu - delta,

and its exact propagator factorizes as

    U(t) = exp(-i A J_y^2) exp(-i F J_y x) exp(-i G J_y p)

with F, G, A given in closed form by :func:`coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp

from . import hilbert
from .hilbert import StateVector, TimeSeries


class ResonanceError(ValueError):
    """delta == nu makes the gate coefficients singular."""


class TruncationError(ValueError):
    """Fock truncation too small for the requested states."""


@dataclass(frozen=True)
class IonTrapParams:
    nu: float = 1.0
    delta: float = 0.95
    eta: float = 0.1
    omega: float = 0.177
    n_ions: int = 2
    n_max: int = 20

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("trap frequency must be positive")
        if self.delta <= 0:
            raise ValueError("detuning must be positive")
        if self.eta <= 0:
            raise ValueError("Lamb-Dicke parameter must be positive")
        if self.n_ions < 1:
            raise ValueError("need at least one ion")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def detuning_gap(self) -> float:
        """nu - delta; rejects the resonant case."""
        gap = self.nu - self.delta
        if abs(gap) < 1e-14 * self.nu:
            raise ResonanceError("delta equals nu: bichromatic gate is resonant")
        return gap

    @property
    def coupling(self) -> float:
        return math.sqrt(2.0) * self.eta * self.omega

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_ions + (self.n_max,)

    def replace(self, **changes) -> "IonTrapParams":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return IonTrapParams(**values)


FIG2A = IonTrapParams(nu=1.0, delta=0.9, eta=0.1, omega=0.1, n_ions=2, n_max=20)
FIG2B = IonTrapParams(nu=1.0, delta=0.95, eta=0.1, omega=0.177, n_ions=2, n_max=20)


@dataclass(frozen=True)
class BichromaticCoefficients:
    F: float
    G: float
    A: float


# --------------------------------------------------------------------------
# operators


@lru_cache(maxsize=32)
def _internal_jy(n_ions: int) -> np.ndarray:
    op = hilbert.collective_qubit_op(n_ions, "y").toarray()
    op.setflags(write=False)
    return op


@lru_cache(maxsize=64)
def _mode_parts(n_ions: int, n_max: int):
    jy = sp.csr_matrix(_internal_jy(n_ions))
    x = sp.csr_matrix(hilbert.position(n_max))
    p = sp.csr_matrix(hilbert.momentum(n_max))
    return sp.kron(jy, x, format="csr"), sp.kron(jy, p, format="csr")


def hamiltonian_at(p: IonTrapParams, t: float) -> sp.csr_matrix:
    """Interaction Hamiltonian on (2**n_ions) * n_max dimensions."""
    jx_part, jp_part = _mode_parts(p.n_ions, p.n_max)
    w = p.detuning_gap
    c = -p.coupling
    return c * math.cos(w * t) * jx_part + c * math.sin(w * t) * jp_part


def coefficients(p: IonTrapParams, t: float) -> BichromaticCoefficients:
    w = p.detuning_gap
    c = p.coupling
    F = -c * math.sin(w * t) / w
    G = -c * (1.0 - math.cos(w * t)) / w
    # A(t) = c * int_0^t F(s) sin(w s) ds
    A = -(c * c / w) * (t / 2.0 - math.sin(2.0 * w * t) / (4.0 * w))
    return BichromaticCoefficients(F, G, A)


def slow_gate_phase(p: IonTrapParams, t: float) -> float:
    """Secular part of A(t) in the weak-field regime."""
    return -((p.omega * p.eta) ** 2) * t / p.detuning_gap


def fast_gate_time(p: IonTrapParams, k: int) -> float:
    """k-th time at which F and G both return to zero."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return 2.0 * math.pi * k / abs(p.detuning_gap)


@lru_cache(maxsize=32)
def _jy_eigen(n_ions: int):
    w, v = np.linalg.eigh(_internal_jy(n_ions))
    w = np.round(w * 2) / 2
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@lru_cache(maxsize=64)
def _quadrature_eigen(n_max: int):
    wx, vx = np.linalg.eigh(hilbert.position(n_max))
    wp, vp = np.linalg.eigh(hilbert.momentum(n_max))
    for arr in (wx, vx, wp, vp):
        arr.setflags(write=False)
    return wx, vx, wp, vp


def _mode_exp(eigvals, eigvecs, angle: float) -> np.ndarray:
    return (eigvecs * np.exp(-1j * angle * eigvals)) @ eigvecs.conj().T


def effective_propagator(p: IonTrapParams, t: float) -> np.ndarray:
    """Dense U(t) on the truncated composite space."""
    coef = coefficients(p, t)
    m_vals, m_vecs = _jy_eigen(p.n_ions)
    wx, vx, wp, vp = _quadrature_eigen(p.n_max)
    d_int = m_vals.size
    blocks = []
    for m in m_vals:
        block = _mode_exp(wx, vx, coef.F * m) @ _mode_exp(wp, vp, coef.G * m)
        blocks.append(np.exp(-1j * coef.A * m * m) * block)
    # U = (V (x) 1) diag_m(U_m) (V^dag (x) 1)
    dim = d_int * p.n_max
    inner = np.zeros((dim, dim), dtype=np.complex128)
    for i, block in enumerate(blocks):
        sl = slice(i * p.n_max, (i + 1) * p.n_max)
        inner[sl, sl] = block
    frame = np.kron(m_vecs, np.eye(p.n_max))
    return frame @ inner @ frame.conj().T


def apply_effective(p: IonTrapParams, psi: StateVector, t: float) -> StateVector:
    """Apply U(t) to ``psi`` without forming the full matrix."""
    _check_space(p, psi)
    coef = coefficients(p, t)
    m_vals, m_vecs = _jy_eigen(p.n_ions)
    wx, vx, wp, vp = _quadrature_eigen(p.n_max)
    amps = psi.amps.reshape(m_vals.size, p.n_max)
    rotated = m_vecs.conj().T @ amps
    out = np.empty_like(rotated)
    for i, m in enumerate(m_vals):
        row = _mode_exp(wp, vp, coef.G * m) @ rotated[i]
        row = _mode_exp(wx, vx, coef.F * m) @ row
        out[i] = np.exp(-1j * coef.A * m * m) * row
    return psi.with_amps((m_vecs @ out).reshape(-1))


def _check_space(p: IonTrapParams, psi: StateVector):
    if psi.dims != p.dims:
        raise ValueError(f"state dims {psi.dims} do not match trap space {p.dims}")


def ground_state(p: IonTrapParams, n: int = 0) -> StateVector:
    """All ions in |g>, vibrational Fock state |n>."""
    if not 0 <= n < p.n_max:
        raise TruncationError(f"Fock state {n} outside truncation n_max={p.n_max}")
    return StateVector.basis(p.dims, [0] * p.n_ions + [n])


def required_n_max(p: IonTrapParams, n_initial: int = 0, margin: float = 8.0) -> int:
    """Fock truncation that keeps the displaced mode well inside the space.

    The largest displacement over all times is ``2 J eta Omega / |nu - delta|``
    with J = n_ions / 2.
    """
    alpha = p.n_ions * p.eta * p.omega / abs(p.detuning_gap)
    reach = (math.sqrt(n_initial) + alpha + margin) ** 2
    return int(math.ceil(reach)) + 10


def _states(p: IonTrapParams, psi0: StateVector, t_grid, engine: str, tol: float):
    if engine == "effective":
        return [apply_effective(p, psi0, t) for t in t_grid]
    if engine == "full":
        return hilbert.integrate(lambda t: hamiltonian_at(p, t), psi0, t_grid, tol)
    raise ValueError(f"unknown engine {engine!r}")


def internal_state(p: IonTrapParams, psi: StateVector) -> np.ndarray:
    """Reduced density matrix of the ions (vibrational mode traced out)."""
    return hilbert.partial_trace(psi, range(p.n_ions))


def gate_trace(
    p: IonTrapParams,
    psi0: StateVector,
    t_grid: Sequence[float],
    engine: Literal["full", "effective"] = "effective",
    tol: float = 1e-8,
) -> TimeSeries:
    """Density-matrix elements rho_{gg,gg}, rho_{ee,ee} and rho_{gg,ee} over time."""
    _check_space(p, psi0)
    t_grid = np.asarray(t_grid, dtype=float)
    states = _states(p, psi0, t_grid, engine, tol)
    top = 2**p.n_ions - 1
    rows = {"rho_gg_gg": [], "rho_ee_ee": [], "re_rho_gg_ee": [], "im_rho_gg_ee": []}
    for psi in states:
        rho = internal_state(p, psi)
        rows["rho_gg_gg"].append(rho[0, 0].real)
        rows["rho_ee_ee"].append(rho[top, top].real)
        rows["re_rho_gg_ee"].append(rho[0, top].real)
        rows["im_rho_gg_ee"].append(rho[0, top].imag)
    return TimeSeries(t_grid * p.nu, rows, unit="1/nu", meta={"engine": engine})


def vibrational_independence_report(
    p: IonTrapParams,
    n_list: Sequence[int],
    tau: float,
    engine: Literal["full", "effective"] = "effective",
    margin: int = 10,
    tol: float = 1e-10,
) -> float:
    """Largest pairwise trace distance between reduced ion states.

    Each run starts from all ions in |g> and the mode in Fock state n.
    """
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    if max(n_list) + margin >= p.n_max:
        raise TruncationError(
            f"n_max={p.n_max} leaves less than {margin} levels above Fock state {max(n_list)}"
        )
    reduced = []
    for n in n_list:
        psi = _states(p, ground_state(p, n), [tau], engine, tol)[-1]
        reduced.append(internal_state(p, psi))
    worst = 0.0
    for i in range(len(reduced)):
        for j in range(i + 1, len(reduced)):
            worst = max(worst, hilbert.trace_distance(reduced[i], reduced[j]))
    return worst


def bell_target(n_ions: int = 2) -> np.ndarray:
    """(|g..g> - i|e..e>)/sqrt(2) on the ion register."""
    v = np.zeros(2**n_ions, dtype=np.complex128)
    v[0] = 1 / math.sqrt(2)
    v[-1] = -1j / math.sqrt(2)
    return v
