"""Composite Hilbert spaces: state vectors, operator construction, evolution.

Conventions used throughout the package:

* hbar = 1; single spin operators are ``j = sigma / 2``.
* Two-level basis order is (down, up) = (g, e) = (|0>, |1>), so
  ``jz = diag(-1/2, +1/2)`` and the spin algebra is right handed,
  ``[jx, jy] = i jz``.
* Tensor products put the leftmost factor slowest; qubits come first and
  a vibrational mode, when present, is the last subsystem.

Operators are plain numpy arrays or scipy sparse matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

NORM_TOL = 1e-9
DRIFT_LIMIT = 1e-6
DENSE_LIMIT = 4096


class NormDriftError(RuntimeError):
    """Integrator lost more norm than the allowed drift."""


@dataclass(frozen=True)
class StateVector:
    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"{amps.size} amplitudes do not match dims {dims}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps):.12g} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def with_amps(self, amps) -> "StateVector":
        return StateVector(self.dims, amps)

    @classmethod
    def basis(cls, dims: Sequence[int], digits: Sequence[int]) -> "StateVector":
        """Product basis state with the given digit in each subsystem."""
        index = int(np.ravel_multi_index(tuple(digits), tuple(dims)))
        amps = np.zeros(int(np.prod(dims)), dtype=np.complex128)
        amps[index] = 1.0
        return cls(tuple(dims), amps)

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "StateVector":
        factors = [np.asarray(f, dtype=np.complex128) for f in factors]
        return cls(tuple(f.size for f in factors), reduce(np.kron, factors))


@dataclass
class TimeSeries:
    """Observable records on a strictly increasing time grid."""

    times: np.ndarray
    values: dict[str, np.ndarray] = field(default_factory=dict)
    unit: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.values = {k: np.asarray(v) for k, v in self.values.items()}
        for key, v in self.values.items():
            if len(v) != len(self.times):
                raise ValueError(f"record {key!r} has {len(v)} entries, expected {len(self.times)}")

    @property
    def labels(self) -> list[str]:
        return list(self.values)

    def __getitem__(self, label: str) -> np.ndarray:
        return self.values[label]


# --------------------------------------------------------------------------
# operator builders

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, 1j], [-1j, 0]], dtype=np.complex128)
SZ = np.array([[-1, 0], [0, 1]], dtype=np.complex128)
I2 = np.eye(2, dtype=np.complex128)
SPIN_HALF = {"x": SX / 2, "y": SY / 2, "z": SZ / 2}


def is_hermitian(op, tol: float = 1e-12) -> bool:
    diff = op - op.conj().T
    if sp.issparse(diff):
        return diff.count_nonzero() == 0 or abs(diff).max() <= tol
    return bool(np.max(np.abs(diff), initial=0.0) <= tol)


def kron(ops: Sequence) -> np.ndarray | sp.spmatrix:
    """Tensor product, leftmost factor slowest. Sparse if any factor is."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    if any(sp.issparse(o) for o in ops):
        return reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)
    return reduce(np.kron, [np.asarray(o) for o in ops])


def annihilation(n_levels: int) -> np.ndarray:
    """Truncated lowering operator on Fock states 0..n_levels-1."""
    if n_levels < 1:
        raise ValueError("need at least one Fock level")
    return np.diag(np.sqrt(np.arange(1, n_levels)), k=1).astype(np.complex128)


def position(n_levels: int) -> np.ndarray:
    a = annihilation(n_levels)
    return (a + a.conj().T) / np.sqrt(2)


def momentum(n_levels: int) -> np.ndarray:
    a = annihilation(n_levels)
    return 1j * (a.conj().T - a) / np.sqrt(2)


def site_op(n_qubits: int, site: int, op) -> sp.csr_matrix:
    """Single-qubit ``op`` acting on ``site`` of an ``n_qubits`` register."""
    factors = [sp.identity(2, format="csr", dtype=np.complex128)] * n_qubits
    factors = list(factors)
    factors[site] = sp.csr_matrix(op)
    return kron(factors)


def collective_qubit_op(n_qubits: int, axis: str) -> sp.csr_matrix:
    """Collective spin ``J_axis = sum_k j_axis,k`` on the full register."""
    single = SPIN_HALF[axis]
    return reduce(lambda a, b: a + b, (site_op(n_qubits, k, single) for k in range(n_qubits)))


# --------------------------------------------------------------------------
# evolution


def _check_norm(amps: np.ndarray, where: str) -> np.ndarray:
    norm = np.linalg.norm(amps)
    drift = abs(norm - 1.0)
    if drift > DRIFT_LIMIT:
        raise NormDriftError(f"{where}: norm drifted by {drift:.3e}")
    return amps / norm


def integrate(
    H_of_t: Callable[[float], np.ndarray | sp.spmatrix],
    psi0: StateVector,
    times: Sequence[float],
    tol: float = 1e-8,
) -> list[StateVector]:
    """Propagate ``i dpsi/dt = H(t) psi`` from t=0, returning states at ``times``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return []
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    dim = psi0.dim
    probe = H_of_t(0.0)
    if probe.shape != (dim, dim):
        raise ValueError(f"operator shape {probe.shape} does not match state dim {dim}")

    def rhs(t, y):
        return -1j * (H_of_t(t) @ y)

    t_end = float(times[-1])
    if t_end == 0.0:
        return [psi0 for _ in times]
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        np.array(psi0.amps),
        method="DOP853",
        t_eval=times,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise NormDriftError(f"integrator failed: {sol.message}")
    return [psi0.with_amps(_check_norm(sol.y[:, i], f"t={t:g}")) for i, t in enumerate(sol.t)]


def evolve_ode(H_of_t, psi0: StateVector, t_final: float, tol: float = 1e-8) -> StateVector:
    """State at ``t_final`` under the time-dependent Hamiltonian ``H_of_t``."""
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    return integrate(H_of_t, psi0, [t_final], tol)[-1]


def evolve_diagonal(diag_energies, psi: StateVector, t: float) -> StateVector:
    energies = np.asarray(diag_energies, dtype=float)
    if energies.shape != psi.amps.shape:
        raise ValueError(f"{energies.size} energies for a {psi.dim}-dimensional state")
    return psi.with_amps(np.exp(-1j * t * energies) * psi.amps)


def evolve_constant(H, psi: StateVector, t: float) -> StateVector:
    """Exact evolution under a time-independent Hamiltonian."""
    if sp.issparse(H) and H.shape[0] > DENSE_LIMIT:
        from scipy.sparse.linalg import expm_multiply

        return psi.with_amps(expm_multiply(-1j * t * H, psi.amps))
    H = H.toarray() if sp.issparse(H) else np.asarray(H)
    w, v = np.linalg.eigh(H)
    return psi.with_amps(v @ (np.exp(-1j * t * w) * (v.conj().T @ psi.amps)))


# --------------------------------------------------------------------------
# measurement


def partial_trace(psi: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the subsystems in ``keep`` (sorted order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(psi.dims)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid subsystem selection {keep} for {n} subsystems")
    trace_out = [k for k in range(n) if k not in keep]
    tensor = psi.amps.reshape(psi.dims)
    tensor = np.transpose(tensor, keep + trace_out)
    d_keep = int(np.prod([psi.dims[k] for k in keep]))
    mat = tensor.reshape(d_keep, -1)
    return mat @ mat.conj().T


def expectation(psi: StateVector, op, hermitian: bool = True):
    if op.shape != (psi.dim, psi.dim):
        raise ValueError(f"operator shape {op.shape} does not match state dim {psi.dim}")
    value = np.vdot(psi.amps, op @ psi.amps)
    if hermitian:
        if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
            raise ValueError(f"expectation of a hermitian operator has imaginary part {value.imag:.3e}")
        return float(value.real)
    return complex(value)


def fidelity(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> float:
    """|<a|b>|^2 for pure states."""
    va = a.amps if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amps if isinstance(b, StateVector) else np.asarray(b)
    return float(abs(np.vdot(va, vb)) ** 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma``."""
    w = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.sum(np.abs(w)))
