"""Pure numpy implementations of the state-vector kernels.

Qubit ``k`` (0-based, leftmost factor) lives in bit ``n - 1 - k`` of the
basis index; bit value 1 is spin up (+1/2), bit value 0 is spin down.
"""

from functools import lru_cache

import numpy as np


def _site_view(psi, n, site):
    return psi.reshape(1 << site, 2, 1 << (n - 1 - site))


def apply_1q(psi, n, site, u):
    """Apply the 2x2 matrix ``u`` to qubit ``site``; returns a new array."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    v = _site_view(psi, n, site)
    out = np.einsum("ab,ibj->iaj", u, v)
    return out.reshape(-1)


def apply_uniform_1q(psi, n, u):
    """Apply the same 2x2 matrix to every qubit."""
    out = np.ascontiguousarray(psi, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    for site in range(n):
        v = _site_view(out, n, site)
        out = np.einsum("ab,ibj->iaj", u, v).reshape(-1)
    return out


@lru_cache(maxsize=32)
def spin_table(n):
    """(2**n, n) array of site spin projections, +-1/2 (read-only, cached)."""
    idx = np.arange(1 << n)
    shifts = np.arange(n - 1, -1, -1)
    table = ((idx[:, None] >> shifts) & 1) - 0.5
    table.setflags(write=False)
    return table


def ising_diagonal(n, coupling):
    """Diagonal of sum_{k,l} c[k,l] s_k s_l over the z product basis."""
    s = spin_table(n)
    c = np.asarray(coupling, dtype=np.float64)
    return np.einsum("ik,ik->i", s @ c, s)


def collective_moments(psi, n):
    """Mean collective spin and symmetrized second moments.

    Returns ``(mean, second)`` where ``mean[a] = <J_a>`` and
    ``second[a, b] = Re <J_a J_b>`` for a, b in (x, y, z).
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    vx = np.zeros_like(psi)
    vy = np.zeros_like(psi)
    for site in range(n):
        src = _site_view(psi, n, site)
        dx = _site_view(vx, n, site)
        dy = _site_view(vy, n, site)
        dx[:, 0, :] += 0.5 * src[:, 1, :]
        dx[:, 1, :] += 0.5 * src[:, 0, :]
        dy[:, 0, :] += 0.5j * src[:, 1, :]
        dy[:, 1, :] -= 0.5j * src[:, 0, :]
    m = spin_table(n).sum(axis=1)
    vz = m * psi
    vs = (vx, vy, vz)
    mean = np.array([np.vdot(psi, v).real for v in vs])
    second = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            second[a, b] = second[b, a] = np.vdot(vs[a], vs[b]).real
    return mean, second
