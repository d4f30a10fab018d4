"""Independent reference values built from dense matrices and closed forms."""

import math
from functools import reduce

import numpy as np
from scipy.linalg import expm

JX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
JY = np.array([[0, 0.5j], [-0.5j, 0]], dtype=complex)
JZ = np.diag([-0.5, 0.5]).astype(complex)
I2 = np.eye(2)


def site(op, k, n):
    return reduce(np.kron, [op if i == k else I2 for i in range(n)])


def collective(op, n):
    return sum(site(op, k, n) for k in range(n))


def all_down(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1
    return v


def dense_ising_x(chi, t):
    """exp(-i t sum_{k != l} chi_kl jx_k jx_l) from expm."""
    n = chi.shape[0]
    h = sum(chi[k, l] * site(JX, k, n) @ site(JX, l, n) for k in range(n) for l in range(n) if k != l)
    return expm(-1j * t * h)


def ising_moments(chi, t):
    """Closed-form <J_a> and <J_a J_b> after Ising-x evolution of |down...down>."""
    chi = np.asarray(chi, dtype=float)
    n = chi.shape[0]
    idx = range(n)
    jz1 = np.array([-0.5 * np.prod([math.cos(chi[k, l] * t) for l in idx if l != k]) for k in idx])
    yy = zz = yx = 0.0
    for k in idx:
        for m in idx:
            if k == m:
                continue
            rest = [l for l in idx if l not in (k, m)]
            pp = np.prod([math.cos((chi[k, l] + chi[m, l]) * t) for l in rest])
            pm = np.prod([math.cos((chi[k, l] - chi[m, l]) * t) for l in rest])
            yy += (pm - pp) / 8
            zz += (pp + pm) / 8
            yx += 0.25 * math.sin(chi[k, m] * t) * np.prod([math.cos(chi[m, l] * t) for l in rest])
    mean = np.array([0.0, 0.0, jz1.sum()])
    second = np.zeros((3, 3))
    second[0, 0] = second[1, 1] = second[2, 2] = n / 4
    second[1, 1] += yy
    second[2, 2] += zz
    second[0, 1] = second[1, 0] = yx
    return mean, second


def ring_variance(n, chi_t, theta):
    """Variance along cos(theta) x + sin(theta) y on a nearest-neighbour ring, n >= 5."""
    s = math.sin(2 * chi_t)
    c, sn = math.cos(theta), math.sin(theta)
    return n / 4 * c * c + n / 4 * (1 + 0.5 * s * s) * sn * sn + n / 2 * s * sn * c


def ring_jz(n, chi_t):
    return -n / 2 * math.cos(chi_t) ** 2


def bichromatic_phase(nu, delta, eta, omega, t):
    """Closed form of the J_y^2 coefficient A(t)."""
    w = nu - delta
    g = eta * omega
    return -(g**2) * t / w + g**2 * math.sin(2 * w * t) / (2 * w**2)
