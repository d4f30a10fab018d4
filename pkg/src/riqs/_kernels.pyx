# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _apply_site(const double[::1] psi, double[::1] out,
                             Py_ssize_t n, Py_ssize_t site, const double* u) noexcept nogil:
    # real arithmetic on interleaved (re, im) pairs; C complex products are slow
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - 1 - site)
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t block, j, i0, i1
    cdef double ar, ai, br, bi
    block = 0
    while block < dim:
        for j in range(stride):
            i0 = 2 * (block + j)
            i1 = i0 + 2 * stride
            ar = psi[i0]
            ai = psi[i0 + 1]
            br = psi[i1]
            bi = psi[i1 + 1]
            out[i0] = u[0] * ar - u[1] * ai + u[2] * br - u[3] * bi
            out[i0 + 1] = u[0] * ai + u[1] * ar + u[2] * bi + u[3] * br
            out[i1] = u[4] * ar - u[5] * ai + u[6] * br - u[7] * bi
            out[i1 + 1] = u[4] * ai + u[5] * ar + u[6] * bi + u[7] * br
        block += 2 * stride


cdef void _unpack(u, double* dst):
    m = np.asarray(u, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError("single-qubit gate must be 2x2")
    flat = m.reshape(-1)
    for k in range(4):
        dst[2 * k] = flat[k].real
        dst[2 * k + 1] = flat[k].imag


def apply_1q(psi, int n, int site, u):
    if not 0 <= site < n:
        raise ValueError(f"site {site} outside 0..{n - 1}")
    cdef double[8] g
    _unpack(u, g)
    src_arr = np.ascontiguousarray(psi, dtype=np.complex128)
    if src_arr.shape[0] != (1 << n):
        raise ValueError("state length does not match qubit count")
    cdef const double[::1] src = src_arr.view(np.float64)
    out = np.empty(src_arr.shape[0], dtype=np.complex128)
    cdef double[::1] dst = out.view(np.float64)
    with nogil:
        _apply_site(src, dst, n, site, g)
    return out


def apply_uniform_1q(psi, int n, u):
    cdef double[8] g
    _unpack(u, g)
    a = np.array(psi, dtype=np.complex128, copy=True)
    if a.shape[0] != (1 << n):
        raise ValueError("state length does not match qubit count")
    b = np.empty_like(a)
    cdef double[::1] src = a.view(np.float64)
    cdef double[::1] dst = b.view(np.float64)
    cdef double[::1] tmp
    cdef int site
    with nogil:
        for site in range(n):
            _apply_site(src, dst, n, site, g)
            tmp = src
            src = dst
            dst = tmp
    return a if n % 2 == 0 else b


def ising_diagonal(int n, coupling):
    if n > 62:
        raise ValueError("at most 62 qubits")
    cdef const double[:, ::1] c = np.ascontiguousarray(coupling, dtype=np.float64)
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    out = np.empty(dim, dtype=np.float64)
    cdef double[::1] e = out
    cdef double[64] s
    cdef double[64] h
    cdef Py_ssize_t i, k, l, j, changed
    cdef double energy, d
    with nogil:
        # start from all spins down, then walk the indices flipping changed bits;
        # h[k] = sum_l (c_kl + c_lk) s_l is the local field on spin k
        for k in range(n):
            s[k] = -0.5
        energy = 0.0
        for k in range(n):
            h[k] = 0.0
            for l in range(n):
                h[k] = h[k] + (c[k, l] + c[l, k]) * s[l]
                energy = energy + c[k, l] * s[k] * s[l]
        e[0] = energy
        for i in range(1, dim):
            changed = i ^ (i - 1)
            j = 0
            while changed:
                if changed & 1:
                    k = n - 1 - j
                    d = 1.0 if (i >> j) & 1 else -1.0
                    energy = energy + d * (h[k] - 2.0 * c[k, k] * s[k])
                    s[k] = s[k] + d
                    for l in range(n):
                        h[l] = h[l] + d * (c[k, l] + c[l, k])
                changed >>= 1
                j += 1
            e[i] = energy
    return out


def collective_moments(psi, int n):
    cdef const double complex[::1] a = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef const double[::1] ar = np.ascontiguousarray(a).view(np.float64)
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    # real/imag parts kept separate: C complex products are slow without -ffast-math
    cdef double[::1] vx = np.zeros(2 * dim)
    cdef double[::1] vy = np.zeros(2 * dim)
    cdef double[::1] mag = np.empty(dim)
    cdef Py_ssize_t i, k, j, i0, i1, stride, block
    cdef double m, pr, pi, zr, zi, xr, xi, yr, yi
    cdef double mx = 0, my = 0, mz = 0
    cdef double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0
    with nogil:
        for i in range(dim):
            mag[i] = -0.5 * n
        for k in range(n):
            stride = (<Py_ssize_t>1) << (n - 1 - k)
            block = 0
            while block < dim:
                for j in range(stride):
                    i0 = block + j
                    i1 = i0 + stride
                    mag[i1] += 1.0
                    vx[2 * i0] += ar[2 * i1]
                    vx[2 * i0 + 1] += ar[2 * i1 + 1]
                    vx[2 * i1] += ar[2 * i0]
                    vx[2 * i1 + 1] += ar[2 * i0 + 1]
                    # (jy psi)_down = +i/2 psi_up, (jy psi)_up = -i/2 psi_down
                    vy[2 * i0] -= ar[2 * i1 + 1]
                    vy[2 * i0 + 1] += ar[2 * i1]
                    vy[2 * i1] += ar[2 * i0 + 1]
                    vy[2 * i1 + 1] -= ar[2 * i0]
                block += 2 * stride
        for i in range(dim):
            m = mag[i]
            xr = 0.5 * vx[2 * i]
            xi = 0.5 * vx[2 * i + 1]
            yr = 0.5 * vy[2 * i]
            yi = 0.5 * vy[2 * i + 1]
            pr = ar[2 * i]
            pi = ar[2 * i + 1]
            zr = m * pr
            zi = m * pi
            mx += pr * xr + pi * xi
            my += pr * yr + pi * yi
            mz += m * (pr * pr + pi * pi)
            xx += xr * xr + xi * xi
            yy += yr * yr + yi * yi
            zz += zr * zr + zi * zi
            xy += xr * yr + xi * yi
            xz += xr * zr + xi * zi
            yz += yr * zr + yi * zi
    mean = np.array([mx, my, mz])
    second = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
    return mean, second
