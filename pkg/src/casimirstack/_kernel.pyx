# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-Delta grid kernel; contract identical to ``_kernel_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, expm1, log, log1p, fabs

cnp.import_array()


cdef inline double _log(double value, double excess) noexcept nogil:
    if fabs(excess) <= 0.5:
        return log1p(excess)
    return log(value)


def log_delta_grid(zeta, eps_in, eps_out, k, double d, double omega, bint tm, int m, bint primed):
    """log Delta on the (zeta, k) grid for 1..m cells; see ``_kernel_py``."""
    cdef const double[::1] zv = np.ascontiguousarray(zeta, dtype=np.float64)
    cdef const double[::1] ein = np.ascontiguousarray(eps_in, dtype=np.float64)
    cdef const double[::1] eout = np.ascontiguousarray(eps_out, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(k, dtype=np.float64)
    cdef Py_ssize_t L = zv.shape[0], M = kv.shape[0]
    if m < 1:
        raise ValueError("m must be >= 1")

    out_d = np.empty((m, L, M), dtype=np.float64)
    cdef double[:, :, ::1] od = out_d
    cdef double[:, :, ::1] op
    out_p = None
    if primed:
        out_p = np.empty((m, L, M), dtype=np.float64)
        op = out_p
    else:
        op = np.empty((1, 1, 1), dtype=np.float64)

    cdef Py_ssize_t i, j
    cdef int n
    cdef double z, z2, k2, Kin, Kout, P, Q, g, D, D2
    cdef double r_minus, r_plus, u_minus, u_plus, r, s, t, u, v, w, tr
    cdef double cav, dec, m_in, m_out, e1, E, Hd, alpha, a, b, shift
    cdef double v0, v1, v2, x0, x1, x2
    cdef bint zero

    with nogil:
        for i in range(L):
            z = zv[i]
            z2 = z * z
            zero = tm and omega > 0 and z == 0.0
            for j in range(M):
                k2 = kv[j] * kv[j]
                Kin = sqrt(k2 + ein[i] * z2)
                Kout = sqrt(k2 + eout[i] * z2)
                if zero:
                    r = -1.0
                    s = 1.0
                    t = -1.0
                    u = 0.0
                    v = 0.0
                    w = 0.0
                    tr = 0.0
                else:
                    if tm:
                        P = ein[i] * Kout
                        Q = eout[i] * Kin
                        g = 2.0 * omega / z2 * Kin * Kout if omega > 0 else 0.0
                    else:
                        P = Kout
                        Q = Kin
                        g = 2.0 * omega
                    D = P + Q + g
                    D2 = D * D
                    r_minus = (P - Q - g) / D
                    r_plus = (P - Q + g) / D
                    t = (P + Q - g) / D
                    u_minus = 4.0 * P * (Q + g) / D2
                    u_plus = 4.0 * Q * (P + g) / D2
                    w = 4.0 * g * (P + Q) / D2
                    tr = 4.0 * P * Q / D2
                    if tm:
                        r = r_minus
                        s = r_plus
                        u = u_minus
                        v = u_plus
                    else:
                        r = r_plus
                        s = r_minus
                        u = u_plus
                        v = u_minus

                cav = exp(-2.0 * d * Kin)
                dec = exp(-2.0 * d * Kout)
                m_in = -expm1(-2.0 * d * Kin)
                m_out = -expm1(-2.0 * d * Kout)
                e1 = -cav * r * r
                E = m_in + cav * u
                Hd = dec * (cav * t * t - s * s)
                alpha = e1 + Hd
                a = m_in * m_out + cav * u + dec * v - dec * cav * w
                b = dec * cav * tr * tr

                v0 = 1.0
                x0 = 0.0
                v1 = E
                x1 = e1
                od[0, i, j] = _log(v1, x1)
                for n in range(2, m + 1):
                    v2 = a * v1 - b * v0
                    x2 = x1 + alpha * (1.0 + x1) - b * (1.0 + x0)
                    od[n - 1, i, j] = _log(v2, x2)
                    v0 = v1
                    v1 = v2
                    x0 = x1
                    x1 = x2

                if primed:
                    shift = dec * cav * t * tr
                    v0 = 1.0
                    x0 = 0.0
                    v1 = a - shift
                    x1 = alpha - shift
                    op[0, i, j] = _log(v1, x1)
                    for n in range(2, m + 1):
                        v2 = a * v1 - b * v0
                        x2 = x1 + alpha * (1.0 + x1) - b * (1.0 + x0)
                        op[n - 1, i, j] = _log(v2, x2)
                        v0 = v1
                        v1 = v2
                        x0 = x1
                        x1 = x2
    return out_d, out_p
