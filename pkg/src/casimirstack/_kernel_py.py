"""NumPy implementation of the log-Delta grid kernel.

Same contract as the compiled ``_kernel.log_delta_grid``; used when the
extension is not built or ``CASIMIRSTACK_PURE_PYTHON`` is set.

For a uniform stack the geometric interaction terms collapse the
convolution over compositions into the two-term recurrence
``Delta_n = a Delta_{n-1} - b Delta_{n-2}``. Every ingredient is formed
from sums of non-negative pieces (1 - r^2 = 4P(Q + g)/D^2 and so on), which
keeps the TM zero mode, where Delta_n ~ (2 k d)^(2n-1), free of
cancellation. The excess Delta_n - 1 is propagated alongside so that
log Delta stays accurate when Delta is close to 1.
"""
import numpy as np


def interface_terms(tm, zeta, eps_in, eps_out, K_in, K_out, omega):
    """r, s, t of the outer->inner interface plus 1-r^2, 1-s^2, 1-t^2, t-rs."""
    if tm:
        P = eps_in * K_out
        Q = eps_out * K_in
        if omega > 0:
            zero = zeta == 0.0
            safe = np.where(zero, 1.0, zeta)
            g = np.where(zero, 0.0, 2.0 * omega / (safe * safe) * K_in * K_out)
        else:
            zero = None
            g = 0.0
    else:
        P = K_out
        Q = K_in
        g = 2.0 * omega
        zero = None
    D = P + Q + g
    D2 = D * D
    # TM: R carries -g and S +g; TE the other way round
    r_minus = (P - Q - g) / D
    r_plus = (P - Q + g) / D
    t = (P + Q - g) / D
    u_minus = 4.0 * P * (Q + g) / D2  # 1 - r_minus**2
    u_plus = 4.0 * Q * (P + g) / D2  # 1 - r_plus**2
    w = 4.0 * g * (P + Q) / D2  # 1 - t**2
    if tm:
        r, s, u, v = r_minus, r_plus, u_minus, u_plus
    else:
        r, s, u, v = r_plus, r_minus, u_plus, u_minus
    tr = 4.0 * P * Q / D2
    if zero is not None and zero.any():
        r = np.where(zero, -1.0, r)
        s = np.where(zero, 1.0, s)
        t = np.where(zero, -1.0, t)
        u = np.where(zero, 0.0, u)
        v = np.where(zero, 0.0, v)
        w = np.where(zero, 0.0, w)
        tr = np.where(zero, 0.0, tr)
    return r, s, t, u, v, w, tr


def _log(value, excess):
    near = np.abs(excess) <= 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(near, np.log1p(np.where(near, excess, 0.0)), np.log(np.where(near, 1.0, value)))


def log_delta_grid(zeta, eps_in, eps_out, k, d, omega, tm, m, primed):
    """log Delta on the (zeta, k) grid for 1..m cells.

    Returns ``(log_d, log_p)`` with shape ``(m, L, M)``: ``log_d[n-1]`` is
    log Delta_n of n two-interface cells and ``log_p[n-1]`` (only when
    ``primed``) the generating function with the last interface removed
    from n + 1 cells. ``log_p`` is ``None`` otherwise.
    """
    zeta = np.asarray(zeta, dtype=float)[:, None]
    eps_in = np.asarray(eps_in, dtype=float)[:, None]
    eps_out = np.asarray(eps_out, dtype=float)[:, None]
    k = np.asarray(k, dtype=float)[None, :]
    z2 = zeta * zeta
    k2 = k * k
    K_in = np.sqrt(k2 + eps_in * z2)
    K_out = np.sqrt(k2 + eps_out * z2)

    r, s, t, u, v, w, tr = interface_terms(tm, zeta, eps_in, eps_out, K_in, K_out, omega)
    cav = np.exp(-2.0 * d * K_in)
    dec = np.exp(-2.0 * d * K_out)
    m_in = -np.expm1(-2.0 * d * K_in)
    m_out = -np.expm1(-2.0 * d * K_out)

    e1 = -cav * r * r
    E = m_in + cav * u
    Hd = dec * (cav * t * t - s * s)
    alpha = e1 + Hd
    a = m_in * m_out + cav * u + dec * v - dec * cav * w
    b = dec * cav * tr * tr

    shape = (m,) + np.broadcast_shapes(zeta.shape, k.shape)
    value = [np.ones(shape[1:]), E]
    excess = [np.zeros(shape[1:]), e1]
    for n in range(2, m + 1):
        value.append(a * value[n - 1] - b * value[n - 2])
        excess.append(excess[n - 1] + alpha * (1.0 + excess[n - 1]) - b * (1.0 + excess[n - 2]))
    log_d = np.empty(shape)
    for n in range(1, m + 1):
        log_d[n - 1] = _log(value[n], excess[n])
    if not primed:
        return log_d, None

    # the primed series shares the recurrence; only the seeds differ
    p1 = a - dec * cav * t * tr
    pvalue = [np.ones(shape[1:]), p1]
    pexcess = [np.zeros(shape[1:]), alpha - dec * cav * t * tr]
    log_p = np.empty(shape)
    log_p[0] = _log(p1, pexcess[1])
    for n in range(2, m + 1):
        pvalue.append(a * pvalue[n - 1] - b * pvalue[n - 2])
        pexcess.append(pexcess[n - 1] + alpha * (1.0 + pexcess[n - 1]) - b * (1.0 + pexcess[n - 2]))
        log_p[n - 1] = _log(pvalue[n], pexcess[n])
    return log_d, log_p
