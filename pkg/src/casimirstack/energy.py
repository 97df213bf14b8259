"""Finite-temperature Casimir energy per unit area of a planar stack.

    E/A = (k_B T / 2 pi) sum'_l int_0^inf k [log Delta_TM + log Delta_TE] dk

with the l = 0 term weighted by one half. The transverse momentum is mapped
to ``k = s u / (1 - u)`` on ``u in (0, 1)`` and integrated with composite
Gauss-Kronrod (7, 15) panels. The panel set is shared by every Matsubara
index and refined by bisection where the Kronrod-Gauss difference, summed
over l, is largest. One sweep delivers every requested cavity count because
the kernel returns log Delta for all 1..m cells at once.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import CODATA, Constants, StackKind, StackSpec
from .kernel import log_delta_grid

__all__ = [
    "QuadratureConfig",
    "EnergyResult",
    "RatioRow",
    "NonConvergence",
    "casimir_energy",
    "casimir_energies",
    "ratio_curve",
]

# Gauss-Kronrod 15-point abscissae (positive half) and weights; Gauss 7 uses
# the odd-indexed Kronrod nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_W15 = np.concatenate([_WK[:-1], _WK[::-1]])
_W7 = np.zeros(15)
_W7[1:7:2] = _WG[:3]
_W7[7] = _WG[3]
_W7[9:15:2] = _WG[2::-1]

_TAIL_NODES, _TAIL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy and budget controls for :func:`casimir_energy`.

    ``max_nodes`` bounds the number of k nodes (15 per panel); ``chunk`` is
    the number of Matsubara indices evaluated per kernel call and, with
    ``workers``, only affects speed: reductions are index ordered.
    """

    rel_tol: float = 1e-8
    k_scale: float | None = None
    max_nodes: int = 6000
    matsubara_rel_tail: float = 1e-10
    l_max_cap: int = 400_000
    initial_panels: int = 12
    chunk: int = 512
    workers: int = 1
    constants: Constants = field(default=CODATA, repr=False)

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.k_scale is not None and not self.k_scale > 0:
            raise ValueError("k_scale must be positive")
        if not self.matsubara_rel_tail > 0:
            raise ValueError("matsubara_rel_tail must be positive")
        for name in ("max_nodes", "l_max_cap", "initial_panels", "chunk", "workers"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"{name} must be a positive integer")


@dataclass(frozen=True)
class EnergyResult:
    """Energy per area (J/m^2) with its polarization split and diagnostics."""

    n_cavities: int
    e_per_area: float
    tm_part: float
    te_part: float
    l_used: int
    k_nodes_used: int
    est_error: float
    tail: float = 0.0


@dataclass(frozen=True)
class RatioRow:
    """E[N] / (N E[1]) for TM + TE and for TM alone."""

    n: int
    ratio: float
    ratio_tm: float
    energy: EnergyResult


class NonConvergence(RuntimeError):
    """Budget exhausted; ``partial`` holds the best results obtained."""

    def __init__(self, message: str, partial: dict, diagnostics: dict):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = diagnostics


class _Targets:
    """Maps requested cavity counts onto kernel outputs."""

    def __init__(self, spec: StackSpec, n_list: Sequence[int]):
        ns = sorted({int(n) for n in n_list})
        if not ns or ns[0] < 1:
            raise ValueError("cavity counts must be positive")
        self.ns = ns
        self.plasma = spec.kind is StackKind.PLASMA_SHEET
        self.slots = []
        for n in ns:
            if not self.plasma:
                self.slots.append((False, n - 1))
            elif n % 2:
                self.slots.append((False, (n + 1) // 2 - 1))
            else:
                self.slots.append((True, n // 2 - 1))
        self.m = max(i for _, i in self.slots) + 1
        self.primed = any(p for p, _ in self.slots)


class _Integrand:
    def __init__(self, spec: StackSpec, targets: _Targets, s: float, zeta_1: float):
        self.spec = spec
        self.targets = targets
        self.s = s
        self.zeta_1 = zeta_1

    def _eps(self, zetas):
        spec = self.spec
        if spec.kind is StackKind.PLASMA_SHEET:
            one = np.ones_like(zetas)
            return one, one
        e_in = np.array([float(spec.eps_inner(z)) for z in zetas])
        e_out = np.array([float(spec.eps_outer(z)) for z in zetas])
        return e_in, e_out

    def panels(self, lam, lo, hi):
        """Kronrod and Gauss panel integrals at Matsubara indices ``lam``.

        Returns two arrays of shape (targets, 2, len(lam), n_panels); the
        second axis is (TM, TE).
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        half = 0.5 * (hi - lo)
        u = (0.5 * (hi + lo))[:, None] + half[:, None] * _NODES[None, :]
        k = self.s * u / (1.0 - u)
        jac = self.s / (1.0 - u) ** 2
        kw = (k * jac).ravel()
        zetas = np.asarray(lam, dtype=float) * self.zeta_1
        e_in, e_out = self._eps(zetas)
        P = lo.size
        tg = self.targets
        kron = np.empty((len(tg.ns), 2, zetas.size, P))
        gauss = np.empty_like(kron)
        for ip, tm in enumerate((True, False)):
            ld, lp = log_delta_grid(zetas, e_in, e_out, k.ravel(), self.spec.gap,
                                    self.spec.omega, tm, tg.m, tg.primed)
            for it, (primed, idx) in enumerate(tg.slots):
                f = ((lp if primed else ld)[idx] * kw).reshape(zetas.size, P, 15)
                kron[it, ip] = (f @ _W15) * half
                gauss[it, ip] = (f @ _W7) * half
        return kron, gauss


def _matsubara_weights(lam):
    return np.where(np.asarray(lam) == 0, 0.5, 1.0)


def _sweep(fn, starts, workers):
    if workers == 1:
        return [fn(a) for a in starts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, starts))


def casimir_energies(spec: StackSpec, n_list: Sequence[int], cfg: QuadratureConfig | None = None) -> dict:
    """Energies of the first ``n`` cavities of ``spec`` for every ``n`` in ``n_list``.

    All counts share one panel set and one Matsubara sweep. Returns
    ``{n: EnergyResult}``.

    Raises
    ------
    NonConvergence
        If ``l_max_cap`` or ``max_nodes`` is reached before the tolerances
        are met; the exception carries the partial results.
    """
    cfg = cfg or QuadratureConfig()
    tg = _Targets(spec, n_list)
    const = cfg.constants
    d, omega = spec.gap, spec.omega
    s = cfg.k_scale or max(1.0 / d, math.sqrt(omega / d))
    zeta_1 = 2.0 * math.pi * const.k_B * spec.temperature / const.hbar_c
    prefactor = const.k_B * spec.temperature / (2.0 * math.pi)
    f = _Integrand(spec, tg, s, zeta_1)
    n_t = len(tg.ns)

    edges = np.linspace(0.0, 1.0, cfg.initial_panels + 1)
    lo, hi = edges[:-1].copy(), edges[1:].copy()

    # sweep l upward with the initial panels until the terms die out
    chunk = cfg.chunk
    term_chunks, kron_sum, err_sum = [], np.zeros((n_t, 2, lo.size)), np.zeros((n_t, lo.size))
    total = np.zeros(n_t)
    small_run = np.zeros(n_t, dtype=int)
    prev = np.full(n_t, np.nan)
    l_used = None
    start = 0
    batch = max(1, cfg.workers)
    while l_used is None:
        starts = [start + i * chunk for i in range(batch)]
        if starts[0] > cfg.l_max_cap:
            break
        results = _sweep(lambda a: f.panels(np.arange(a, a + chunk), lo, hi), starts, cfg.workers)
        for a, (kron, gauss) in zip(starts, results):
            w = _matsubara_weights(np.arange(a, a + chunk))
            terms = kron.sum(axis=(1, 3)) * w  # (targets, chunk)
            for j in range(chunk):
                total += terms[:, j]
                cur = terms[:, j]
                limit = cfg.matsubara_rel_tail * np.abs(total)
                small_run = np.where(np.abs(cur) <= limit, small_run + 1, 0)
                # geometric estimate of everything beyond this index
                with np.errstate(divide="ignore", invalid="ignore"):
                    q = np.abs(cur / prev)
                    rest = np.where(cur == 0, 0.0, np.where(q < 1, np.abs(cur) * q / (1 - q), np.inf))
                prev = cur
                if np.all(small_run >= 3) and np.all(rest <= 0.5 * limit):
                    l_used = a + j
                    break
            stop = chunk if l_used is None else l_used - a + 1
            kron_sum += np.einsum("tpln,l->tpn", kron[:, :, :stop], w[:stop])
            err_sum += np.einsum("tpln,l->tn", np.abs(kron - gauss)[:, :, :stop], w[:stop])
            if l_used is not None:
                break
        start += batch * chunk
    if l_used is not None and l_used > cfg.l_max_cap:
        l_used = None
    if l_used is None:
        energies = {n: float(prefactor * kron_sum[i].sum()) for i, n in enumerate(tg.ns)}
        raise NonConvergence(f"Matsubara sum not converged below l_max_cap={cfg.l_max_cap}",
                             energies, {"l_max_cap": cfg.l_max_cap})

    lam_all = np.arange(0, l_used + 1)
    w_all = _matsubara_weights(lam_all)

    def panel_stats(plo, phi):
        def one(a):
            lam = lam_all[a:a + chunk]
            kron, gauss = f.panels(lam, plo, phi)
            w = w_all[a:a + chunk]
            return (np.einsum("tpln,l->tpn", kron, w),
                    np.einsum("tpln,l->tn", np.abs(kron - gauss), w))
        parts = _sweep(one, list(range(0, l_used + 1, chunk)), cfg.workers)
        ks = np.zeros((n_t, 2, plo.size))
        es = np.zeros((n_t, plo.size))
        for kpart, epart in parts:
            ks += kpart
            es += epart
        return ks, es

    # bisect the worst panels until the summed error estimate is small enough
    converged = False
    while True:
        energy = kron_sum.sum(axis=(1, 2))
        scale = np.maximum(np.abs(energy), np.finfo(float).tiny)
        rel = err_sum.sum(axis=1) / scale
        if np.all(rel < 0.5 * cfg.rel_tol):
            converged = True
            break
        if 15 * (lo.size + 1) > cfg.max_nodes:
            break
        score = (err_sum / scale[:, None]).max(axis=0)
        order = np.argsort(-score, kind="stable")
        n_split = max(1, min(order.size // 4, (cfg.max_nodes // 15 - lo.size)))
        pick = np.sort(order[:n_split])
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        ks, es = panel_stats(new_lo, new_hi)
        keep = np.ones(lo.size, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        kron_sum = np.concatenate([kron_sum[:, :, keep], ks], axis=2)
        err_sum = np.concatenate([err_sum[:, keep], es], axis=1)
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        kron_sum, err_sum = kron_sum[:, :, order], err_sum[:, order]

    # tail sum_{l > L} f(l) ~ int_{L+1/2}^inf f(lambda) dlambda
    sigma = 1.0 / (2.0 * zeta_1 * d)
    t = 0.5 * (_TAIL_NODES + 1.0)
    lam_tail = l_used + 0.5 + sigma * t / (1.0 - t)
    jac_tail = 0.5 * _TAIL_WEIGHTS * sigma / (1.0 - t) ** 2
    kron_t, _ = f.panels(lam_tail, lo, hi)
    tail = np.einsum("tpln,l->tp", kron_t, jac_tail)
    last_kron, _ = f.panels(np.array([l_used]), lo, hi)
    last = np.abs(last_kron.sum(axis=(1, 3))[:, 0])

    out = {}
    for i, n in enumerate(tg.ns):
        tm = float(prefactor * (kron_sum[i, 0].sum() + tail[i, 0]))
        te = float(prefactor * (kron_sum[i, 1].sum() + tail[i, 1]))
        err = float(prefactor * (err_sum[i].sum() + last[i]))
        out[n] = EnergyResult(n, tm + te, tm, te, int(l_used), int(15 * lo.size), float(abs(err)),
                              float(prefactor * tail[i].sum()))
    if not converged:
        raise NonConvergence(f"k quadrature not converged within max_nodes={cfg.max_nodes}",
                             out, {"panels": int(lo.size), "l_used": int(l_used)})
    return out


def casimir_energy(spec: StackSpec, cfg: QuadratureConfig | None = None) -> EnergyResult:
    """Casimir energy per unit area of ``spec`` (J/m^2)."""
    return casimir_energies(spec, [spec.n_cavities], cfg)[spec.n_cavities]


def ratio_curve(spec_base: StackSpec, n_list: Sequence[int], cfg: QuadratureConfig | None = None) -> list:
    """``E[N] / (N E[1])`` for every ``N`` in ``n_list`` (input order kept)."""
    if not n_list:
        raise ValueError("n_list must not be empty")
    energies = casimir_energies(spec_base, list(n_list) + [1], cfg)
    e1 = energies[1]
    rows = []
    for n in n_list:
        e = energies[n]
        rows.append(RatioRow(int(n), e.e_per_area / (n * e1.e_per_area),
                             e.tm_part / (n * e1.tm_part), e))
    return rows

