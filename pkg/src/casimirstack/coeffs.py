"""Generalised interface coefficients, single-cavity kernels and the
interaction series at one spectral point.

These are the scalar reference routines; the vectorised evaluation used by
the energy integration lives in :mod:`casimirstack.kernel`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .constants import SpectralPoint

__all__ = [
    "Polarization",
    "CoefficientSet",
    "CavityKernels",
    "InteractionSeries",
    "transverse_wavevector",
    "rst",
    "kernels",
    "interaction_series",
    "cavity_series",
]


class Polarization(str, enum.Enum):
    TM = "TM"
    TE = "TE"


@dataclass(frozen=True)
class CoefficientSet:
    pol: Polarization
    K_i: float
    K_j: float
    R: float
    S: float
    T: float


@dataclass(frozen=True)
class CavityKernels:
    """E, F, G, H of one cavity plus the decay factors they are used with.

    ``cavity_decay`` is exp(-2 d K) across the cavity itself and ``decay``
    the factor across the slab that couples neighbouring cavities (they
    coincide for plasma sheets). ``G_open`` is S^{0,1}, the value G takes
    when the outermost interface is removed.
    """

    E: float
    F: float
    G: float
    H: float
    decay: float
    cavity_decay: float
    G_open: float
    E_excess: float  # E - 1, kept separately to avoid cancellation


@dataclass(frozen=True)
class InteractionSeries:
    terms: tuple        # I_1 ... I_N
    primed_terms: tuple  # I'_1 ... I'_N
    first_excess: float = 0.0  # I_1 - 1

    def __len__(self):
        return len(self.terms)


def _eps_value(eps, zeta):
    return float(eps(zeta)) if callable(eps) else float(eps)


def transverse_wavevector(eps_i, pt: SpectralPoint) -> float:
    eps = _eps_value(eps_i, pt.zeta)
    if eps < 1.0:
        raise ValueError("permittivity on the imaginary axis must be >= 1")
    return math.sqrt(pt.k_perp * pt.k_perp + eps * pt.zeta * pt.zeta)


def rst(pol, eps_i, eps_j, omega: float, pt: SpectralPoint, zero_mode_limit: bool = True) -> CoefficientSet:
    """R, S, T coefficients of the interface between regions i and j.

    A sheet with plasma parameter ``omega`` sits on the interface. The TM
    expressions contain ``omega / zeta**2``; at the zero Matsubara mode the
    exact zeta -> 0 limit (R, S, T) = (-1, 1, -1) is returned unless
    ``zero_mode_limit`` is false, in which case a ``ZeroDivisionError`` is
    raised.
    """
    pol = Polarization(pol)
    if omega < 0:
        raise ValueError("omega must be non-negative")
    ei = _eps_value(eps_i, pt.zeta)
    ej = _eps_value(eps_j, pt.zeta)
    Ki = transverse_wavevector(ei, pt)
    Kj = transverse_wavevector(ej, pt)

    if pol is Polarization.TE:
        den = Ki + Kj + 2.0 * omega
        return CoefficientSet(
            pol, Ki, Kj,
            (Ki - Kj + 2.0 * omega) / den,
            (Ki - Kj - 2.0 * omega) / den,
            (Ki + Kj - 2.0 * omega) / den,
        )

    if omega > 0 and pt.zeta == 0.0:
        if not zero_mode_limit:
            raise ZeroDivisionError("TM coefficients are singular at zeta = 0 for omega > 0")
        return CoefficientSet(pol, Ki, Kj, -1.0, 1.0, -1.0)

    a = 2.0 * omega / (pt.zeta * pt.zeta) * Ki * Kj if omega > 0 else 0.0
    base = ej * Ki
    cross = ei * Kj
    den = base + cross + a
    return CoefficientSet(
        pol, Ki, Kj,
        (base - cross - a) / den,
        (base - cross + a) / den,
        (base + cross - a) / den,
    )


def kernels(rst_01: CoefficientSet, rst_12: CoefficientSet, d: float, K: float, K_slab: float | None = None) -> CavityKernels:
    """Cavity kernels for the cell (0, 1, 2).

    ``K`` is the wavevector inside the cavity (region 1); ``K_slab`` the one
    in the coupling slab (region 2), defaulting to ``K``. ``d`` may be
    ``math.inf``.
    """
    if not d > 0:
        raise ValueError("gap must be positive")
    cav = math.exp(-2.0 * d * K)
    dec = cav if K_slab is None else math.exp(-2.0 * d * K_slab)
    R01, S01, T01 = rst_01.R, rst_01.S, rst_01.T
    R12, S12, T12 = rst_12.R, rst_12.S, rst_12.T
    excess = cav * S12 * R01
    return CavityKernels(
        E=excess + 1.0,
        F=cav * R01 * T12 + R12,
        G=cav * S12 * T01 + S01,
        H=S01 * R12 + cav * T01 * T12,
        decay=dec,
        cavity_decay=cav,
        G_open=S01,
        E_excess=excess,
    )


def interaction_series(k: CavityKernels, n_max: int) -> InteractionSeries:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    terms = [k.E]
    primed = [1.0]
    if n_max >= 2:
        head = k.F * k.decay
        step = k.H * k.decay
        chain = head
        for _ in range(2, n_max + 1):
            terms.append(chain * k.G)
            primed.append(chain * k.G_open)
            chain *= step
    return InteractionSeries(tuple(terms), tuple(primed), k.E_excess)


def cavity_series(pol, eps_inner, eps_outer, omega: float, d: float, pt: SpectralPoint, n_max: int) -> InteractionSeries:
    """Convenience chain rst -> kernels -> interaction_series for a uniform stack."""
    c01 = rst(pol, eps_outer, eps_inner, omega, pt)
    c12 = rst(pol, eps_inner, eps_outer, omega, pt)
    return interaction_series(kernels(c01, c12, d, c01.K_j, c01.K_i), n_max)
