"""Physical constants, unit conventions and the parameter records shared by
every other module.

All arithmetic is SI. Matsubara frequencies are carried as inverse lengths
(``zeta = 2 pi l k_B T / (hbar c)``) so that ``K = sqrt(k^2 + eps zeta^2)``
and the plasma parameter ``omega`` share the unit m^-1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from scipy import constants as _codata

__all__ = [
    "Constants",
    "CODATA",
    "ROUNDED",
    "StackKind",
    "StackSpec",
    "SpectralPoint",
    "Permittivity",
    "vacuum",
    "constant_permittivity",
    "omega_from_carriers",
    "matsubara_frequency",
]


@dataclass(frozen=True)
class Constants:
    """A self-consistent set of SI constants.

    ``eps_0`` is derived from ``mu_0`` and ``c`` so that
    ``mu_0 * eps_0 * c**2 == 1`` holds to rounding.
    """

    hbar: float
    c: float
    k_B: float
    mu_0: float
    e_charge: float
    m_electron: float
    eps_0: float = field(init=False)

    def __post_init__(self):
        for name in ("hbar", "c", "k_B", "mu_0", "e_charge", "m_electron"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "eps_0", 1.0 / (self.mu_0 * self.c**2))

    @property
    def hbar_c(self) -> float:
        return self.hbar * self.c


CODATA = Constants(
    hbar=_codata.hbar,
    c=_codata.c,
    k_B=_codata.k,
    mu_0=_codata.mu_0,
    e_charge=_codata.e,
    m_electron=_codata.m_e,
)

# Textbook-rounded charge, mass and permeability. The published YBCO
# carrier numbers (Omega = 300.505 m^-1 from n_2D = 1.702e16 m^-2) are only
# reproduced with these.
ROUNDED = Constants(
    hbar=_codata.hbar,
    c=_codata.c,
    k_B=_codata.k,
    mu_0=4e-7 * math.pi,
    e_charge=1.6e-19,
    m_electron=9.109e-31,
)


Permittivity = Callable[[float], float]


def vacuum(zeta: float) -> float:
    return 1.0


class constant_permittivity:
    """Frequency-independent permittivity ``eps(i zeta) = value``."""

    def __init__(self, value: float):
        if not value >= 1.0:
            raise ValueError("permittivity on the imaginary axis must be >= 1")
        self.value = float(value)

    def __call__(self, zeta: float) -> float:
        return self.value

    def __repr__(self):
        return f"constant_permittivity({self.value!r})"

    def __eq__(self, other):
        return isinstance(other, constant_permittivity) and other.value == self.value

    def __hash__(self):
        return hash(("constant_permittivity", self.value))


class StackKind(str, enum.Enum):
    DIELECTRIC = "dielectric"
    PLASMA_SHEET = "plasma-sheet"


@dataclass(frozen=True)
class StackSpec:
    """Geometry and material description of ``n_cavities`` equal cavities.

    For ``PLASMA_SHEET`` stacks every region is vacuum and ``n_cavities``
    counts the gaps between ``n_cavities + 1`` sheets. For ``DIELECTRIC``
    stacks ``eps_inner`` fills the cavities (odd regions) and ``eps_outer``
    the slabs and the two half-spaces (even regions); slabs have the same
    thickness ``gap`` as the cavities.
    """

    kind: StackKind
    n_cavities: int
    gap: float
    temperature: float
    omega: float = 0.0
    eps_inner: Permittivity = vacuum
    eps_outer: Permittivity = vacuum

    def __post_init__(self):
        object.__setattr__(self, "kind", StackKind(self.kind))
        if int(self.n_cavities) != self.n_cavities or self.n_cavities < 1:
            raise ValueError("n_cavities must be a positive integer")
        object.__setattr__(self, "n_cavities", int(self.n_cavities))
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if not self.omega >= 0:
            raise ValueError("omega must be non-negative")
        if self.kind is StackKind.PLASMA_SHEET:
            if self.eps_inner is not vacuum or self.eps_outer is not vacuum:
                raise ValueError("plasma-sheet stacks are vacuum everywhere")

    @classmethod
    def plasma_sheets(cls, n_cavities: int, gap: float, omega: float, temperature: float):
        return cls(StackKind.PLASMA_SHEET, n_cavities, gap, temperature, omega)

    def with_(self, **changes) -> "StackSpec":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class SpectralPoint:
    """One (Matsubara index, imaginary frequency, transverse momentum) sample."""

    l: int
    zeta: float
    k_perp: float

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("Matsubara index must be >= 0")
        if (self.zeta == 0.0) != (self.l == 0):
            raise ValueError("zeta vanishes exactly for the zero mode")
        if not self.k_perp >= 0:
            raise ValueError("k_perp must be non-negative")

    @classmethod
    def at(cls, l: int, temperature: float, k_perp: float, constants: Constants = CODATA):
        return cls(l, matsubara_frequency(l, temperature, constants), k_perp)


def omega_from_carriers(
    n_2d: float,
    q_star: float,
    m_star: float,
    convention: str = "full",
    constants: Constants = CODATA,
) -> float:
    """Plasma parameter of a charged sheet in m^-1.

    ``convention="full"`` gives ``mu_0 n q^2 / m``; ``"half"`` gives
    ``mu_0 n q^2 / (2 m)``, the form used for the published YBCO numbers.
    """
    if n_2d < 0 or not q_star > 0 or not m_star > 0:
        raise ValueError("carrier density must be >= 0, charge and mass > 0")
    if convention == "full":
        factor = 1.0
    elif convention == "half":
        factor = 0.5
    else:
        raise ValueError(f"unknown Omega convention {convention!r}")
    return factor * constants.mu_0 * n_2d * q_star**2 / m_star


def matsubara_frequency(l: int, temperature: float, constants: Constants = CODATA) -> float:
    if l < 0:
        raise ValueError("Matsubara index must be >= 0")
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    return 2.0 * math.pi * l * constants.k_B * temperature / constants.hbar_c
