"""Casimir energy of a layered cuprate across the superconducting transition.

Each CuO2 slab is a plasma sheet. Below T_c its parameter follows the London
penetration depth, ``Omega = delta / (2 lambda(T)^2)`` with
``lambda(T) = lambda(0) / sqrt(1 - (T/T_c)^p)`` (p = 4/3 for d-wave pairing).
Above T_c it comes from the normal carrier density, scaled linearly in T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from importlib import resources

from .constants import CODATA, ROUNDED, Constants, StackSpec, omega_from_carriers
from .fitting import CLOSED_FORM_PREFACTOR

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "SuperconductorModel",
    "TransitionEnergies",
    "D_WAVE_EXPONENT",
    "load_presets",
    "preset",
    "penetration_depth",
    "omega_superconducting",
    "omega_normal",
    "closed_form_sheet_energy",
    "transition_energies",
]

D_WAVE_EXPONENT = 4.0 / 3.0
_CONSTANT_SETS = {"codata": CODATA, "rounded": ROUNDED}


@dataclass(frozen=True)
class SuperconductorModel:
    """Material record; lengths in m, temperatures in K.

    ``t_below``/``t_above`` are the default temperatures either side of the
    transition; ``constants`` names the set used for the normal-state Omega.
    """

    t_c: float
    lambda_0: float
    d: float
    delta: float
    n_3d_ref: float
    t_ref: float
    m_star: float = CODATA.m_electron
    q_star: float = CODATA.e_charge
    pairing_exponent: float = D_WAVE_EXPONENT
    constants: str = "codata"
    t_below: float | None = None
    t_above: float | None = None
    name: str = ""

    def __post_init__(self):
        for attr in ("t_c", "lambda_0", "d", "delta", "t_ref", "m_star", "q_star", "pairing_exponent"):
            if not getattr(self, attr) > 0:
                raise ValueError(f"{attr} must be positive")
        if self.n_3d_ref < 0:
            raise ValueError("n_3d_ref must be >= 0")
        if self.constants not in _CONSTANT_SETS:
            raise ValueError(f"constants must be one of {sorted(_CONSTANT_SETS)}")

    @property
    def constant_set(self) -> Constants:
        return _CONSTANT_SETS[self.constants]

    def with_(self, **changes) -> "SuperconductorModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class TransitionEnergies:
    """Energies per area (J/m^2) either side of T_c; ``eta = dE / |E_n|``."""

    t_below: float
    t_above: float
    omega_sc: float
    omega_n: float
    e_sc: float
    e_n: float
    delta_e: float
    eta: float
    mode: str


def load_presets(path=None) -> dict:
    """Presets from a TOML file (the bundled one by default).

    Unknown keys are rejected so that typos cannot silently fall back to
    defaults.
    """
    if path is None:
        text = resources.files("casimirstack").joinpath("data/presets.toml").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    raw = tomllib.loads(text)
    allowed = {f.name for f in fields(SuperconductorModel)} - {"name"}
    out = {}
    for name, table in raw.items():
        unknown = set(table) - allowed
        if unknown:
            raise ValueError(f"preset {name!r}: unknown keys {sorted(unknown)}")
        out[name] = SuperconductorModel(name=name, **table)
    return out


def preset(name: str) -> SuperconductorModel:
    presets = load_presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(presets)}")
    return presets[name]


def _suppression(model, T):
    if not 0 <= T < model.t_c:
        raise ValueError(f"T = {T} K is outside the superconducting range [0, {model.t_c})")
    return 1.0 - (T / model.t_c) ** model.pairing_exponent


def penetration_depth(model: SuperconductorModel, T: float) -> float:
    """In-plane penetration depth lambda(T) in m (T < T_c)."""
    return model.lambda_0 / math.sqrt(_suppression(model, T))


def omega_superconducting(model: SuperconductorModel, T: float) -> float:
    """``delta / (2 lambda(T)^2)`` in m^-1 (T < T_c)."""
    return model.delta / (2.0 * model.lambda_0**2) * _suppression(model, T)


def omega_normal(model: SuperconductorModel, T: float) -> float:
    """Normal-state plasma parameter from ``n_2D = delta n_3D T / T_ref`` (T > T_c),
    using the half convention ``mu_0 n q^2 / (2 m)``."""
    if not T > model.t_c:
        raise ValueError(f"T = {T} K is not above T_c = {model.t_c} K")
    n_2d = model.delta * model.n_3d_ref * (T / model.t_ref)
    return omega_from_carriers(n_2d, model.q_star, model.m_star, "half", model.constant_set)


def closed_form_sheet_energy(omega: float, d: float, prefactor: float = CLOSED_FORM_PREFACTOR) -> float:
    """One-cavity closed form ``-prefactor sqrt(Omega / d^5)`` in J/m^2."""
    return -prefactor * math.sqrt(omega / d**5)


def transition_energies(model: SuperconductorModel, T_below: float | None = None,
                        T_above: float | None = None, mode: str = "closed", cfg=None) -> TransitionEnergies:
    """Energies of one cavity below and above T_c and their difference.

    Parameters
    ----------
    mode : {"closed", "exact"}
        ``closed`` uses the fitted closed form; ``exact`` runs the full
        Matsubara/momentum integration at the same (d, Omega, T).
    """
    T_below = model.t_below if T_below is None else T_below
    T_above = model.t_above if T_above is None else T_above
    if T_below is None or T_above is None:
        raise ValueError("temperatures below and above T_c are required")
    if not T_below < model.t_c < T_above:
        raise ValueError("need T_below < T_c < T_above")
    om_sc = omega_superconducting(model, T_below)
    om_n = omega_normal(model, T_above)
    if mode == "closed":
        e_sc = closed_form_sheet_energy(om_sc, model.d)
        e_n = closed_form_sheet_energy(om_n, model.d)
    elif mode == "exact":
        from .energy import casimir_energy

        e_sc = casimir_energy(StackSpec.plasma_sheets(1, model.d, om_sc, T_below), cfg).e_per_area
        e_n = casimir_energy(StackSpec.plasma_sheets(1, model.d, om_n, T_above), cfg).e_per_area
    else:
        raise ValueError(f"unknown mode {mode!r}")
    delta_e = e_n - e_sc
    eta = delta_e / abs(e_n) if e_n != 0 else math.nan
    return TransitionEnergies(T_below, T_above, om_sc, om_n, e_sc, e_n, delta_e, eta, mode)
