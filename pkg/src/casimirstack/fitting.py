"""Least-squares fits of the cavity-count asymptote and the (d, Omega)
power law, plus the closed-form energy they imply.

Each fit has a second, independent estimator so that results can be
cross-checked: a profiled grid search for the asymptote and a direct
nonlinear fit for the power law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .constants import CODATA, Constants

__all__ = [
    "FitResult",
    "ASYMPTOTE",
    "CLOSED_FORM_PREFACTOR",
    "fit_ratio_asymptote",
    "fit_ratio_asymptote_grid",
    "fit_power_law",
    "fit_power_law_direct",
    "closed_form_prefactor",
    "closed_form_energy",
    "power_law_samples",
    "format_report",
]

ASYMPTOTE = 1.034
CLOSED_FORM_PREFACTOR = 1.63e-28  # J m, closed-form energy prefactor


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with linearized standard errors.

    ``converged`` is only set when the gradient of the objective satisfies
    ``|J^T r| < 1e-10 (1 + rss)``.
    """

    params: dict
    rss: float
    converged: bool
    iterations: int
    stderr: dict = field(default_factory=dict)
    gradient_norm: float = math.nan
    method: str = ""

    def __getitem__(self, name):
        return self.params[name]


def _stderr(names, jac, rss, n):
    dof = n - len(names)
    if dof <= 0:
        return {k: math.nan for k in names}
    try:
        cov = np.linalg.inv(jac.T @ jac) * (rss / dof)
    except np.linalg.LinAlgError:
        return {k: math.nan for k in names}
    return {k: float(math.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(names)}


def _grad_ok(grad_norm, rss):
    return grad_norm < 1e-10 * (1.0 + abs(rss))


# --- ratio asymptote a - b / N^p -----------------------------------------

def _ratio_data(data):
    arr = np.asarray([(float(n), float(r)) for n, r in data])
    if arr.shape[0] < 4:
        raise ValueError("need at least 4 (N, ratio) points")
    if np.any(arr[:, 0] < 1):
        raise ValueError("N must be >= 1")
    return arr[:, 0], arr[:, 1]


def _asym_residual(x, n, y):
    a, b, p = x
    return a - b * n ** (-p) - y


def _asym_jac(x, n, y):
    a, b, p = x
    q = n ** (-p)
    return np.column_stack([np.ones_like(n), -q, b * q * np.log(n)])


def fit_ratio_asymptote(data: Iterable, x0: Sequence[float] | None = None, max_nfev: int = 2000) -> FitResult:
    """Fit ``ratio(N) = a - b / N**p`` by Levenberg-Marquardt.

    Parameters
    ----------
    data : iterable of (N, ratio)
        At least four points.
    x0 : (a, b, p), optional
        Starting point; defaults to a crude estimate from the data.
    """
    n, y = _ratio_data(data)
    if x0 is None:
        x0 = (y[np.argmax(n)], max(y.max() - y.min(), 1e-6), 1.0)
    sol = optimize.least_squares(_asym_residual, x0, jac=_asym_jac, args=(n, y), method="lm",
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    r = sol.fun
    rss = float(r @ r)
    jac = _asym_jac(sol.x, n, y)
    grad = float(np.linalg.norm(jac.T @ r))
    names = ("a", "b", "p")
    return FitResult(dict(zip(names, map(float, sol.x))), rss, bool(sol.status > 0) and _grad_ok(grad, rss),
                     int(sol.nfev), _stderr(names, jac, rss, n.size), grad, "levenberg-marquardt")


def _profile(p, n, y):
    """Best (a, b) and rss for fixed p: linear least squares."""
    A = np.column_stack([np.ones_like(n), -n ** (-p)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = A @ coef - y
    return coef, float(r @ r)


def fit_ratio_asymptote_grid(data: Iterable, p_range=(0.05, 5.0), n_grid: int = 2000) -> FitResult:
    """Independent estimator: dense grid over p with (a, b) solved linearly,
    refined by golden-section search around the best grid cell."""
    n, y = _ratio_data(data)
    grid = np.linspace(p_range[0], p_range[1], n_grid)
    rss = np.array([_profile(p, n, y)[1] for p in grid])
    i = int(np.argmin(rss))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    res = optimize.minimize_scalar(lambda p: _profile(p, n, y)[1], bracket=(lo, grid[i], hi)
                                   if 0 < i < n_grid - 1 else None, bounds=None, method="golden",
                                   tol=1e-12)
    p = float(res.x)
    (a, b), best = _profile(p, n, y)
    jac = _asym_jac((a, b, p), n, y)
    r = _asym_residual((a, b, p), n, y)
    grad = float(np.linalg.norm(jac.T @ r))
    names = ("a", "b", "p")
    return FitResult({"a": float(a), "b": float(b), "p": p}, best, _grad_ok(grad, best),
                     int(res.nit) + n_grid, _stderr(names, jac, best, n.size), grad, "grid+golden")


# --- power law E/A = -(1.034 N) K hbar c Omega^alpha / d^beta ------------

def _power_data(samples):
    arr = np.asarray([tuple(map(float, s)) for s in samples])
    if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (N, d, omega, E/A) samples")
    N, d, om, e = arr.T
    if np.any(d <= 0) or np.any(om <= 0) or np.any(N < 1):
        raise ValueError("d and omega must be positive and N >= 1")
    if np.any(e >= 0):
        raise ValueError("energies must be negative")
    if d.max() / d.min() < 10.0 * (1 - 1e-9) or om.max() / om.min() < 10.0 * (1 - 1e-9):
        raise ValueError("degenerate design: samples must span at least a decade in d and omega")
    return N, d, om, e


def _design(d, om):
    return np.column_stack([np.ones_like(d), np.log(om), -np.log(d)])


def fit_power_law(samples: Iterable, constants: Constants = CODATA) -> FitResult:
    """Fit ``log|E| = log(1.034 N K hbar c) + alpha log Omega - beta log d``
    by linear least squares; returns ``{K, alpha, beta}``."""
    N, d, om, e = _power_data(samples)
    y = np.log(-e / (ASYMPTOTE * N * constants.hbar_c))
    A = _design(d, om)
    if np.linalg.matrix_rank(A) < 3:
        raise ValueError("degenerate design: log d and log omega are collinear")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = A @ coef - y
    rss = float(r @ r)
    se = _stderr(("logK", "alpha", "beta"), A, rss, y.size)
    K = math.exp(coef[0])
    params = {"K": K, "alpha": float(coef[1]), "beta": float(coef[2])}
    stderr = {"K": K * se["logK"], "alpha": se["alpha"], "beta": se["beta"]}
    grad = float(np.linalg.norm(A.T @ r))
    return FitResult(params, rss, _grad_ok(grad, rss), 1, stderr, grad, "log-linear")


def fit_power_law_direct(samples: Iterable, x0: Sequence[float] | None = None,
                         constants: Constants = CODATA) -> FitResult:
    """Direct nonlinear fit of the same model on relative residuals
    ``model / E - 1``; an estimator independent of the log transform."""
    N, d, om, e = _power_data(samples)
    log_base = np.log(ASYMPTOTE * N * constants.hbar_c / -e)
    log_om, log_d = np.log(om), np.log(d)

    # log K keeps the three columns of the Jacobian on comparable scales;
    # the log form avoids spurious under/overflow at wild trial points
    def model(x):
        logK, alpha, beta = x
        with np.errstate(over="ignore"):
            return np.exp(log_base + logK + alpha * log_om - beta * log_d)

    def resid(x):
        return model(x) - 1.0

    def jac(x):
        m = model(x)
        return np.column_stack([m, m * log_om, -m * log_d])

    if x0 is None:
        x0 = (1e-2, 0.5, 2.5)
    start = (math.log(x0[0]), x0[1], x0[2])
    sol = optimize.least_squares(resid, start, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                 max_nfev=2000)
    r = sol.fun
    rss = float(r @ r)
    J = jac(sol.x)
    grad = float(np.linalg.norm(J.T @ r))
    se = _stderr(("logK", "alpha", "beta"), J, rss, r.size)
    K = math.exp(sol.x[0])
    params = {"K": K, "alpha": float(sol.x[1]), "beta": float(sol.x[2])}
    stderr = {"K": K * se["logK"], "alpha": se["alpha"], "beta": se["beta"]}
    return FitResult(params, rss, bool(sol.status > 0) and _grad_ok(grad, rss), int(sol.nfev), stderr,
                     grad, "levenberg-marquardt")


def closed_form_prefactor(K: float, constants: Constants = CODATA) -> float:
    """``1.034 K hbar c`` in J m: the closed-form prefactor recomputed from a fitted K."""
    return ASYMPTOTE * K * constants.hbar_c


def closed_form_energy(N, d, omega, prefactor: float = CLOSED_FORM_PREFACTOR):
    """Closed-form energy per area ``-prefactor N sqrt(Omega) / d^(5/2)`` (J/m^2).

    Vectorizes over numpy arrays.
    """
    d = np.asarray(d, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(d <= 0) or np.any(omega < 0):
        raise ValueError("need d > 0 and omega >= 0")
    out = -prefactor * np.asarray(N, dtype=float) * np.sqrt(omega) / d**2.5
    return float(out) if out.ndim == 0 else out


def power_law_samples(ds, omegas, ns, temperature: float = 94.0, cfg=None) -> list:
    """Exact plasma-sheet energies on the full (d, Omega) grid for every N.

    Returns ``[(N, d, Omega, E, E_tm), ...]`` in grid order.
    """
    from .constants import StackSpec
    from .energy import casimir_energies

    out = []
    for d in ds:
        for om in omegas:
            res = casimir_energies(StackSpec.plasma_sheets(1, float(d), float(om), temperature), ns, cfg)
            for n in sorted(res):
                out.append((n, float(d), float(om), res[n].e_per_area, res[n].tm_part))
    return out


def format_report(fit: FitResult, name: str = "") -> str:
    """Structured text records ``param,value,stderr,rss`` (one per parameter)."""
    lines = ["param,value,stderr,rss"]
    for k, v in fit.params.items():
        se = fit.stderr.get(k, math.nan)
        lines.append(f"{name + '.' if name else ''}{k},{v:.12e},{se:.6e},{fit.rss:.6e}")
    return "\n".join(lines)
