import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimirstack.constants import CODATA, StackSpec
from casimirstack.energy import QuadratureConfig, casimir_energy
from casimirstack.fitting import (ASYMPTOTE, CLOSED_FORM_PREFACTOR, closed_form_energy, closed_form_prefactor,
                                  fit_power_law, fit_power_law_direct, fit_ratio_asymptote,
                                  fit_ratio_asymptote_grid, format_report, power_law_samples)

PRINTED_RATIOS = [(1, 1.0000), (2, 1.0125), (3, 1.0181), (4, 1.0212), (5, 1.0232), (6, 1.0246), (7, 1.0256),
                  (8, 1.0263), (9, 1.0269), (10, 1.0274), (11, 1.0278), (13, 1.0284), (15, 1.0288),
                  (17, 1.0292), (19, 1.0294)]


@settings(max_examples=40)
@given(st.floats(0.9, 1.2), st.floats(0.005, 0.2), st.floats(0.3, 2.0))
def test_asymptote_recovers_synthetic(a, b, p):
    n = np.arange(1, 20)
    data = list(zip(n, a - b * n ** (-p)))
    for fit in (fit_ratio_asymptote(data), fit_ratio_asymptote_grid(data)):
        assert fit["a"] == pytest.approx(a, abs=1e-7)
        assert fit["b"] == pytest.approx(b, rel=1e-5)
        assert fit["p"] == pytest.approx(p, rel=1e-5)
        assert fit.rss < 1e-20


def test_printed_table_fit():
    lm = fit_ratio_asymptote(PRINTED_RATIOS)
    grid = fit_ratio_asymptote_grid(PRINTED_RATIOS)
    assert lm.converged and grid.converged
    assert lm.rss < 1e-5
    assert lm["a"] == pytest.approx(1.034, abs=0.002)
    assert lm["b"] == pytest.approx(0.034, abs=0.004)
    assert lm["p"] == pytest.approx(0.71, abs=0.03)
    for k in "abp":
        assert grid[k] == pytest.approx(lm[k], rel=1e-7)
        assert lm.stderr[k] > 0


def test_printed_table_fit_without_first_point():
    # dropping N = 1 moves the fit by several standard errors; both estimators must still agree
    data = PRINTED_RATIOS[1:]
    lm = fit_ratio_asymptote(data)
    grid = fit_ratio_asymptote_grid(data)
    for k in "abp":
        assert grid[k] == pytest.approx(lm[k], rel=1e-6)
    assert lm["a"] == pytest.approx(1.034, abs=0.003)


def test_ratio_data_validation():
    with pytest.raises(ValueError):
        fit_ratio_asymptote(PRINTED_RATIOS[:3])
    with pytest.raises(ValueError):
        fit_ratio_asymptote_grid([(0, 1.0)] + PRINTED_RATIOS[1:4])


def closed_form_samples(K, alpha, beta, ns=(1, 3, 10)):
    out = []
    for d in np.geomspace(1e-9, 1e-8, 6):
        for om in (1e4, 1e5, 1e6):
            for n in ns:
                e = -ASYMPTOTE * n * K * CODATA.hbar_c * om**alpha / d**beta
                out.append((n, d, om, e))
    return out


@settings(max_examples=30)
@given(st.floats(1e-3, 1e-1), st.floats(0.3, 0.7), st.floats(2.0, 3.0))
def test_power_law_exact_recovery(K, alpha, beta):
    samples = closed_form_samples(K, alpha, beta)
    for fit in (fit_power_law(samples), fit_power_law_direct(samples)):
        assert fit["K"] == pytest.approx(K, rel=1e-8)
        assert fit["alpha"] == pytest.approx(alpha, abs=1e-9)
        assert fit["beta"] == pytest.approx(beta, abs=1e-9)


def test_power_law_rescaling_invariance():
    # multiplying every energy by a constant only rescales K
    samples = closed_form_samples(5e-3, 0.5, 2.5)
    scaled = [(n, d, om, 3.0 * e) for n, d, om, e in samples]
    a, b = fit_power_law(samples), fit_power_law(scaled)
    assert b["K"] == pytest.approx(3.0 * a["K"], rel=1e-12)
    assert b["alpha"] == pytest.approx(a["alpha"], abs=1e-12)


def test_power_law_estimators_agree_on_noisy_data():
    rng = np.random.default_rng(1)
    samples = [(n, d, om, e * (1 + 1e-3 * rng.standard_normal()))
               for n, d, om, e in closed_form_samples(5e-3, 0.5, 2.5)]
    a, b = fit_power_law(samples), fit_power_law_direct(samples)
    assert a.converged and b.converged
    assert b["K"] == pytest.approx(a["K"], rel=1e-3)
    assert b["alpha"] == pytest.approx(a["alpha"], abs=1e-3)
    assert b["beta"] == pytest.approx(a["beta"], abs=1e-3)


def test_degenerate_designs_rejected():
    samples = closed_form_samples(5e-3, 0.5, 2.5)
    narrow_d = [s for s in samples if s[1] < 3e-9]
    with pytest.raises(ValueError, match="degenerate"):
        fit_power_law(narrow_d)
    one_omega = [s for s in samples if s[2] == 1e5]
    with pytest.raises(ValueError, match="degenerate"):
        fit_power_law_direct(one_omega)
    # d and omega varied together: spans both decades but is collinear in log space
    diag = [(1, d, 1e4 * (d / 1e-9) ** 2, -1.0) for d in np.geomspace(1e-9, 1e-8, 5)]
    with pytest.raises(ValueError, match="collinear"):
        fit_power_law(diag)
    with pytest.raises(ValueError):
        fit_power_law([(1, 1e-9, 1e4, 1.0)] * 3)


def test_power_law_on_exact_energies_small_grid():
    cfg = QuadratureConfig(rel_tol=1e-6)
    samples = power_law_samples([1e-9, 3e-9, 1e-8], [1e4, 1e6], [1, 5], cfg=cfg)
    assert len(samples) == 12
    fit = fit_power_law([s[:4] for s in samples])
    assert fit["alpha"] == pytest.approx(0.5, abs=0.01)
    assert fit["beta"] == pytest.approx(2.5, abs=0.02)
    assert fit["K"] == pytest.approx(5.0e-3, rel=0.05)


def test_closed_form_values():
    assert closed_form_prefactor(5.0e-3) == pytest.approx(CLOSED_FORM_PREFACTOR, rel=0.01)
    e = closed_form_energy(1, 2e-9, 49593.3)
    assert e == pytest.approx(-2.02e-4, rel=0.01)
    exact = casimir_energy(StackSpec.plasma_sheets(1, 2e-9, 49593.3, 94.0), QuadratureConfig(rel_tol=1e-6))
    assert e == pytest.approx(exact.e_per_area, rel=0.03)
    assert closed_form_energy(3, 2e-9, 0.0) == 0.0
    arr = closed_form_energy(np.array([1, 2]), np.array([1e-9, 2e-9]), 1e5)
    assert arr.shape == (2,)
    assert arr[0] == pytest.approx(-CLOSED_FORM_PREFACTOR * math.sqrt(1e5) / 1e-9**2.5)
    with pytest.raises(ValueError):
        closed_form_energy(1, 0.0, 1.0)


@pytest.mark.parametrize("d", [1e-9, 4e-9, 1e-8])
def test_closed_form_tracks_exact_over_gap_range(d):
    exact = casimir_energy(StackSpec.plasma_sheets(1, d, 49593.3, 94.0), QuadratureConfig(rel_tol=1e-6))
    assert closed_form_energy(1, d, 49593.3) == pytest.approx(exact.e_per_area, rel=0.05)


def test_report_format():
    fit = fit_ratio_asymptote(PRINTED_RATIOS)
    lines = format_report(fit, "ratio").splitlines()
    assert lines[0] == "param,value,stderr,rss"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["ratio.a", "ratio.b", "ratio.p"]
    for ln in lines[1:]:
        _, value, se, rss = ln.split(",")
        float(value), float(se)
        assert float(rss) == pytest.approx(fit.rss, rel=1e-6)
