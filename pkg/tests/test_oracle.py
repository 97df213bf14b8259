import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimirstack.coeffs import Polarization
from casimirstack.constants import SpectralPoint, StackKind, StackSpec, constant_permittivity
from casimirstack.oracle import (SingularNormalization, build_layered_matrix, build_matrix, equivalence_suite,
                                 layered_delta, regularized_delta, series_delta, stack_layers)


def dielectric(n, d, e_in, e_out, omega=0.0):
    return StackSpec(StackKind.DIELECTRIC, n, d, 1.0, omega, constant_permittivity(e_in), constant_permittivity(e_out))


def lifshitz(r, K, d):
    return 1.0 - r * r * math.exp(-2.0 * K * d)


@given(st.floats(1e2, 1e7), st.floats(1e6, 1e9), st.floats(1e6, 1e9), st.floats(1e-9, 1e-7))
def test_single_sheet_pair_te(omega, zeta, k, d):
    pt = SpectralPoint(1, zeta, k)
    K = math.hypot(k, zeta)
    got = regularized_delta(StackSpec.plasma_sheets(1, d, omega, 1.0), "TE", pt)
    assert got.value == pytest.approx(lifshitz(omega / (K + omega), K, d), rel=1e-12)


@given(st.floats(1e2, 1e7), st.floats(1e6, 1e9), st.floats(1e6, 1e9), st.floats(1e-9, 1e-7))
def test_single_sheet_pair_tm(omega, zeta, k, d):
    pt = SpectralPoint(1, zeta, k)
    K = math.hypot(k, zeta)
    g = omega * K / zeta**2
    got = regularized_delta(StackSpec.plasma_sheets(1, d, omega, 1.0), "TM", pt)
    assert got.value == pytest.approx(lifshitz(g / (1 + g), K, d), rel=1e-12)


@given(st.floats(1.0, 10.0), st.floats(1.0, 10.0), st.floats(1e6, 1e9), st.floats(1e6, 1e9))
def test_single_dielectric_cavity(e_in, e_out, zeta, k):
    d = 5e-9
    pt = SpectralPoint(1, zeta, k)
    Ki, Ko = math.sqrt(k * k + e_in * zeta * zeta), math.sqrt(k * k + e_out * zeta * zeta)
    r_tm = (e_out * Ki - e_in * Ko) / (e_out * Ki + e_in * Ko)
    r_te = (Ki - Ko) / (Ki + Ko)
    spec = dielectric(1, d, e_in, e_out)
    assert regularized_delta(spec, "TM", pt).value == pytest.approx(lifshitz(r_tm, Ki, d), rel=1e-12)
    assert regularized_delta(spec, "TE", pt).value == pytest.approx(lifshitz(r_te, Ki, d), rel=1e-12)


def test_tm_zero_mode_sheets_are_perfect_mirrors():
    K = 1e8
    d = 3e-9
    pt = SpectralPoint(0, 0.0, K)
    for n in range(1, 6):
        got = regularized_delta(StackSpec.plasma_sheets(n, d, 1e4, 1.0), "TM", pt)
        # n decoupled perfectly reflecting cavities
        assert got.log_value == pytest.approx(n * math.log1p(-math.exp(-2 * K * d)), rel=1e-12)


@pytest.mark.parametrize("spec", [StackSpec.plasma_sheets(3, 2e-9, 1e5, 94.0), dielectric(2, 3e-9, 3.0, 2.0, 1e4)])
@pytest.mark.parametrize("pol", ["TM", "TE"])
def test_printed_layout_same_determinant(spec, pol):
    pt = SpectralPoint(1, 2e8, 3e8)
    printed = build_matrix(spec, pol, pt, layout="printed")
    scaled = build_matrix(spec, pol, pt)
    assert printed.dim == scaled.dim == 2 * len(stack_layers(spec, pt.zeta)[2])
    lp = np.linalg.slogdet(printed.entries)[1]
    ls = np.linalg.slogdet(scaled.entries)[1] + scaled.scale_log
    assert lp == pytest.approx(ls, rel=1e-12)


def test_printed_layout_entries_single_cavity_te():
    omega, zeta, k, d = 1e5, 2e8, 3e8, 2e-9
    K = math.hypot(k, zeta)
    m = build_matrix(StackSpec.plasma_sheets(1, d, omega, 94.0), "TE", SpectralPoint(1, zeta, k), layout="printed").entries
    # first interface at z = 0: field continuity, then a derivative jump of 2 Omega times the field
    assert m[0] == pytest.approx([-1.0, 1.0, 1.0, 0.0])
    assert m[1] == pytest.approx([-K, K - 2 * omega, -K - 2 * omega, 0.0], rel=1e-14)
    ep, em = math.exp(K * d), math.exp(-K * d)
    assert m[2] == pytest.approx([0.0, ep, em, -em], rel=1e-14)
    assert m[3] == pytest.approx([0.0, K * ep, -K * em, K * em + 2 * omega * em], rel=1e-14)


@pytest.mark.parametrize("pol", ["TM", "TE"])
def test_thick_stack_decouples(pol):
    pt = SpectralPoint(1, 1e7, 1e7)
    for d in (1e-5, 1e-4):
        for spec in (StackSpec.plasma_sheets(4, d, 1e5, 1.0), dielectric(3, d, 4.0, 2.0)):
            assert abs(regularized_delta(spec, pol, pt).log_value) < 1e-15


def test_deep_stack_no_overflow():
    pt = SpectralPoint(1, 1e10, 1e10)
    v = regularized_delta(StackSpec.plasma_sheets(40, 1e-7, 1e6, 1.0), "TM", pt)
    assert math.isfinite(v.log_value)


@settings(max_examples=60)
@given(st.sampled_from(["TM", "TE"]), st.integers(1, 5), st.floats(1.0, 10.0), st.floats(1.0, 10.0),
       st.floats(-9.0, -7.5), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.0, 7.0))
def test_recurrence_matches_determinant_dielectric(pol, n, e_in, e_out, logd, lz, lk, lom):
    d = 10**logd
    omega = 10**lom if lom > 0.5 else 0.0
    pt = SpectralPoint(1, 10**lz / d, 10**lk / d)
    spec = dielectric(n, d, e_in, e_out, omega)
    a = regularized_delta(spec, pol, pt).log_value
    b = series_delta(spec, pol, pt).log_value
    assert b == pytest.approx(a, abs=1e-12)


@settings(max_examples=60)
@given(st.sampled_from(["TM", "TE"]), st.integers(1, 8), st.floats(-9.0, -7.5), st.floats(-1.0, 1.0),
       st.floats(-1.0, 1.0), st.floats(2.0, 7.0), st.booleans())
def test_recurrence_matches_determinant_plasma(pol, n, logd, lz, lk, lom, zero_mode):
    d = 10**logd
    pt = SpectralPoint(0, 0.0, 10**lk / d) if zero_mode else SpectralPoint(1, 10**lz / d, 10**lk / d)
    spec = StackSpec.plasma_sheets(n, d, 10**lom, 1.0)
    a = regularized_delta(spec, pol, pt).log_value
    b = series_delta(spec, pol, pt).log_value
    assert b == pytest.approx(a, abs=1e-12)


def test_convolution_route_well_conditioned_case():
    spec = dielectric(4, 5e-9, 3.0, 1.5)
    pt = SpectralPoint(1, 2e8, 1e8)
    for pol in ("TM", "TE"):
        a = regularized_delta(spec, pol, pt).log_value
        c = series_delta(spec, pol, pt, method="convolution").log_value
        assert c == pytest.approx(a, abs=1e-12)
    with pytest.raises(ValueError):
        series_delta(spec, "TM", pt, method="other")


def test_small_equivalence_suite():
    rep = equivalence_suite(40, seed=3)
    assert rep.n_comparisons > 40 * 20
    assert rep.max_rel_dev < 1e-10
    # the plain convolution stays within rounding of its own condition number
    assert rep.max_conv_scaled < 1e3


def test_layered_matches_uniform_and_handles_mixed_stacks():
    pt = SpectralPoint(1, 1e8, 2e8)
    spec = dielectric(2, 4e-9, 3.0, 2.0, 1e5)
    eps, widths, omegas = stack_layers(spec, pt.zeta)
    assert layered_delta(eps, widths, omegas, "TM", pt).log_value == pytest.approx(
        regularized_delta(spec, "TM", pt).log_value, rel=1e-14)
    # an inert extra interface (same medium, no sheet) changes nothing
    v = layered_delta([2.0, 3.0, 3.0, 2.0], [2e-9, 2e-9], [0.0, 0.0, 0.0], Polarization.TE, pt)
    ref = layered_delta([2.0, 3.0, 2.0], [4e-9], [0.0, 0.0], Polarization.TE, pt)
    assert v.log_value == pytest.approx(ref.log_value, rel=1e-12)


def test_layered_validation():
    pt = SpectralPoint(1, 1e8, 2e8)
    with pytest.raises(ValueError):
        build_layered_matrix([1.0, 1.0], [1e-9], [0.0], "TM", pt)
    with pytest.raises(ValueError):
        build_layered_matrix([1.0, 0.5, 1.0], [1e-9], [0.0, 0.0], "TM", pt)
    with pytest.raises(ValueError):
        build_layered_matrix([1.0, 2.0, 1.0], [0.0], [0.0, 0.0], "TM", pt)
    with pytest.raises(ValueError):
        build_layered_matrix([1.0, 2.0, 1.0], [1e-9], [0.0, 0.0], "TM", pt, layout="other")
    with pytest.raises(ValueError):
        regularized_delta(StackSpec.plasma_sheets(2, 1e-9, 1.0, 1.0), "TM", pt, n=3)
    assert issubclass(SingularNormalization, ArithmeticError)
