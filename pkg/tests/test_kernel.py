import math
import os
import subprocess
import sys

import numpy as np
import pytest

from casimirstack import _kernel_py, kernel

try:
    from casimirstack import _kernel
except ImportError:  # extension not built
    _kernel = None

needs_ext = pytest.mark.skipif(_kernel is None, reason="compiled kernel not built")


def grid(seed, L=40, M=60, zero_first=True):
    rng = np.random.default_rng(seed)
    d = 10 ** rng.uniform(-9, -7.5)
    zeta = np.sort(10 ** rng.uniform(-2, 1, L)) / d
    if zero_first:
        zeta[0] = 0.0
    k = np.sort(10 ** rng.uniform(-3, 1.5, M)) / d
    e_in = 1.0 + 5.0 * rng.random(L)
    e_out = 1.0 + 5.0 * rng.random(L)
    return zeta, e_in, e_out, k, d


def test_backend_name():
    assert kernel.BACKEND in ("cython", "python")
    if _kernel is not None and os.environ.get("CASIMIRSTACK_PURE_PYTHON", "") in ("", "0"):
        assert kernel.BACKEND == "cython"


@needs_ext
@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("tm", [True, False])
@pytest.mark.parametrize("omega", [0.0, 3e4, 5e6])
@pytest.mark.parametrize("vacuum", [True, False])
def test_backends_agree(seed, tm, omega, vacuum):
    zeta, e_in, e_out, k, d = grid(seed)
    if vacuum:
        e_in = e_out = np.ones_like(zeta)
    for primed in (False, True):
        a = _kernel_py.log_delta_grid(zeta, e_in, e_out, k, d, omega, tm, 6, primed)
        b = _kernel.log_delta_grid(zeta, e_in, e_out, k, d, omega, tm, 6, primed)
        np.testing.assert_allclose(b[0], a[0], rtol=1e-12, atol=1e-13)
        if primed:
            np.testing.assert_allclose(b[1], a[1], rtol=1e-12, atol=1e-13)
        else:
            assert a[1] is None and b[1] is None


@pytest.mark.parametrize("impl", [_kernel_py, pytest.param(_kernel, marks=needs_ext)])
def test_tm_zero_mode_closed_form(impl):
    # perfect mirrors: every vacuum gap decouples, log Delta = gaps * log(1 - e^{-2kd})
    d = 2e-9
    k = np.logspace(6, 10, 30)
    ld, lp = impl.log_delta_grid(np.zeros(1), np.ones(1), np.ones(1), k, d, 1e4, True, 5, True)
    single = np.log1p(-np.exp(-2 * k * d))
    for n in range(1, 6):
        # n cells of sheets span 2n - 1 gaps; the primed series spans 2n
        np.testing.assert_allclose(ld[n - 1, 0], (2 * n - 1) * single, rtol=1e-12)
        np.testing.assert_allclose(lp[n - 1, 0], 2 * n * single, rtol=1e-12)


@pytest.mark.parametrize("impl", [_kernel_py, pytest.param(_kernel, marks=needs_ext)])
def test_first_cell_is_lifshitz(impl):
    zeta, e_in, e_out, k, d = grid(7, zero_first=False)
    ld, _ = impl.log_delta_grid(zeta, e_in, e_out, k, d, 0.0, False, 1, False)
    Ki = np.sqrt(k[None] ** 2 + e_in[:, None] * zeta[:, None] ** 2)
    Ko = np.sqrt(k[None] ** 2 + e_out[:, None] * zeta[:, None] ** 2)
    r = (Ki - Ko) / (Ki + Ko)
    np.testing.assert_allclose(ld[0], np.log1p(-r * r * np.exp(-2 * Ki * d)), rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("impl", [_kernel_py, pytest.param(_kernel, marks=needs_ext)])
def test_output_finite_on_extreme_grid(impl):
    zeta = np.array([0.0, 1e3, 1e12])
    k = np.array([1e-3, 1.0, 1e12, 1e15])
    for tm in (True, False):
        ld, lp = impl.log_delta_grid(zeta, np.full(3, 2.0), np.full(3, 5.0), k, 1e-9, 1e6, tm, 10, True)
        assert np.all(np.isfinite(ld)) and np.all(np.isfinite(lp))


def test_pure_python_fallback_forced_by_environment():
    env = dict(os.environ, CASIMIRSTACK_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from casimirstack import kernel; print(kernel.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_energy_identical_across_backends():
    code = ("from casimirstack.constants import StackSpec; from casimirstack.energy import casimir_energy, "
            "QuadratureConfig; print(repr(casimir_energy(StackSpec.plasma_sheets(3, 1e-8, 1e5, 94.0), "
            "QuadratureConfig(rel_tol=1e-6)).e_per_area))")
    vals = []
    for flag in ("0", "1"):
        env = dict(os.environ, CASIMIRSTACK_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        vals.append(float(out.stdout))
    assert math.isclose(vals[0], vals[1], rel_tol=1e-10)
