"""Parity between the compiled core and the pure-numpy fallback."""

import numpy as np
import pytest

from bergkit import _core
from bergkit._core import _fallback


def _compiled():
    mod = _core.IMPLEMENTATIONS.get("compiled")
    if mod is None:
        pytest.skip("compiled extension not built")
    return mod


def test_poly_eval_real_matches_reference():
    rng = np.random.default_rng(0)
    coeffs = rng.uniform(0.1, 2.0, 3000)
    x = rng.uniform(0.0, 0.999, 40)
    ref = np.polynomial.polynomial.polyval(x, coeffs)
    got = _core.poly_eval(coeffs, x)
    assert np.allclose(got, ref, rtol=1e-12)


def test_poly_eval_complex_matches_reference():
    rng = np.random.default_rng(1)
    coeffs = rng.uniform(0.1, 2.0, 2000)
    z = rng.uniform(0, 0.99, 30) * np.exp(1j * rng.uniform(0, 2 * np.pi, 30))
    ref = np.polynomial.polynomial.polyval(z, coeffs)
    got = _core.poly_eval(coeffs, z)
    assert np.allclose(got, ref, rtol=1e-12)


def test_power_moments_matches_direct_sum():
    rng = np.random.default_rng(2)
    r = rng.uniform(0.0, 0.9999, 200)
    w = rng.uniform(0.0, 1.0, 200)
    got = _core.power_moments(r, w, 0, 50)
    for n in (0, 1, 7, 49):
        assert got[n] == pytest.approx(float(w @ r ** n), rel=1e-13)


def test_backends_agree():
    fast = _compiled()
    rng = np.random.default_rng(3)
    coeffs = rng.uniform(0.0, 3.0, 70000)
    x = rng.uniform(0.0, 0.9999, 64)
    a = fast.poly_eval_d(coeffs, x)
    b = _fallback.poly_eval_d(coeffs, x)
    assert np.allclose(a, b, rtol=1e-11)

    z = x * np.exp(1j * rng.uniform(0, 2 * np.pi, 64))
    az = fast.poly_eval_z(coeffs, np.ascontiguousarray(z.real),
                          np.ascontiguousarray(z.imag))
    bz = _fallback.poly_eval_z(coeffs, z.real.copy(), z.imag.copy())
    assert np.allclose(az, bz, rtol=1e-11)

    r = rng.uniform(0.0, 1.0 - 1e-12, 300)
    w = rng.uniform(0.0, 1.0, 300)
    am = fast.power_moments_d(r, w, 3, 20000)
    bm = _fallback.power_moments_d(r, w, 3, 20000)
    assert np.allclose(am, bm, rtol=1e-11)


def test_resync_keeps_long_series_accurate():
    # power drift over ~10^5 multiplies must stay near machine precision
    fast = _compiled()
    r = np.array([1.0 - 2.0 ** -14])
    w = np.array([1.0])
    n = 100_000
    got = fast.power_moments_d(r, w, 0, n + 1)[n]
    assert got == pytest.approx(float(r[0]) ** n, rel=1e-11)
