import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grenboot import adaptive_simpson, integrate_piecewise


def test_polynomial_exact():
    # Simpson is exact for cubics, so tolerance here is pure float noise
    val = adaptive_simpson(lambda t: 3 * t ** 2 - t + 1, 0.0, 2.0)
    assert abs(val - (8.0 - 2.0 + 2.0)) < 1e-12


def test_smooth_transcendental():
    val = adaptive_simpson(np.exp, 0.0, 1.0, tol=1e-12)
    assert abs(val - (np.e - 1.0)) < 1e-10


def test_kink_handled_by_refinement():
    val = adaptive_simpson(lambda t: np.abs(t - 0.3), 0.0, 1.0, tol=1e-10)
    exact = 0.3 ** 2 / 2 + 0.7 ** 2 / 2
    assert abs(val - exact) < 1e-8


def test_piecewise_with_breakpoints():
    f = lambda t: np.where(t < 0.5, 1.0, 3.0)
    val = integrate_piecewise(f, [0.0, 0.5, 1.0], tol=1e-10)
    assert abs(val - 2.0) < 1e-10


def test_cube_root_singularity():
    # unbounded derivative at the right endpoint, still within tolerance
    val = adaptive_simpson(lambda t: (1.0 - t) ** (1 / 3), 0.0, 1.0, tol=1e-9)
    assert abs(val - 0.75) < 1e-7


def test_reversed_interval_raises():
    with pytest.raises(ValueError):
        adaptive_simpson(np.exp, 1.0, 0.0)


def test_nonfinite_integrand_raises():
    with np.errstate(divide="ignore"):
        with pytest.raises(ValueError, match="non-finite"):
            adaptive_simpson(lambda t: 1.0 / (t - 0.5), 0.0, 1.0)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=6).map(sorted),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=60, deadline=None)
def test_quadratic_exact_property(brk, a, b, c):
    brk = np.unique(np.asarray(brk))
    if len(brk) < 2:
        return
    f = lambda t: a * t ** 2 + b * t + c
    F = lambda t: a * t ** 3 / 3 + b * t ** 2 / 2 + c * t
    val = integrate_piecewise(f, brk, tol=1e-10)
    assert abs(val - (F(brk[-1]) - F(brk[0]))) < 1e-8


def test_additivity_over_breakpoints():
    f = lambda t: np.sin(3 * t) + 0.2
    whole = adaptive_simpson(f, 0.0, 2.0, tol=1e-11)
    split = integrate_piecewise(f, [0.0, 0.7, 1.1, 2.0], tol=1e-11)
    assert abs(whole - split) < 1e-9
