import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grenboot import (EmpiricalCDF, RngStream, Sample, StepDensity,
                      grenander_fit, l1_distance, l1_shape_integral,
                      least_concave_majorant, rate_constant,
                      sample_from_analytic, sup_distance, triangular_density,
                      trunc_exp_density, uniform_density)
from .oracles import brute_force_grenander_heights

unit_floats = st.floats(0.001, 1.0, allow_nan=False, allow_infinity=False)


# -- Sample / ECDF ------------------------------------------------------------


def test_sample_sorts_and_freezes():
    s = Sample([0.9, 0.1, 0.5])
    assert np.all(np.diff(s.values) >= 0)
    with pytest.raises(ValueError):
        s.values[0] = 0.3


def test_sample_rejects_out_of_range():
    with pytest.raises(ValueError):
        Sample([0.5, 1.2])
    with pytest.raises(ValueError):
        Sample([-0.1])
    with pytest.raises(ValueError):
        Sample([np.nan, 0.3])


def test_ecdf_basic():
    F = EmpiricalCDF(Sample([0.25, 0.75]))
    assert F(0.25) == 0.5 and F(0.5) == 0.5 and F(0.75) == 1.0
    assert F(0.0) == 0.0


def test_ecdf_single_point():
    F = EmpiricalCDF(Sample([0.3]))
    assert F(0.2) == 0.0 and F(0.3) == 1.0


def test_ecdf_tie_merged():
    F = EmpiricalCDF(Sample([0.4, 0.4]))
    assert F(0.4) == 1.0
    assert F(0.39) == 0.0


# -- least concave majorant ----------------------------------------------------


def test_lcm_keeps_all_vertices_when_already_concave():
    lcm = least_concave_majorant(EmpiricalCDF(Sample([0.25, 0.75])))
    assert np.allclose(lcm.vx, [0, 0.25, 0.75, 1])
    assert np.allclose(lcm.vy, [0, 0.5, 1, 1])


def test_lcm_drops_dominated_vertex():
    lcm = least_concave_majorant(EmpiricalCDF(Sample([0.5, 0.6])))
    assert np.allclose(lcm.vx, [0, 0.6, 1])
    assert np.allclose(lcm.vy, [0, 1, 1])


def test_lcm_single_point():
    lcm = least_concave_majorant(EmpiricalCDF(Sample([0.3])))
    assert np.allclose(lcm.vx, [0, 0.3, 1])
    assert np.allclose(lcm.vy, [0, 1, 1])


def test_lcm_rejects_observation_at_zero():
    with pytest.raises(ValueError, match="degenerate"):
        least_concave_majorant(EmpiricalCDF(Sample([0.0, 0.5])))


def test_lcm_dominates_and_touches():
    rng = RngStream(5).gen
    for _ in range(50):
        n = int(rng.integers(1, 40))
        s = Sample(rng.uniform(0.01, 1.0, n))
        F = EmpiricalCDF(s)
        lcm = least_concave_majorant(F)
        grid = np.linspace(0, 1, 10001)
        assert np.all(lcm(grid) >= F(grid) - 1e-12)
        # interior vertices coincide with ECDF jump targets
        for x, y in zip(lcm.vx[1:-1], lcm.vy[1:-1]):
            assert abs(F(x) - y) < 1e-12
        slopes = lcm.slopes
        assert np.all(np.diff(slopes) < 1e-12)


# -- Grenander fit -------------------------------------------------------------


def test_grenander_two_point_heights():
    fit = grenander_fit(Sample([0.25, 0.75]))
    assert np.allclose(fit.breakpoints, [0.25, 0.75, 1.0])
    assert np.allclose(fit.heights, [2.0, 1.0, 0.0])


def test_grenander_merged_step():
    fit = grenander_fit(Sample([0.5, 0.6]))
    assert np.allclose(fit.breakpoints, [0.6, 1.0])
    assert np.allclose(fit.heights, [5 / 3, 0.0])


@given(unit_floats)
@settings(max_examples=50, deadline=None)
def test_grenander_single_point(x):
    fit = grenander_fit(Sample([x]))
    assert abs(fit(x / 2) - 1.0 / x) < 1e-9 * (1 / x)
    if x < 1.0:
        assert fit((1 + x) / 2) == 0.0


def test_grenander_matches_brute_force_oracle():
    rng = RngStream(17).gen
    for trial in range(300):
        n = int(rng.integers(1, 9))
        s = Sample(np.round(rng.uniform(0.02, 1.0, n), 3))
        fit = grenander_fit(s)
        oracle_h, oracle_x = brute_force_grenander_heights(s.values)
        ours = fit(oracle_x - 1e-9)
        assert np.all(np.abs(ours - oracle_h) < 1e-12), (s.values, ours, oracle_h)


def test_grenander_invariants_larger_n():
    rng = RngStream(23)
    for n in (10, 1000, 100000):
        s = sample_from_analytic(triangular_density(), n, rng.substream(n))
        fit = grenander_fit(s)
        assert np.all(np.diff(fit.heights) <= 1e-12)
        assert abs(fit.mass - 1.0) < 1e-12
        assert fit.heights[-1] >= 0.0


# -- StepDensity ----------------------------------------------------------------


def test_step_density_left_convention():
    d = StepDensity([0.25, 0.75, 1.0], [2.0, 1.0, 0.0])
    assert d(0.25) == 2.0       # value on (0, 0.25]
    assert d(0.250001) == 1.0
    assert d(0.0) == 2.0        # value at 0 equals the first height
    assert d(1.0) == 0.0


def test_step_density_validation():
    with pytest.raises(ValueError):
        StepDensity([0.5, 1.0], [1.0, 2.0])       # increasing heights
    with pytest.raises(ValueError):
        StepDensity([0.5, 1.0], [3.0, 0.0])       # mass 1.5
    with pytest.raises(ValueError):
        StepDensity([0.5, 0.9], [2.0, 0.0])       # does not end at 1


def test_step_density_eval_sided():
    d = StepDensity([0.5, 1.0], [1.8, 0.2])
    assert d.eval_sided(0.5, "left") == 1.8
    assert d.eval_sided(0.5, "right") == 0.2


# -- analytic zoo ----------------------------------------------------------------


@pytest.mark.parametrize("density", [uniform_density(), triangular_density(),
                                     trunc_exp_density(1.0), trunc_exp_density(3.0)])
def test_zoo_ppf_inverts_cdf(density):
    u = np.linspace(0.01, 0.99, 37)
    assert np.allclose(density.cdf(density.ppf(u)), u, atol=1e-10)


def test_zoo_flags():
    tri = triangular_density()
    assert tri.nonincreasing and tri.slope_bounded
    assert tri.piecewise_linear
    uni = uniform_density()
    assert uni.nonincreasing
    te = trunc_exp_density()
    assert te.nonincreasing and not te.piecewise_linear


def test_triangular_values():
    tri = triangular_density()
    assert tri(0.0) == 2.0 and tri(1.0) == 0.0
    assert tri.dpdf(0.3) == -2.0
    assert abs(tri.cdf(0.5) - 0.75) < 1e-15


# -- distances -------------------------------------------------------------------


def test_l1_step_vs_uniform():
    step = StepDensity([0.25, 0.75, 1.0], [2.0, 1.0, 0.0])
    assert abs(l1_distance(step, uniform_density()) - 0.5) < 1e-10


def test_l1_identity():
    tri = triangular_density()
    assert l1_distance(tri, tri) == 0.0


def test_l1_uniform_vs_triangular_closed_form():
    # |1 - 2(1-t)| = |2t - 1| integrates to two triangles of area 1/4 each
    val = l1_distance(uniform_density(), triangular_density())
    assert abs(val - 0.5) < 1e-10


def test_l1_symmetry_and_triangle():
    rng = RngStream(31)
    tri = triangular_density()
    for k in range(10):
        a = grenander_fit(sample_from_analytic(tri, 30, rng.substream(k, 0)))
        b = grenander_fit(sample_from_analytic(tri, 30, rng.substream(k, 1)))
        c = grenander_fit(sample_from_analytic(tri, 30, rng.substream(k, 2)))
        ab, ba = l1_distance(a, b), l1_distance(b, a)
        assert abs(ab - ba) < 1e-12
        assert ab <= l1_distance(a, c) + l1_distance(c, b) + 1e-10
        assert l1_distance(a, a) == 0.0


def test_sup_step_vs_uniform():
    step = StepDensity([0.25, 0.75, 1.0], [2.0, 1.0, 0.0])
    assert abs(sup_distance(step, uniform_density()) - 1.0) < 1e-12


def test_sup_uniform_vs_triangular():
    assert abs(sup_distance(uniform_density(), triangular_density()) - 1.0) < 1e-12


def test_sup_identity():
    tri = triangular_density()
    assert sup_distance(tri, tri) == 0.0


# -- rate constant and shape integral ---------------------------------------------


def test_rate_constant_triangular():
    assert abs(rate_constant(triangular_density(), 0.5) - 2.0) < 1e-14


def test_rate_constant_boundary_rejected():
    with pytest.raises(ValueError):
        rate_constant(triangular_density(), 0.0)
    with pytest.raises(ValueError):
        rate_constant(triangular_density(), 1.0)


def test_rate_constant_flat_density_zero():
    assert rate_constant(uniform_density(), 0.5) == 0.0


def test_shape_integral_triangular_closed_form():
    val = l1_shape_integral(triangular_density())
    assert abs(val - 2 ** (1 / 3) * 0.75) < 1e-7


def test_shape_integral_uniform_zero():
    assert abs(l1_shape_integral(uniform_density())) < 1e-12
