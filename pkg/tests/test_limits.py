import numpy as np
import pytest
from scipy import stats

from grenboot import (LimitConstants, LimitSimConfig, PathGrid, RngStream,
                      WindowTooSmallError, argmax_process, chernoff_draw,
                      chernoff_sample, doubled_draw, doubled_sample,
                      estimate_constants, l1_centering_constant,
                      simulate_path, triangular_density, uniform_density)


def _flat_path(step, half_width):
    m = round(half_width / step)
    return PathGrid(step, half_width, np.zeros(2 * m + 1))


# -- path simulation -------------------------------------------------------------


def test_path_starts_at_zero():
    p = simulate_path(0.01, 2.0, RngStream(1))
    m = len(p.values) // 2
    assert p.values[m] == 0.0
    assert p.grid[m] == 0.0


def test_path_variance_matches_brownian():
    root = RngStream(2)
    ends = np.empty(10000)
    mids1 = np.empty(10000)
    mids2 = np.empty(10000)
    for i in range(10000):
        p = simulate_path(0.01, 2.0, root.substream(i))
        m = len(p.values) // 2
        ends[i] = p.values[-1]
        mids1[i] = p.values[m + 100]     # Z(1)
        mids2[i] = p.values[m + 200]     # Z(2)
    assert abs(ends.var() / 2.0 - 1.0) < 0.05
    assert abs(np.cov(mids1, mids2)[0, 1] - 1.0) < 0.10


def test_pathgrid_validation():
    with pytest.raises(ValueError):
        PathGrid(0.01, 2.0, np.zeros(10))          # wrong length
    vals = np.zeros(401)
    vals[200] = 0.5
    with pytest.raises(ValueError):
        PathGrid(0.01, 2.0, vals)                  # Z(0) != 0


# -- chernoff draws ---------------------------------------------------------------


def test_flat_path_argmax_zero():
    loc, hit = chernoff_draw(_flat_path(0.01, 2.0))
    assert loc == 0.0 and not hit


def test_reflection_negates_argmax():
    root = RngStream(3)
    for i in range(200):
        p = simulate_path(0.01, 2.0, root.substream(i))
        a, _ = chernoff_draw(p)
        b, _ = chernoff_draw(p.reflected())
        assert a == -b


def test_chernoff_sample_symmetry():
    draws = chernoff_sample(20000, 0.005, 2.5, RngStream(4), threads=4)
    assert abs(draws.mean()) <= 3 * draws.std() / np.sqrt(len(draws))
    # distribution indistinguishable from its negation
    stat, p = stats.ks_2samp(draws, -draws)
    assert p > 0.01


def test_doubled_with_zero_second_path():
    p = simulate_path(0.01, 2.0, RngStream(5))
    single, _ = chernoff_draw(p)
    dbl, _ = doubled_draw(p, _flat_path(0.01, 2.0))
    assert dbl == single


def test_doubled_requires_shared_grid():
    a = simulate_path(0.01, 2.0, RngStream(6))
    b = simulate_path(0.02, 2.0, RngStream(7))
    with pytest.raises(ValueError):
        doubled_draw(a, b)


def test_scaling_ratio_moderate_scale():
    # acceptance runs the full configuration; this is a coarse guard
    singles = chernoff_sample(4000, 0.005, 2.5, RngStream(8), threads=4)
    doubles = doubled_sample(4000, 0.005, 2.5, RngStream(9), threads=4)
    ratio = doubles.var() / singles.var()
    assert 1.35 < ratio < 1.85


# -- the stationary argmax process -------------------------------------------------


def test_xi_at_zero_is_chernoff_when_window_is_full():
    p = simulate_path(0.01, 2.0, RngStream(10))
    c, _ = chernoff_draw(p)
    vals, hits = argmax_process(p, [0.0], 2.0)
    assert vals[0] == c


def test_xi_stationarity():
    root = RngStream(11)
    xi0 = np.empty(10000)
    xi5 = np.empty(10000)
    for i in range(10000):
        p = simulate_path(0.01, 7.5, root.substream(i))
        vals, _ = argmax_process(p, [0.0, 5.0], 2.5)
        xi0[i], xi5[i] = vals
    stat, pval = stats.ks_2samp(xi0, xi5)
    assert pval > 0.01


def test_xi_window_must_fit():
    p = simulate_path(0.01, 2.0, RngStream(12))
    with pytest.raises(ValueError):
        argmax_process(p, [1.5], 1.0)   # 1.5 + 1.0 exceeds the extent


def test_window_too_small_error():
    # pathological window so narrow the parabola cannot dominate: argmax
    # lands on the window edge constantly
    root = RngStream(13)
    with pytest.raises(WindowTooSmallError):
        chernoff_sample(500, 0.05, 0.2, root)


# -- constants ----------------------------------------------------------------------


def test_constants_basic(limit_constants):
    c = limit_constants
    assert c.l1_variance > 0
    assert c.chernoff_var > 0 and c.chernoff_abs_mean > 0
    assert c.chernoff_var_se > 0 and c.chernoff_abs_mean_se > 0
    assert c.boundary_hit_rate <= 1e-3


def test_constants_decay_diagnostic(limit_constants):
    # lag_max exceeds twice the window, so the two argmax windows are
    # disjoint and the true covariance is exactly zero
    c = limit_constants
    assert abs(c.cov_at_lag_max) < 2 * c.cov_at_lag_max_se


def test_constants_reproducible():
    config = LimitSimConfig(step=0.02, window=2.0, n_paths=400,
                            lag_max=5.0, lag_step=0.5, n_batches=10)
    a = estimate_constants(config, RngStream(14), threads=1)
    b = estimate_constants(config, RngStream(14), threads=4)
    assert a.to_dict() == b.to_dict()


def test_abs_mean_stable_under_grid_halving():
    base = dict(window=2.0, n_paths=3000, lag_max=4.5, lag_step=0.5,
                n_batches=10)
    coarse = estimate_constants(LimitSimConfig(step=0.01, **base),
                                RngStream(15), threads=4)
    fine = estimate_constants(LimitSimConfig(step=0.005, **base),
                              RngStream(16), threads=4)
    combined = np.hypot(coarse.chernoff_abs_mean_se, fine.chernoff_abs_mean_se)
    assert abs(coarse.chernoff_abs_mean - fine.chernoff_abs_mean) < 2 * combined


def test_chernoff_var_refinement_sequence():
    vars_, ses = [], []
    for k, step in enumerate((0.008, 0.004, 0.002)):
        draws = chernoff_sample(3000, step, 3.0, RngStream(17 + k), threads=4)
        vars_.append(draws.var())
        ses.append(np.sqrt((draws ** 4).mean() - draws.var() ** 2) / np.sqrt(3000))
    for k in range(2):
        combined = np.hypot(ses[k], ses[k + 1])
        assert abs(vars_[k + 1] - vars_[k]) < 2 * combined


def test_constants_roundtrip_serialization(limit_constants):
    d = limit_constants.to_dict()
    back = LimitConstants.from_dict(d)
    assert back.to_dict() == d


# -- centering constant ---------------------------------------------------------------


def test_centering_uniform_is_zero(limit_constants):
    assert l1_centering_constant(uniform_density(), limit_constants) == 0.0


def test_centering_triangular_composition(limit_constants):
    mu = l1_centering_constant(triangular_density(), limit_constants)
    expected = 2 * limit_constants.chernoff_abs_mean * (2 ** (1 / 3) * 0.75)
    assert abs(mu - expected) < 1e-7


def test_centering_scale_invariance(limit_constants):
    # halving the density and doubling the slope leaves |g'g/2|^(1/3) alone
    from grenboot.density import AnalyticDensity

    def make(c):
        # g(t) = c + s - 2st with s chosen so mass is 1; here use the
        # triangular family reparametrized: g(t) = 2c(1-t) + (1-c)
        pdf = lambda t, c=c: 2 * c * (1 - np.asarray(t, dtype=float)) + (1 - c)
        dpdf = lambda t, c=c: np.full(np.asarray(t, dtype=float).shape, -2.0 * c)
        cdf = lambda t, c=c: (2 * c + (1 - c)) * np.asarray(t) - c * np.asarray(t) ** 2
        return AnalyticDensity("blend", pdf, dpdf,
                               lambda t: np.zeros(np.asarray(t).shape),
                               cdf, None, nonincreasing=True,
                               slope_bounded=True, curvature_bounded=True,
                               piecewise_linear=True)

    g = make(0.5)
    mu = l1_centering_constant(g, limit_constants)
    # direct quadrature of the definition as an independent check
    from grenboot import l1_shape_integral
    assert abs(mu - 2 * limit_constants.chernoff_abs_mean * l1_shape_integral(g)) < 1e-9
