"""Boundary-corrected kernel density estimation on [0, 1].

The raw kernel estimate is only trustworthy on [h, 1-h]; near the endpoints
it is replaced by linear extensions anchored at the seams, with the extension
slope clamped to be non-increasing. The result is truncated at zero and
rescaled to unit mass. Kernel admissibility is checked at two levels:
"pointwise" suffices for pointwise bootstrap limits, "l1" adds the moment and
smoothness conditions the L1 theory needs.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .density import Sample, _as_array, _ret
from .integrate import adaptive_simpson, integrate_piecewise

__all__ = [
    "Kernel",
    "EPANECHNIKOV",
    "BIWEIGHT",
    "kernel_by_name",
    "ConditionReport",
    "check_kernel_conditions",
    "kernel_satisfies",
    "BandwidthRule",
    "DEFAULT_POINTWISE_RULE",
    "DEFAULT_L1_RULE",
    "SmoothedDensity",
    "fit_smoothed",
    "DegenerateEstimateError",
]


class DegenerateEstimateError(RuntimeError):
    """The positive part of the raw estimate carries (numerically) no mass."""


class Kernel:
    """Compactly supported smoothing kernel on [-1, 1].

    ``profiles`` holds the kernel and its derivatives inside the support;
    outside [-1, 1] every evaluator returns exactly 0. ``moments`` may carry
    analytically known integrals, consumed by :func:`check_kernel_conditions`
    in place of quadrature. Recognized keys: ``mass``, ``first_moment``,
    ``deriv_mass``, ``deriv_first_moment``, ``dderiv_mass``,
    ``dderiv_first_moment``.
    """

    def __init__(self, name, profile, dprofile, d2profile, d3profile=None,
                 moments=None):
        self.name = name
        self._profiles = (profile, dprofile, d2profile, d3profile)
        self.moments = dict(moments or {})
        self._condition_cache = {}

    def deriv(self, v, order):
        """Kernel derivative of the given order, zero outside the support."""
        if not 0 <= order <= 3:
            raise ValueError("order must be 0, 1, 2 or 3")
        fn = self._profiles[order]
        if fn is None:
            raise ValueError("kernel %s has no derivative of order %d" % (self.name, order))
        arr, scalar = _as_array(v)
        inside = np.abs(arr) <= 1.0
        out = np.where(inside, fn(arr), 0.0)
        return _ret(out, scalar)

    def __call__(self, v):
        return self.deriv(v, 0)

    def __repr__(self):
        return "Kernel(%r)" % self.name


EPANECHNIKOV = Kernel(
    "epanechnikov",
    profile=lambda v: 0.75 * (1.0 - v * v),
    dprofile=lambda v: -1.5 * v,
    d2profile=lambda v: np.full_like(v, -1.5),
    d3profile=lambda v: np.zeros_like(v),
    moments={
        "mass": 1.0,
        "first_moment": 0.0,
        "deriv_mass": 0.0,
        "deriv_first_moment": -1.0,
        "dderiv_mass": -3.0,
        "dderiv_first_moment": 0.0,
    },
)

BIWEIGHT = Kernel(
    "biweight",
    profile=lambda v: (15.0 / 16.0) * (1.0 - v * v) ** 2,
    dprofile=lambda v: -(15.0 / 4.0) * v * (1.0 - v * v),
    d2profile=lambda v: -(15.0 / 4.0) * (1.0 - 3.0 * v * v),
    d3profile=lambda v: (45.0 / 2.0) * v,
    moments={
        "mass": 1.0,
        "first_moment": 0.0,
        "deriv_mass": 0.0,
        "deriv_first_moment": -1.0,
        "dderiv_mass": 0.0,
        "dderiv_first_moment": 0.0,
    },
)

_KERNELS = {k.name: k for k in (EPANECHNIKOV, BIWEIGHT)}


def kernel_by_name(name):
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(
            "unknown kernel %r (available: %s)" % (name, ", ".join(sorted(_KERNELS)))
        ) from None


@dataclass(frozen=True)
class ConditionReport:
    """One admissibility condition: name, pass flag, numeric residual."""

    name: str
    passed: bool
    residual: float


def _kernel_moment(kernel, key, order, power, quad_tol=1e-10):
    if key in kernel.moments:
        return float(kernel.moments[key])

    def integrand(v):
        vals = kernel.deriv(v, order)
        return vals * v ** power if power else vals

    return adaptive_simpson(integrand, -1.0, 1.0, tol=quad_tol)


def check_kernel_conditions(kernel, level="pointwise", tol=1e-6):
    """Admissibility report for a kernel at the requested level.

    ``level="pointwise"`` checks the support/positivity/boundedness and
    first-derivative moment conditions that the pointwise bootstrap limit
    needs; ``level="l1"`` additionally checks the zero first moment and the
    second-derivative moment/smoothness conditions of the L1 theory.

    Returns a list of :class:`ConditionReport`; each residual is the amount
    by which the condition is missed (0 when met exactly).
    """
    if level not in ("pointwise", "l1"):
        raise ValueError("level must be 'pointwise' or 'l1'")
    closed = np.linspace(-1.0, 1.0, 100001)
    interior = closed[1:-1]
    outside = np.concatenate([-1.0 - np.geomspace(1e-9, 1.0, 1000),
                              1.0 + np.geomspace(1e-9, 1.0, 1000)])
    reports = []

    def add(name, residual, passed=None):
        residual = float(residual)
        if passed is None:
            passed = np.isfinite(residual) and residual <= tol
        reports.append(ConditionReport(name, bool(passed), residual))

    k0 = kernel.deriv(closed, 0)
    k1 = kernel.deriv(closed, 1)
    add("compact_support", np.max(np.abs(kernel.deriv(outside, 0))))
    add("nonnegative", max(0.0, -float(np.min(k0))))
    bound = float(np.max(np.abs(k0)))
    add("bounded", bound, passed=np.isfinite(bound))
    add("unit_mass", abs(_kernel_moment(kernel, "mass", 0, 0) - 1.0))
    dbound = float(np.max(np.abs(k1)))
    add("deriv_bounded", dbound, passed=np.isfinite(dbound))
    add("deriv_nonincreasing_sign", max(0.0, float(np.max(closed * k1))))
    add("deriv_mass_zero", abs(_kernel_moment(kernel, "deriv_mass", 1, 0)))
    add("deriv_first_moment", abs(_kernel_moment(kernel, "deriv_first_moment", 1, 1) + 1.0))
    if level == "l1":
        add("first_moment_zero", abs(_kernel_moment(kernel, "first_moment", 0, 1)))
        add("dderiv_mass_zero", abs(_kernel_moment(kernel, "dderiv_mass", 2, 0)))
        add("dderiv_first_moment_zero",
            abs(_kernel_moment(kernel, "dderiv_first_moment", 2, 1)))
        # third derivative bounded on the open support
        try:
            d3 = np.abs(kernel.deriv(interior, 3))
        except ValueError:
            k2 = kernel.deriv(interior, 2)
            d3 = np.abs(np.diff(k2) / np.diff(interior))
        d3bound = float(np.max(d3))
        add("dderiv_slope_bounded", d3bound, passed=np.isfinite(d3bound))
    return reports


def kernel_satisfies(kernel, level="pointwise", tol=1e-6):
    """True when every condition at ``level`` passes (result cached)."""
    key = (level, tol)
    cached = kernel._condition_cache.get(key)
    if cached is None:
        cached = all(r.passed for r in check_kernel_conditions(kernel, level, tol))
        kernel._condition_cache[key] = cached
    return cached


_REGIMES = {"pointwise": (0.0, 1.0 / 3.0), "l1": (1.0 / 6.0, 0.2)}


@dataclass(frozen=True)
class BandwidthRule:
    """Bandwidth h = scale * n^(-alpha), clamped to (0, 1/2].

    The admissible exponent range depends on the regime: pointwise limits
    need alpha in (0, 1/3), the L1 limit needs alpha in (1/6, 1/5).
    """

    alpha: float
    scale: float = 1.0
    regime: str = "pointwise"

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError("regime must be one of %s" % sorted(_REGIMES))
        lo, hi = _REGIMES[self.regime]
        if not lo < self.alpha < hi:
            raise ValueError(
                "alpha=%r outside the open interval (%g, %g) for the %s regime"
                % (self.alpha, lo, hi, self.regime)
            )
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    def bandwidth(self, n):
        if n < 1:
            raise ValueError("n must be at least 1")
        return float(min(self.scale * n ** (-self.alpha), 0.5))


DEFAULT_POINTWISE_RULE = BandwidthRule(alpha=0.30, scale=1.0, regime="pointwise")
DEFAULT_L1_RULE = BandwidthRule(alpha=0.18, scale=1.0, regime="l1")


class SmoothedDensity:
    """Kernel density estimate with linear boundary extensions, truncated at
    zero and rescaled to unit mass.

    Construction is eager: seam anchors, extension slopes, any sign crossing,
    and the normalizer are computed once; evaluation afterwards is pure.

    Attributes
    ----------
    sample : Sample
    kernel : Kernel
    h : float
        Bandwidth in (0, 1/2].
    normalizer : float
        Mass of the truncated extended estimate (the rescaling divisor).
    """

    def __init__(self, sample, kernel, h, rule=None):
        if not isinstance(sample, Sample):
            sample = Sample(sample)
        h = float(h)
        if not 0.0 < h <= 0.5:
            raise ValueError("bandwidth must lie in (0, 1/2]")
        self.sample = sample
        self.kernel = kernel
        self.h = h
        self.rule = rule
        self._lo = h
        self._hi = 1.0 - h

        seam = self._sums(np.array([self._lo, self._hi]), 0)
        dseam = self._sums(np.array([self._lo, self._hi]), 1)
        self._f_lo = float(seam[0])
        self._f_hi = float(seam[1])
        # non-increasing extensions: positive seam slopes are clamped to 0
        self._s_lo = min(float(dseam[0]), 0.0)
        self._s_hi = min(float(dseam[1]), 0.0)

        # right extension f_hi + (t - (1-h)) s_hi can cross zero; the left one
        # cannot (slope <= 0 walking right means it only grows toward 0), and
        # the interior is nonnegative for admissible kernels
        self._cross = None
        if self._f_hi + h * self._s_hi < 0.0 and self._s_hi < 0.0:
            self._cross = self._hi - self._f_hi / self._s_hi

        interior_breaks = self._interior_sign_breaks()
        self.normalizer = self._positive_mass(interior_breaks)
        if not np.isfinite(self.normalizer) or self.normalizer <= 1e-12:
            raise DegenerateEstimateError(
                "truncated kernel estimate has mass %r" % self.normalizer
            )
        pieces = [0.0, self._lo, self._hi, 1.0] + list(interior_breaks)
        if self._cross is not None:
            pieces.append(self._cross)
        self.quad_breakpoints = np.unique(np.asarray(pieces))
        self._cdf_table = None

    # -- raw kernel sums ---------------------------------------------------

    def _sums(self, t, order):
        """(1/(n h^(order+1))) sum K^(order)((t - X_i)/h) for 1-d t."""
        x = self.sample.values
        h = self.h
        srt = np.argsort(t, kind="stable")
        ts = t[srt]
        res = np.empty(ts.size)
        block = 256
        for start in range(0, ts.size, block):
            tb = ts[start:start + block]
            lo = np.searchsorted(x, tb[0] - h, side="left")
            hi = np.searchsorted(x, tb[-1] + h, side="right")
            if hi == lo:
                res[start:start + tb.size] = 0.0
                continue
            v = (tb[:, None] - x[lo:hi][None, :]) / h
            res[start:start + tb.size] = self.kernel.deriv(v, order).sum(axis=1)
        out = np.empty(ts.size)
        out[srt] = res
        return out / (self.sample.n * h ** (order + 1))

    def raw(self, t, order=0):
        """Interior kernel estimate (or its derivatives) on [h, 1-h] only."""
        arr, scalar = _as_array(t)
        if np.any(arr < self._lo) or np.any(arr > self._hi):
            raise ValueError("raw estimate is only defined on [h, 1-h]")
        return _ret(self._sums(arr, order), scalar)

    # -- extension and normalization ----------------------------------------

    def extended(self, t, order=0):
        """Raw estimate glued to its linear boundary extensions, on [0, 1].

        ``order`` 0/1/2 gives the value and first two derivatives; on the
        extension pieces the derivative is the clamped seam slope and the
        second derivative is 0.
        """
        arr, scalar = _as_array(t)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("evaluation point outside [0, 1]")
        out = np.empty(arr.shape)
        left = arr < self._lo
        right = arr > self._hi
        mid = ~(left | right)
        if mid.any():
            out[mid] = self._sums(arr[mid], order)
        if order == 0:
            out[left] = self._f_lo + (arr[left] - self._lo) * self._s_lo
            out[right] = self._f_hi + (arr[right] - self._hi) * self._s_hi
        elif order == 1:
            out[left] = self._s_lo
            out[right] = self._s_hi
        else:
            out[left] = 0.0
            out[right] = 0.0
        return _ret(out, scalar)

    def _interior_sign_breaks(self):
        """Zero crossings of the raw estimate inside (h, 1-h).

        Nonnegative kernels cannot produce any; signed kernels are handled by
        a grid scan refined with bisection.
        """
        if self._hi <= self._lo:
            return []
        grid = np.linspace(self._lo, self._hi, 2049)
        vals = self._sums(grid, 0)
        if np.all(vals >= 0.0):
            return []
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        breaks = []
        for i in sign_change:
            a, b = grid[i], grid[i + 1]
            fa = vals[i]
            for _ in range(60):
                m = 0.5 * (a + b)
                fm = self._sums(np.array([m]), 0)[0]
                if b - a < 1e-12:
                    break
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            breaks.append(0.5 * (a + b))
        return breaks

    def _positive_mass(self, interior_breaks):
        h = self.h
        # left extension piece is nonnegative, closed form
        mass = h * self._f_lo - 0.5 * h * h * self._s_lo
        # right extension piece, truncated at its crossing if any
        if self._cross is None:
            mass += h * self._f_hi + 0.5 * h * h * self._s_hi
        else:
            u = self._cross - self._hi
            mass += u * self._f_hi + 0.5 * u * u * self._s_hi
        if self._hi > self._lo:
            pieces = np.unique(np.asarray([self._lo] + list(interior_breaks) + [self._hi]))

            def positive_part(t):
                return np.maximum(self._sums(t, 0), 0.0)

            mass += integrate_piecewise(positive_part, pieces, tol=1e-10)
        return float(mass)

    # -- normalized density --------------------------------------------------

    def pdf(self, t):
        """Normalized density: positive part of the extension over its mass."""
        arr, scalar = _as_array(t)
        vals = np.maximum(np.asarray(self.extended(arr, 0)), 0.0) / self.normalizer
        return _ret(vals, scalar)

    def __call__(self, t):
        return self.pdf(t)

    def dpdf(self, t):
        """Derivative of the normalized density; 0 where truncation is active."""
        arr, scalar = _as_array(t)
        base = np.asarray(self.extended(arr, 0))
        slope = np.asarray(self.extended(arr, 1))
        vals = np.where(base > 0.0, slope / self.normalizer, 0.0)
        return _ret(vals, scalar)

    def d2pdf(self, t):
        """Second derivative; requires a kernel passing the l1-level checks."""
        if not kernel_satisfies(self.kernel, "l1"):
            raise ValueError(
                "kernel %s fails the l1-level smoothness conditions; "
                "second derivatives are not trustworthy" % self.kernel.name
            )
        arr, scalar = _as_array(t)
        base = np.asarray(self.extended(arr, 0))
        curv = np.asarray(self.extended(arr, 2))
        vals = np.where(base > 0.0, curv / self.normalizer, 0.0)
        return _ret(vals, scalar)

    def cdf(self, t):
        """Distribution function of the normalized density (tabulated once)."""
        if self._cdf_table is None:
            xs = [np.linspace(a, b, 2049) for a, b in
                  zip(self.quad_breakpoints[:-1], self.quad_breakpoints[1:]) if b > a]
            grid = np.unique(np.concatenate(xs))
            ys = self.pdf(grid)
            cum = cumulative_trapezoid(ys, grid, initial=0.0)
            # kill the residual quadrature drift so cdf(1) == 1 exactly
            cum /= cum[-1]
            self._cdf_table = (grid, cum)
        grid, cum = self._cdf_table
        arr, scalar = _as_array(t)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("evaluation point outside [0, 1]")
        return _ret(np.interp(arr, grid, cum), scalar)

    def __repr__(self):
        return "SmoothedDensity(n=%d, kernel=%s, h=%g)" % (
            self.sample.n, self.kernel.name, self.h)


def fit_smoothed(sample, kernel=BIWEIGHT, rule=DEFAULT_L1_RULE):
    """Fit the boundary-corrected kernel estimate with a bandwidth rule."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    return SmoothedDensity(sample, kernel, rule.bandwidth(sample.n), rule=rule)
