"""Rotationally symmetric metrics, conformal charts, and isoperimetric data.

A rotationally symmetric surface is described in geodesic polar coordinates
by a warp function f, with metric dr^2 + f(r)^2 dtheta^2.  Geodesic circles
about the pole have length 2*pi*f(r), geodesic disks have area
2*pi*int_0^r f(s) ds, and the Gauss curvature is -f''(r)/f(r).  Smoothness
at the pole requires f(0) = 0 and f'(0) = 1.

A planar domain can instead carry a conformal metric e^{2*phi} (dx^2+dy^2).
Area and length elements pick up weights e^{2*phi} and e^{phi}; the 2D
Dirichlet integral is conformally invariant and carries no weight at all.

The isoperimetric constant tau = inf (boundary length)^2 / area enters the
rigidity inequalities as an input.  It is represented by :class:`TauValue`,
which records where the number came from; a geodesic-circle scan provides a
cheap upper bound but is never silently substituted for an exact value.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import DomainError

_POLE_PROBE = 1e-8
_POLE_TOL = 1e-4  # loose enough for spline end-derivative error on tables
_FD_STEP = 1e-5
_MONOTONE_RTOL = 1e-9
_BOUND_SLACK = 1e-9

TAU_FLAT = 4.0 * math.pi

_PROVENANCES = ("exact-flat", "exact-analytic", "circle-upper-bound", "user-supplied")


@dataclasses.dataclass(frozen=True)
class TauValue:
    """Isoperimetric constant together with the provenance of the number."""

    value: float
    provenance: str

    def __post_init__(self):
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"unknown tau provenance {self.provenance!r}")
        if not np.isfinite(self.value) or self.value < 0.0:
            raise ValueError(f"tau must be finite and nonnegative, got {self.value}")
        if self.provenance == "exact-flat" and abs(self.value - TAU_FLAT) > 1e-12:
            raise ValueError("exact-flat provenance requires the value 4*pi")


def flat_tau() -> TauValue:
    return TauValue(TAU_FLAT, "exact-flat")


def cone_tau(beta: float) -> TauValue:
    """Isoperimetric constant 4*pi*beta of a cone of total apex angle 2*pi*beta."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"cone aperture fraction must lie in (0, 1), got {beta}")
    return TauValue(4.0 * math.pi * beta, "exact-analytic")


@dataclasses.dataclass(frozen=True)
class RadialMetric:
    """Warped-product metric dr^2 + f(r)^2 dtheta^2 on a geodesic disk.

    ``warp`` must accept scalars or numpy arrays.  ``dwarp``/``d2warp`` are
    optional analytic derivatives; when absent, central differences with a
    fixed step of 1e-5 are used (the intended path for tabulated warps).
    The pole condition f(0)=0, f'(0)=1 is checked numerically at r=1e-8,
    and f must stay positive on (0, r_max].
    """

    warp: object
    r_max: float
    name: str = "custom"
    dwarp: object = None
    d2warp: object = None

    def __post_init__(self):
        if not np.isfinite(self.r_max) or self.r_max <= 0.0:
            raise ValueError(f"r_max must be positive and finite, got {self.r_max}")
        probe = float(self.warp(_POLE_PROBE))
        if abs(probe / _POLE_PROBE - 1.0) > _POLE_TOL:
            raise ValueError(
                f"warp violates the pole condition f(0)=0, f'(0)=1: "
                f"f({_POLE_PROBE:g}) = {probe:g}"
            )
        sample = np.linspace(self.r_max / 256.0, self.r_max, 256)
        fs = np.asarray(self.warp(sample), dtype=float)
        if not np.all(np.isfinite(fs)) or np.any(fs <= 0.0):
            raise ValueError("warp must be positive and finite on (0, r_max]")

    def f(self, r):
        return np.asarray(self.warp(r), dtype=float)

    def df(self, r):
        if self.dwarp is not None:
            return np.asarray(self.dwarp(r), dtype=float)
        r = np.asarray(r, dtype=float)
        return (self.f(r + _FD_STEP) - self.f(r - _FD_STEP)) / (2.0 * _FD_STEP)

    def d2f(self, r):
        if self.d2warp is not None:
            return np.asarray(self.d2warp(r), dtype=float)
        r = np.asarray(r, dtype=float)
        return (self.f(r + _FD_STEP) - 2.0 * self.f(r) + self.f(r - _FD_STEP)) / _FD_STEP**2


def _check_radius(metric: RadialMetric, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0) or np.any(r > metric.r_max):
        raise DomainError(
            f"radius must lie in (0, {metric.r_max:g}] for metric {metric.name!r}"
        )
    return r


def gauss_curvature(metric: RadialMetric, r):
    """Gauss curvature -f''(r)/f(r) at radius r."""
    r = _check_radius(metric, r)
    return -metric.d2f(r) / metric.f(r)


def circle_length(metric: RadialMetric, r):
    """Length 2*pi*f(r) of the geodesic circle of radius r."""
    r = _check_radius(metric, r)
    return 2.0 * math.pi * metric.f(r)


def disk_area(metric: RadialMetric, r) -> float:
    """Area 2*pi*int_0^r f of the geodesic disk, by adaptive quadrature."""
    r = _check_radius(metric, r)
    if r.ndim > 0:
        return np.array([disk_area(metric, ri) for ri in r])
    val, _ = quad(lambda s: float(metric.warp(s)), 0.0, float(r),
                  epsabs=1e-14, epsrel=1e-10, limit=200)
    return 2.0 * math.pi * val


@dataclasses.dataclass(frozen=True)
class BishopGromovReport:
    monotone_ok: bool
    bound_ok: bool
    worst_violation: float


def _check_grid(metric: RadialMetric, r_grid) -> np.ndarray:
    grid = np.asarray(r_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("radius grid must be a nonempty 1-d sequence")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("radius grid must be strictly increasing")
    _check_radius(metric, grid)
    return grid


def bishop_gromov_check(metric: RadialMetric, r_grid) -> BishopGromovReport:
    """Comparison-geometry sanity check on a radius grid.

    Under nonnegative curvature, f(r)/r is nonincreasing and f(r) <= r
    (so geodesic circles are no longer than flat ones).  ``worst_violation``
    is the largest raw violation of either property, 0 when both hold.
    """
    grid = _check_grid(metric, r_grid)
    ratios = metric.f(grid) / grid
    increases = np.diff(ratios)
    mono_viol = increases - _MONOTONE_RTOL * np.abs(ratios[:-1])
    monotone_ok = bool(np.all(mono_viol <= 0.0))
    excess = metric.f(grid) - grid
    bound_ok = bool(np.all(excess <= _BOUND_SLACK))
    worst = 0.0
    if increases.size:
        worst = max(worst, float(np.max(increases)))
    worst = max(worst, float(np.max(excess)))
    return BishopGromovReport(monotone_ok, bound_ok, max(0.0, worst))


def tau_circle_upper_bound(metric: RadialMetric, r_grid) -> TauValue:
    """Upper bound for tau from geodesic circles: min over the grid of L(r)^2/A(r)."""
    grid = _check_grid(metric, r_grid)
    best = math.inf
    for r in grid:
        L = float(circle_length(metric, r))
        A = disk_area(metric, r)
        best = min(best, L * L / A)
    return TauValue(best, "circle-upper-bound")


def flat_metric(r_max: float = 64.0) -> RadialMetric:
    return RadialMetric(
        warp=lambda r: np.asarray(r, dtype=float),
        dwarp=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        d2warp=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        r_max=r_max,
        name="flat",
    )


def sphere_metric(r_max: float = math.pi - 1e-3) -> RadialMetric:
    return RadialMetric(warp=np.sin, dwarp=np.cos,
                        d2warp=lambda r: -np.sin(r), r_max=r_max, name="sphere")


def hyperbolic_metric(r_max: float = 16.0) -> RadialMetric:
    return RadialMetric(warp=np.sinh, dwarp=np.cosh, d2warp=np.sinh,
                        r_max=r_max, name="hyperbolic")


def cone_metric(beta: float, eps: float = 0.05, r_max: float = 64.0) -> RadialMetric:
    """Cone of apex angle 2*pi*beta with a Gaussian-smoothed tip.

    f(r) = r*(beta + (1-beta)*exp(-(r/eps)^2)) keeps f'(0)=1 and leaves the
    exact cone untouched once r is a few multiples of eps; the smoothing
    collar itself carries a positive curvature spike (and a compensating
    negative dip on its outer shoulder), so curvature-based checks should
    sample outside it.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"cone aperture fraction must lie in (0, 1), got {beta}")
    if eps <= 0.0:
        raise ValueError(f"smoothing width must be positive, got {eps}")
    b, e = float(beta), float(eps)

    def warp(r):
        r = np.asarray(r, dtype=float)
        return r * (b + (1.0 - b) * np.exp(-((r / e) ** 2)))

    def dwarp(r):
        r = np.asarray(r, dtype=float)
        g = np.exp(-((r / e) ** 2))
        return b + (1.0 - b) * g * (1.0 - 2.0 * r**2 / e**2)

    def d2warp(r):
        r = np.asarray(r, dtype=float)
        g = np.exp(-((r / e) ** 2))
        return (1.0 - b) * g * (2.0 * r / e**2) * (2.0 * r**2 / e**2 - 3.0)

    name = f"cone:{beta:g}" if eps == 0.05 else f"cone:{beta:g}:{eps:g}"
    return RadialMetric(warp=warp, dwarp=dwarp, d2warp=d2warp, r_max=r_max, name=name)


def user_metric(path: str) -> RadialMetric:
    """Metric from a two-column table of r, f(r) samples, cubic-spline interpolated.

    Derivatives fall back to central differences, matching the generic
    tabulated-warp path.  The first row should be (0, 0).
    """
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 4:
        raise ValueError(f"warp table {path!r} must have two columns and >= 4 rows")
    r, f = data[:, 0], data[:, 1]
    if np.any(np.diff(r) <= 0.0):
        raise ValueError(f"warp table {path!r} must have strictly increasing radii")
    spline = CubicSpline(r, f)
    return RadialMetric(warp=spline, r_max=float(r[-1]), name=f"user:{path}")


def metric_from_spec(spec: str) -> RadialMetric:
    """Build a metric from a registry string.

    Accepted forms: ``flat``, ``cone:<beta>``, ``cone:<beta>:<eps>``,
    ``sphere``, ``hyperbolic``, ``user:<file>``.
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind == "flat" and len(parts) == 1:
        return flat_metric()
    if kind == "sphere" and len(parts) == 1:
        return sphere_metric()
    if kind == "hyperbolic" and len(parts) == 1:
        return hyperbolic_metric()
    if kind == "cone" and len(parts) in (2, 3):
        beta = float(parts[1])
        eps = float(parts[2]) if len(parts) == 3 else 0.05
        return cone_metric(beta, eps)
    if kind == "user" and len(parts) >= 2:
        return user_metric(spec.split(":", 1)[1])
    raise ValueError(f"unrecognized metric spec {spec!r}")


@dataclasses.dataclass(frozen=True)
class ConformalChart:
    """Planar chart carrying the metric e^{2*phi} (dx^2 + dy^2).

    ``log_factor`` maps coordinate arrays (x, y) to phi.  ``domain_bound``
    optionally records a radius about the origin within which the chart is
    valid; None means the whole plane.
    """

    log_factor: object
    domain_bound: float | None = None
    name: str = "chart"

    def weight_values(self, points) -> np.ndarray:
        """Area weight e^{2*phi} at an (n, 2) array of points."""
        pts = np.asarray(points, dtype=float)
        if self.domain_bound is not None:
            rad = np.hypot(pts[:, 0], pts[:, 1])
            if np.any(rad >= self.domain_bound):
                raise DomainError(
                    f"points reach radius {rad.max():g}, outside chart bound "
                    f"{self.domain_bound:g}"
                )
        phi = np.asarray(self.log_factor(pts[:, 0], pts[:, 1]), dtype=float)
        w = np.exp(2.0 * phi)
        if not np.all(np.isfinite(w)):
            raise ValueError("chart weight is not finite on the given points")
        return w


def flat_chart() -> ConformalChart:
    return ConformalChart(log_factor=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
                          name="flat")
