"""Experiment harness: index paths, traced curves and inclusion/monotonicity checks.

A curve is the image of a one-parameter family of index vectors under a
geometric risk measure of one fixed sample.  Adjacent indices have
nearby minimizers, so tracing warm-starts every solve at the previous
solution.  On top of curve tracing this module builds the standard
checks: subadditivity region inclusion, univariate comparison,
expectile/value-at-risk magnitude matching, marginalization inclusion,
distance-from-mean profiles and the bounded-support stress test.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .copulas import ClaytonCopula
from .estimators import (
    SolverConfig,
    as_sample,
    geometric_expectile,
    geometric_var,
    univariate_expectile,
    univariate_quantile,
)

__all__ = [
    "CirclePath",
    "EllipsePath",
    "RayPath",
    "QuarterCirclePath",
    "IndexPath",
    "Curve",
    "trace_curve",
    "point_in_polygon",
    "SubadditivityResult",
    "subadditivity_sets",
    "ComparisonRow",
    "compare_univariate",
    "match_magnitude",
    "MarginalizationResult",
    "marginalization_curves",
    "DistanceCurve",
    "distance_curve",
    "BoundedSupportRow",
    "bounded_support_check",
    "DEFAULT_STRESS_RADII",
]

_MEASURES = ("expectile", "var")

# stress-test radii, increasingly close to the unit sphere
DEFAULT_STRESS_RADII = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.9995, 0.9999, 0.99999)


@dataclass(frozen=True)
class CirclePath:
    """Indices r (cos phi, sin phi) over a full turn of n_phi equispaced angles."""

    radius: float
    n_phi: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.radius < 1.0):
            raise ValueError("CirclePath requires 0 < radius < 1")
        if int(self.n_phi) < 1:
            raise ValueError("CirclePath requires n_phi >= 1")

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        phi = 2.0 * np.pi * np.arange(int(self.n_phi)) / int(self.n_phi)
        idx = self.radius * np.column_stack([np.cos(phi), np.sin(phi)])
        return phi, idx


@dataclass(frozen=True)
class EllipsePath:
    """Indices (r1 cos phi, r2 sin phi) over a full turn of n_phi angles."""

    r1: float
    r2: float
    n_phi: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.r1 < 1.0 and 0.0 < self.r2 < 1.0):
            raise ValueError("EllipsePath requires radii in (0, 1)")
        if int(self.n_phi) < 1:
            raise ValueError("EllipsePath requires n_phi >= 1")

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        phi = 2.0 * np.pi * np.arange(int(self.n_phi)) / int(self.n_phi)
        idx = np.column_stack([self.r1 * np.cos(phi), self.r2 * np.sin(phi)])
        return phi, idx


@dataclass(frozen=True)
class QuarterCirclePath:
    """Indices r (cos phi, sin phi) for phi on [0, pi/2] inclusive."""

    radius: float
    n_phi: int = 8

    def __post_init__(self) -> None:
        if not (0.0 < self.radius < 1.0):
            raise ValueError("QuarterCirclePath requires 0 < radius < 1")
        if int(self.n_phi) < 2:
            raise ValueError("QuarterCirclePath requires n_phi >= 2")

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        phi = np.linspace(0.0, 0.5 * np.pi, int(self.n_phi))
        idx = self.radius * np.column_stack([np.cos(phi), np.sin(phi)])
        return phi, idx


@dataclass(frozen=True, eq=False)
class RayPath:
    """Indices m * direction for increasing magnitudes m in [0, 1)."""

    direction: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.direction, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        if d.ndim != 1 or d.size == 0 or not np.all(np.isfinite(d)):
            raise ValueError("direction must be a finite 1-D vector")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        if m.ndim != 1 or m.size == 0 or not np.all(np.isfinite(m)):
            raise ValueError("magnitudes must be a finite 1-D array")
        if np.any(m < 0.0) or np.any(m >= 1.0):
            raise ValueError("magnitudes must lie in [0, 1)")
        if m.size > 1 and np.any(np.diff(m) <= 0.0):
            raise ValueError("magnitudes must be strictly increasing")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "magnitudes", m)

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        return self.magnitudes.copy(), self.magnitudes[:, np.newaxis] * self.direction


IndexPath = Union[CirclePath, EllipsePath, QuarterCirclePath, RayPath]


@dataclass(frozen=True, eq=False)
class Curve:
    """Traced risk-measure curve: parameter grid, points and per-point convergence."""

    params: np.ndarray
    points: np.ndarray
    converged: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.params, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        conv = np.asarray(self.converged, dtype=bool)
        if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
            raise ValueError("params must be a finite 1-D array")
        if p.size > 1 and np.any(np.diff(p) <= 0.0):
            raise ValueError("params must be strictly increasing")
        if pts.ndim != 2 or pts.shape[0] != p.size or not np.all(np.isfinite(pts)):
            raise ValueError("points must be a finite (k, d) array matching params")
        if conv.shape != (p.size,):
            raise ValueError("converged must be a boolean array matching params")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "converged", conv)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def _check_measure(measure: str) -> None:
    if measure not in _MEASURES:
        raise ValueError(f"measure must be one of {_MEASURES}")


def _trace_indices(sample, params, indices, measure: str, config: SolverConfig | None) -> Curve:
    s = as_sample(sample)
    solver = geometric_expectile if measure == "expectile" else geometric_var
    cfg = config if config is not None else SolverConfig()
    points = np.empty((len(params), s.shape[1]))
    converged = np.empty(len(params), dtype=bool)
    prev = cfg.initial_point
    for i, alpha in enumerate(indices):
        report = solver(s, alpha, dataclasses.replace(cfg, initial_point=prev))
        points[i] = report.argmin
        converged[i] = report.converged
        prev = report.argmin
    return Curve(params=np.asarray(params, dtype=float), points=points, converged=converged)


def trace_curve(
    sample, path: IndexPath, measure: str = "expectile", config: SolverConfig | None = None
) -> Curve:
    """Solve the risk measure along ``path``, warm-starting successive solves.

    ``measure`` is ``"expectile"`` or ``"var"``.  The first solve starts
    at ``config.initial_point`` (sample mean when None); every later
    solve starts at the previous minimizer.
    """
    _check_measure(measure)
    if not isinstance(path, (CirclePath, EllipsePath, QuarterCirclePath, RayPath)):
        raise ValueError(f"unknown path type: {type(path).__name__}")
    s = as_sample(sample)
    params, idx = path.indices()
    if idx.shape[1] != s.shape[1]:
        raise ValueError("path index dimension must match the sample dimension")
    return _trace_indices(s, params, idx, measure, config)


def point_in_polygon(point, vertices, boundary_tol: float = 1e-9) -> bool:
    """Even-odd (ray casting) test of ``point`` against a closed polygon.

    ``vertices`` is a (k, 2) array of polygon corners in order; the edge
    from the last vertex back to the first is implicit.  Points within
    ``boundary_tol`` of any edge count as inside.
    """
    p = np.asarray(point, dtype=float)
    v = np.asarray(vertices, dtype=float)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise ValueError("point must be a finite 2-vector")
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3 or not np.all(np.isfinite(v)):
        raise ValueError("vertices must be a finite (k, 2) array with k >= 3")
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    tpar = np.einsum("ij,ij->i", p - a, ab) / np.where(denom == 0.0, 1.0, denom)
    nearest = a + np.clip(tpar, 0.0, 1.0)[:, np.newaxis] * ab
    if float(np.min(np.linalg.norm(p - nearest, axis=1))) <= boundary_tol:
        return True
    ya, yb = a[:, 1], b[:, 1]
    crosses = (ya > p[1]) != (yb > p[1])
    dy = np.where(crosses, yb - ya, 1.0)
    x_int = a[:, 0] + (p[1] - ya) / dy * (b[:, 0] - a[:, 0])
    return bool(np.count_nonzero(crosses & (p[0] < x_int)) % 2)


def _parallel_map(fn, items, threads: int):
    items = list(items)
    if int(threads) <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True, eq=False)
class SubadditivityResult:
    """Curves rho(X + Y) and rho(X) + rho(Y); ``included`` is None unless d = 2."""

    curve_sum: Curve
    curve_add: Curve
    included: bool | None


def subadditivity_sets(
    sample_x,
    sample_y,
    r: float,
    measure: str = "expectile",
    n_phi: int = 64,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> SubadditivityResult:
    """Compare the risk set of X + Y against the sum of the X and Y risk sets.

    Traces the measure of ``sample_x + sample_y`` and the pointwise sum
    of the separate traces over the circle of radius ``r``; for d = 2,
    ``included`` reports whether every point of the sum curve lies
    inside the polygon spanned by the added curve.
    """
    _check_measure(measure)
    sx = as_sample(sample_x)
    sy = as_sample(sample_y)
    if sx.shape != sy.shape:
        raise ValueError("sample_x and sample_y must have identical shapes (paired samples)")
    if sx.shape[1] == 2:
        path: IndexPath = CirclePath(r, n_phi)
        params, idx = path.indices()
    else:
        # circles are planar; for other d trace along the first two axes
        phi = 2.0 * np.pi * np.arange(int(n_phi)) / int(n_phi)
        idx = np.zeros((int(n_phi), sx.shape[1]))
        idx[:, 0] = r * np.cos(phi)
        idx[:, 1] = r * np.sin(phi)
        if not (0.0 < r < 1.0):
            raise ValueError("radius must lie in (0, 1)")
        params = phi
    tasks = (sx + sy, sx, sy)
    curves = _parallel_map(lambda s: _trace_indices(s, params, idx, measure, config), tasks, threads)
    curve_sum, curve_x, curve_y = curves
    curve_add = Curve(
        params=params,
        points=curve_x.points + curve_y.points,
        converged=curve_x.converged & curve_y.converged,
    )
    included: bool | None = None
    if sx.shape[1] == 2 and int(n_phi) >= 3:
        included = all(point_in_polygon(pt, curve_add.points) for pt in curve_sum.points)
    return SubadditivityResult(curve_sum=curve_sum, curve_add=curve_add, included=included)


@dataclass(frozen=True)
class ComparisonRow:
    """Geometric vs classical univariate measures of the first component."""

    level: float
    univariate_var: float
    univariate_expectile: float
    geometric_var_first: float
    geometric_expectile_first: float
    converged: bool


def compare_univariate(
    sample, levels, config: SolverConfig | None = None
) -> list[ComparisonRow]:
    """First components of the geometric measures at index (2l - 1, 0) against
    the classical quantile/expectile of the first margin, per level l."""
    s = as_sample(sample)
    if s.shape[1] != 2:
        raise ValueError("comparison requires a bivariate sample")
    lv = np.asarray(levels, dtype=float)
    if lv.ndim != 1 or lv.size == 0 or not np.all((lv > 0.0) & (lv < 1.0)):
        raise ValueError("levels must be a 1-D array with entries in (0, 1)")
    cfg = config if config is not None else SolverConfig()
    first = s[:, 0]
    rows: list[ComparisonRow] = []
    prev_exp = cfg.initial_point
    prev_var = cfg.initial_point
    for level in lv:
        alpha = np.array([2.0 * level - 1.0, 0.0])
        rep_exp = geometric_expectile(s, alpha, dataclasses.replace(cfg, initial_point=prev_exp))
        rep_var = geometric_var(s, alpha, dataclasses.replace(cfg, initial_point=prev_var))
        prev_exp = rep_exp.argmin
        prev_var = rep_var.argmin
        rows.append(
            ComparisonRow(
                level=float(level),
                univariate_var=univariate_quantile(first, level),
                univariate_expectile=univariate_expectile(first, level),
                geometric_var_first=float(rep_var.argmin[0]),
                geometric_expectile_first=float(rep_exp.argmin[0]),
                converged=bool(rep_exp.converged and rep_var.converged),
            )
        )
    return rows


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_section(fun, lo: float, hi: float, tol: float):
    """Golden-section minimization recording every evaluation (for diagnostics)."""
    trace: list[tuple[float, float]] = []

    def f(m: float) -> float:
        val = float(fun(m))
        if not np.isfinite(val):
            raise ValueError(f"search objective is not finite at m = {m}")
        trace.append((m, val))
        return val

    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = f(c)
    fd = f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi), trace


def match_magnitude(
    sample,
    direction,
    theta: float,
    config: SolverConfig | None = None,
    tol: float = 1e-6,
    return_trace: bool = False,
):
    """Magnitude m* for which the geometric value-at-risk at ``m* direction``
    is closest to the geometric expectile at ``theta * direction``.

    Minimizes the squared distance between the two minimizers by
    golden-section search on m in [0, 0.999]; the evaluation trace is
    returned alongside when ``return_trace`` is True so non-unimodal
    behavior is detectable.
    """
    s = as_sample(sample)
    d = np.asarray(direction, dtype=float)
    if d.shape != (s.shape[1],) or not np.all(np.isfinite(d)):
        raise ValueError("direction must be a finite vector matching the sample dimension")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    th = float(theta)
    if not (0.0 <= th < 1.0):
        raise ValueError("theta must lie in [0, 1)")
    cfg = config if config is not None else SolverConfig()
    target = geometric_expectile(s, th * d, cfg).argmin
    state = {"warm": cfg.initial_point, "all_converged": True}

    def gap(m: float) -> float:
        rep = geometric_var(s, m * d, dataclasses.replace(cfg, initial_point=state["warm"]))
        state["warm"] = rep.argmin
        state["all_converged"] = state["all_converged"] and rep.converged
        return float(np.sum((rep.argmin - target) ** 2))

    m_star, trace = _golden_section(gap, 0.0, 0.999, float(tol))
    if return_trace:
        return m_star, trace, bool(state["all_converged"])
    return m_star


@dataclass(frozen=True, eq=False)
class MarginalizationResult:
    """2-D marginal curve vs projections of full-model curves at 7 heights."""

    margin_curve: Curve
    full_curves: tuple[Curve, ...]
    inclusion_i4: bool


def marginalization_curves(
    sample,
    r: float,
    n_phi: int = 64,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> MarginalizationResult:
    """Marginal bivariate expectile curve against slices of the trivariate one.

    For a 3-D sample, traces the expectile curve of the first two
    components at radius ``r`` and, for i = 1..7, the full 3-D expectile
    over indices ``(r cos t, r sin t, z_i)`` with
    ``z_i = (-3/4 + (i-1)/4) sqrt(1 - r^2)`` (projected to the first two
    components).  ``inclusion_i4`` reports whether the marginal curve
    lies inside the polygon of the i = 4 (z = 0) projected curve.
    """
    s = as_sample(sample)
    if s.shape[1] != 3:
        raise ValueError("marginalization requires a trivariate sample")
    if not (0.0 < r < 1.0):
        raise ValueError("radius must lie in (0, 1)")
    if int(n_phi) < 3:
        raise ValueError("n_phi must be at least 3 (the curve spans a polygon)")
    phi = 2.0 * np.pi * np.arange(int(n_phi)) / int(n_phi)
    planar = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    heights = (np.arange(1, 8) - 4.0) / 4.0 * np.sqrt(1.0 - r * r)

    def trace_height(z: float) -> Curve:
        idx = np.column_stack([planar, np.full(phi.size, z)])
        full = _trace_indices(s, phi, idx, "expectile", config)
        return Curve(params=phi, points=full.points[:, :2], converged=full.converged)

    margin_curve = _trace_indices(s[:, :2], phi, planar, "expectile", config)
    full_curves = tuple(_parallel_map(trace_height, heights, threads))
    inclusion = all(point_in_polygon(pt, full_curves[3].points) for pt in margin_curve.points)
    return MarginalizationResult(
        margin_curve=margin_curve, full_curves=full_curves, inclusion_i4=inclusion
    )


@dataclass(frozen=True, eq=False)
class DistanceCurve:
    """Distances from the sample mean to expectiles along one direction."""

    radii: np.ndarray
    distances: np.ndarray
    converged: np.ndarray


def distance_curve(sample, direction, r_grid, config: SolverConfig | None = None) -> DistanceCurve:
    """Distance ``||e(r u) - mean||`` as a function of the index magnitude r.

    ``direction`` is a unit vector; ``r_grid`` is strictly increasing in
    [0, 1).  Solves are warm-started along the grid.
    """
    s = as_sample(sample)
    d = np.asarray(direction, dtype=float)
    if d.shape != (s.shape[1],) or not np.all(np.isfinite(d)):
        raise ValueError("direction must be a finite vector matching the sample dimension")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    grid = np.asarray(r_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("r_grid must be a finite 1-D array")
    if np.any(grid < 0.0) or np.any(grid >= 1.0):
        raise ValueError("r_grid values must lie in [0, 1)")
    if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
        raise ValueError("r_grid must be strictly increasing")
    cfg = config if config is not None else SolverConfig()
    mean = s.mean(axis=0)
    distances = np.empty(grid.size)
    converged = np.empty(grid.size, dtype=bool)
    prev = cfg.initial_point
    for i, r in enumerate(grid):
        rep = geometric_expectile(s, r * d, dataclasses.replace(cfg, initial_point=prev))
        distances[i] = float(np.linalg.norm(rep.argmin - mean))
        converged[i] = rep.converged
        prev = rep.argmin
    return DistanceCurve(radii=grid.copy(), distances=distances, converged=converged)


@dataclass(frozen=True)
class BoundedSupportRow:
    """One stress radius: did the traced curve exit the support box?"""

    r: float
    exits_support: bool
    all_converged: bool


def bounded_support_check(
    count: int,
    r_list=DEFAULT_STRESS_RADII,
    n_phi: int = 64,
    config: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
) -> list[BoundedSupportRow]:
    """Expectile curves of a Clayton(5) copula sample versus its [0,1]^2 support.

    Draws ``count`` bivariate Clayton(theta = 5) copula observations and
    traces the expectile circle curve at every radius in ``r_list``
    (increasing, warm-started across radii).  A row flags whether any
    curve point leaves the support box; for radii near 1 the curve must
    eventually exit, illustrating that geometric expectiles need not
    respect bounded supports.
    """
    if rng is None:
        raise ValueError("an explicit numpy Generator is required for reproducibility")
    radii = np.asarray(r_list, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0.0) or np.any(radii >= 1.0):
        raise ValueError("r_list must contain radii strictly between 0 and 1")
    if radii.size > 1 and np.any(np.diff(radii) <= 0.0):
        raise ValueError("r_list must be strictly increasing")
    sample = ClaytonCopula(5.0, 2).sample(int(count), rng)
    cfg = config if config is not None else SolverConfig()
    rows: list[BoundedSupportRow] = []
    prev = cfg.initial_point
    for r in radii:
        params, idx = CirclePath(float(r), n_phi).indices()
        curve = _trace_indices(
            sample, params, idx, "expectile", dataclasses.replace(cfg, initial_point=prev)
        )
        prev = curve.points[0]
        exits = bool(np.any((curve.points < 0.0) | (curve.points > 1.0)))
        rows.append(BoundedSupportRow(r=float(r), exits_support=exits, all_converged=curve.all_converged))
    return rows
