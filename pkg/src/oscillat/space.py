"""Finite metric measure spaces and their geometric parameter fits.

Two engines are supported.  A *point cloud* carries an explicit distance
matrix and one positive atomic weight per point.  A *weighted interval*
is an open interval (a, b) with a piecewise-constant density; the grid
points are evaluation/endpoint sites, but ball measures and function
means are exact closed-form integrals, not quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

POINT_CLOUD = "point-cloud"
INTERVAL_1D = "interval-1d"

# Metric axioms are checked up to this slack (float noise on sampled triples).
METRIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Ball:
    """A ball with a prescribed center and radius plus its resolved trace.

    In the interval engine the trace is the clipped open interval
    (lo, hi); members are the grid sites strictly inside it and
    ``measure`` is the exact density integral.  In the point-cloud
    engine members are the point ids at distance < radius from the
    center and ``measure`` is their weight sum.  ``intrinsic_radius``
    is half the diameter of the trace (1d: half the clipped length),
    which differs from the prescribed radius for clipped balls.
    """

    space: "Space"
    center: float
    radius: float
    measure: float
    intrinsic_radius: float
    lo: float = np.nan          # interval engine only
    hi: float = np.nan
    members: np.ndarray | None = None   # point-cloud engine only

    @property
    def member_ids(self) -> np.ndarray:
        if self.space.engine == POINT_CLOUD:
            return self.members
        g = self.space.grid
        i0 = np.searchsorted(g, self.lo, side="right")
        i1 = np.searchsorted(g, self.hi, side="left")
        return np.arange(i0, i1)

    def scaled(self, k: float) -> "Ball":
        """Ball with the same center and radius k * radius (re-resolved)."""
        return self.space.ball(self.center, k * self.radius)

    def effective_radius(self, convention: str) -> float:
        return self.radius if convention == "prescribed" else self.intrinsic_radius


@dataclass(frozen=True, eq=False)
class Space:
    engine: str
    # interval-1d fields
    a: float = np.nan
    b: float = np.nan
    dens_x: np.ndarray | None = None    # density breakpoints, dens_x[0]=a, dens_x[-1]=b
    dens_w: np.ndarray | None = None    # density value on (dens_x[j], dens_x[j+1])
    grid: np.ndarray | None = None      # sorted sites strictly inside (a, b)
    # point-cloud fields
    dists: np.ndarray | None = None
    weights: np.ndarray | None = None
    coords: np.ndarray | None = None
    # set on truncations of unbounded model spaces; blocks alpha > 0
    truncated_from_unbounded: bool = False

    # ---------------------------------------------------------------- builders

    @staticmethod
    def interval(a, b, density_breakpoints, density_values, grid,
                 truncated_from_unbounded=False) -> "Space":
        dx = np.asarray(density_breakpoints, dtype=float)
        dw = np.asarray(density_values, dtype=float)
        g = np.asarray(grid, dtype=float)
        if dx[0] != a or dx[-1] != b:
            dx = np.concatenate([[a], dx[(dx > a) & (dx < b)], [b]])
            if dw.size != dx.size - 1:
                raise ValueError("density breakpoints must span (a, b)")
        return Space(engine=INTERVAL_1D, a=float(a), b=float(b), dens_x=dx,
                     dens_w=dw, grid=g,
                     truncated_from_unbounded=truncated_from_unbounded)

    @staticmethod
    def uniform_interval(a, b, n, density_breakpoints=None, density_values=None,
                         extra_grid=(), truncated_from_unbounded=False) -> "Space":
        """Interval space with n-1 equispaced interior sites plus extras."""
        a, b = float(a), float(b)
        g = a + np.arange(1, n) * (b - a) / n
        extra = np.asarray(extra_grid, dtype=float)
        if extra.size:
            extra = extra[(extra > a) & (extra < b)]
            g = np.unique(np.concatenate([g, extra]))
        if density_breakpoints is None:
            dx, dw = np.array([a, b]), np.array([1.0])
        else:
            dx = np.asarray(density_breakpoints, dtype=float)
            dw = np.asarray(density_values, dtype=float)
        return Space.interval(a, b, dx, dw, g,
                              truncated_from_unbounded=truncated_from_unbounded)

    @staticmethod
    def point_cloud(weights, dists=None, coords=None) -> "Space":
        w = np.asarray(weights, dtype=float)
        if dists is None:
            if coords is None:
                raise ValueError("need dists or coords")
            c = np.atleast_2d(np.asarray(coords, dtype=float))
            if c.shape[0] != w.size:
                c = c.T
            diff = c[:, None, :] - c[None, :, :]
            dists = np.sqrt((diff ** 2).sum(-1))
        d = np.asarray(dists, dtype=float)
        c = None if coords is None else np.asarray(coords, dtype=float)
        return Space(engine=POINT_CLOUD, dists=d, weights=w, coords=c)

    # ---------------------------------------------------------------- basics

    @property
    def n_points(self) -> int:
        return self.grid.size if self.engine == INTERVAL_1D else self.weights.size

    @property
    def points(self) -> np.ndarray:
        """Site coordinates (1d) or point ids (cloud)."""
        if self.engine == INTERVAL_1D:
            return self.grid
        return np.arange(self.n_points)

    def diameter(self) -> float:
        if self.engine == INTERVAL_1D:
            return self.b - self.a
        return float(self.dists.max())

    @cached_property
    def total_mass(self) -> float:
        if self.engine == INTERVAL_1D:
            return float(self._dens_prefix[-1])
        return float(self.weights.sum())

    # -------------------------------------------------------- interval internals

    @cached_property
    def _dens_prefix(self) -> np.ndarray:
        seg = np.diff(self.dens_x) * self.dens_w
        return np.concatenate([[0.0], np.cumsum(seg)])

    def mass_between(self, lo, hi) -> np.ndarray:
        """Exact density integral over (lo, hi) ∩ (a, b); vectorized."""
        lo = np.clip(np.asarray(lo, dtype=float), self.a, self.b)
        hi = np.clip(np.asarray(hi, dtype=float), self.a, self.b)
        return self._mass_at(hi) - self._mass_at(lo)

    def _mass_at(self, x):
        idx = np.clip(np.searchsorted(self.dens_x, x, side="right") - 1,
                      0, self.dens_w.size - 1)
        return self._dens_prefix[idx] + self.dens_w[idx] * (x - self.dens_x[idx])

    def density_at(self, x) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.dens_x, x, side="right") - 1,
                      0, self.dens_w.size - 1)
        return self.dens_w[idx]

    @cached_property
    def endpoints(self) -> np.ndarray:
        """Candidate interval endpoints: the domain ends plus all grid sites."""
        return np.concatenate([[self.a], self.grid, [self.b]])

    @cached_property
    def point_masses(self) -> np.ndarray:
        """Per-site masses (1d: Voronoi cells; cloud: the weights)."""
        if self.engine == POINT_CLOUD:
            return self.weights
        g = self.grid
        mids = np.concatenate([[self.a], (g[1:] + g[:-1]) / 2.0, [self.b]])
        return self.mass_between(mids[:-1], mids[1:])

    # ---------------------------------------------------------------- balls

    def ball(self, center, radius) -> Ball:
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        if self.engine == INTERVAL_1D:
            c = float(center)
            if not (self.a < c < self.b):
                raise ValueError("ball center outside the interval")
            lo = max(c - radius, self.a)
            hi = min(c + radius, self.b)
            return Ball(space=self, center=c, radius=float(radius),
                        measure=float(self.mass_between(lo, hi)),
                        intrinsic_radius=(hi - lo) / 2.0, lo=lo, hi=hi)
        c = int(center)
        members = np.flatnonzero(self.dists[c] < radius)
        measure = float(self.weights[members].sum())
        if members.size:
            sub = self.dists[np.ix_(members, members)]
            intrinsic = float(sub.max()) / 2.0
        else:
            intrinsic = 0.0
        return Ball(space=self, center=c, radius=float(radius),
                    measure=measure, intrinsic_radius=intrinsic, members=members)

    def interval_ball(self, lo, hi) -> Ball:
        """Ball whose trace is the interval (lo, hi) ∩ (a, b)."""
        lo = max(float(lo), self.a)
        hi = min(float(hi), self.b)
        if hi <= lo:
            raise ValueError("empty interval")
        c, r = (lo + hi) / 2.0, (hi - lo) / 2.0
        return Ball(space=self, center=c, radius=r,
                    measure=float(self.mass_between(lo, hi)),
                    intrinsic_radius=r, lo=lo, hi=hi)


# ------------------------------------------------------------------ validation


@dataclass
class ValidationReport:
    usable: bool
    violations: list

    def __bool__(self):
        return self.usable


def validate_space(space: Space, max_triples: int = 200_000) -> ValidationReport:
    """Diagnostic check of the metric-measure axioms; never raises."""
    bad = []
    if space.engine == INTERVAL_1D:
        if not (np.isfinite(space.a) and np.isfinite(space.b) and space.a < space.b):
            bad.append({"kind": "interval", "detail": "need finite a < b"})
        if np.any(np.diff(space.dens_x) <= 0):
            bad.append({"kind": "density-breakpoints", "detail": "not strictly increasing"})
        if np.any(space.dens_w <= 0):
            bad.append({"kind": "weights", "detail": "non-positive density value"})
        g = space.grid
        if g.size < 2:
            bad.append({"kind": "points", "detail": "need at least two sites"})
        if g.size and (g[0] <= space.a or g[-1] >= space.b or np.any(np.diff(g) <= 0)):
            bad.append({"kind": "grid", "detail": "sites must be sorted strictly inside (a, b)"})
        return ValidationReport(usable=not bad, violations=bad)

    d, w = space.dists, space.weights
    n = w.size
    if n < 2:
        bad.append({"kind": "points", "detail": "need at least two points"})
    if np.any(w <= 0):
        bad.append({"kind": "weights",
                    "witness": np.flatnonzero(w <= 0)[:5].tolist()})
    if d.shape != (n, n):
        bad.append({"kind": "distance-shape", "detail": str(d.shape)})
        return ValidationReport(usable=False, violations=bad)
    diag = np.abs(np.diag(d))
    if np.any(diag > METRIC_TOL):
        bad.append({"kind": "diagonal", "witness": int(np.argmax(diag))})
    asym = np.abs(d - d.T)
    if np.any(asym > METRIC_TOL):
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        bad.append({"kind": "symmetry", "witness": (int(i), int(j))})
    if np.any(d < -METRIC_TOL):
        i, j = np.unravel_index(np.argmin(d), d.shape)
        bad.append({"kind": "negative-distance", "witness": (int(i), int(j))})
    # triangle inequality on all triples when affordable, else a seeded sample
    if n ** 3 <= max_triples:
        triples = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)]
    else:
        rng = np.random.default_rng(0)
        triples = rng.integers(0, n, size=(max_triples, 3)).tolist()
    for i, j, k in triples:
        if d[i, k] > d[i, j] + d[j, k] + METRIC_TOL:
            bad.append({"kind": "triangle", "witness": (int(i), int(j), int(k))})
            break
    return ValidationReport(usable=not bad, violations=bad)


def diameter(space: Space) -> float:
    return space.diameter()


# ------------------------------------------------------------------ geometry fits


@dataclass
class GeometryFit:
    """Sampled-envelope estimates of the space's geometric constants.

    All constants are certified on the sampled (center, radius) grids
    only; they are lower envelopes of the measure's true constants, and
    refine monotonically as the grids refine.
    """

    doubling_constant: float | None = None
    lmb: tuple | None = None        # (Q, c_L)
    rlmb: tuple | None = None       # (Q, c)
    annular: tuple | None = None    # (beta, C_beta, admitted)
    centers: np.ndarray | None = None
    radii: np.ndarray | None = None


def _default_centers(space: Space, max_centers: int = 96) -> np.ndarray:
    if space.engine == POINT_CLOUD:
        return np.arange(space.n_points)
    g = space.grid
    if g.size <= max_centers:
        return g
    idx = np.unique(np.linspace(0, g.size - 1, max_centers).astype(int))
    return g[idx]


def _default_radii(space: Space, n: int = 48, rmax_frac: float = 0.999) -> np.ndarray:
    diam = space.diameter()
    rmin = diam * 1e-3
    if space.engine == POINT_CLOUD:
        pos = space.dists[space.dists > 0]
        if pos.size:
            rmin = float(pos.min()) * 0.75
    return np.geomspace(rmin, 2.0 * diam * rmax_frac, n)


def _ball_measures(space: Space, centers, radii) -> np.ndarray:
    """measures[i, j] = mu(B(centers[i], radii[j])), exact per engine."""
    centers = np.asarray(centers)
    radii = np.asarray(radii, dtype=float)
    if space.engine == INTERVAL_1D:
        lo = centers[:, None] - radii[None, :]
        hi = centers[:, None] + radii[None, :]
        return space.mass_between(lo, hi)
    out = np.empty((centers.size, radii.size))
    for i, c in enumerate(centers):
        drow = space.dists[int(c)]
        for j, r in enumerate(radii):
            out[i, j] = space.weights[drow < r].sum()
    return out


def estimate_doubling_constant(space: Space, radii=None, centers=None) -> GeometryFit:
    """Max over sampled (x, r) of mu(B(x, 2r)) / mu(B(x, r))."""
    if radii is not None and len(radii) == 0:
        raise ValueError("empty radius grid")
    radii = _default_radii(space) if radii is None else np.asarray(radii, dtype=float)
    centers = _default_centers(space) if centers is None else np.asarray(centers)
    m1 = _ball_measures(space, centers, radii)
    m2 = _ball_measures(space, centers, 2.0 * radii)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m1 > 0, m2 / m1, -np.inf)
    return GeometryFit(doubling_constant=float(ratio.max()),
                       centers=centers, radii=radii)


def fit_lower_mass_bound(space: Space, q: float | None = None,
                         radii=None, centers=None) -> GeometryFit:
    """Envelope fit of mu(B(x, r)) >= c_L r^Q over radii < 2 diam(X)."""
    diam = space.diameter()
    if radii is None:
        radii = _default_radii(space)
    radii = np.asarray(radii, dtype=float)
    radii = radii[radii < 2.0 * diam]
    centers = _default_centers(space) if centers is None else np.asarray(centers)
    m = _ball_measures(space, centers, radii)
    pos = m > 0
    if q is None:
        # slope of a log-log regression through the per-radius minima
        env = np.where(pos, m, np.inf).min(axis=0)
        ok = np.isfinite(env) & (env > 0)
        slope, _ = np.polyfit(np.log(radii[ok]), np.log(env[ok]), 1)
        q = max(float(slope), 1e-6)
    with np.errstate(divide="ignore"):
        ratio = np.where(pos, m / radii[None, :] ** q, np.inf)
    c = float(min(ratio.min(), 1.0))   # normalized: c_L <= 1 by convention
    return GeometryFit(lmb=(float(q), c), centers=centers, radii=radii)


def fit_relative_lower_mass_bound(space: Space, q: float,
                                  centers=None, radii=None) -> GeometryFit:
    """Envelope constant for mu(B(x,r))/mu(B(y,R)) >= c (r/R)^Q."""
    centers = _default_centers(space, 24) if centers is None else np.asarray(centers)
    radii = _default_radii(space, 16) if radii is None else np.asarray(radii, dtype=float)
    c_best = np.inf
    for y in centers:
        for R in radii:
            outer = space.ball(y, R)
            if outer.measure <= 0:
                continue
            inner_centers = centers if space.engine == POINT_CLOUD else centers
            for x in inner_centers:
                dxy = (abs(float(x) - float(y)) if space.engine == INTERVAL_1D
                       else space.dists[int(x), int(y)])
                if dxy >= R:
                    continue
                for r in radii[radii <= R]:
                    mb = space.ball(x, r).measure
                    c_best = min(c_best, (mb / outer.measure) / (r / R) ** q)
    return GeometryFit(rlmb=(float(q), float(min(c_best, 1.0))),
                       centers=centers, radii=radii)


def fit_annular_decay(space: Space, c_max: float = 64.0,
                      centers=None, radii=None,
                      gap_fractions=None) -> GeometryFit:
    """Fit (beta, C_beta) for mu(B(x,R) \\ B(x,r)) <= C ((R-r)/R)^beta mu(B(x,R)).

    Scans beta from 1.0 downward and returns the strongest exponent whose
    fitted constant stays below c_max; the admitted flag is False when
    even beta = 0.1 fails the cap (e.g. a heavy atom in the annulus).
    """
    centers = _default_centers(space, 48) if centers is None else np.asarray(centers)
    radii = _default_radii(space, 24) if radii is None else np.asarray(radii, dtype=float)
    fracs = (np.geomspace(0.02, 0.9, 12) if gap_fractions is None
             else np.asarray(gap_fractions, dtype=float))
    ts, ratios = [], []
    for R in radii:
        mR = _ball_measures(space, centers, np.array([R]))[:, 0]
        for t in fracs:
            r = R * (1.0 - t)
            mr = _ball_measures(space, centers, np.array([r]))[:, 0]
            good = mR > 0
            ts.append(np.full(good.sum(), t))
            ratios.append((mR[good] - mr[good]) / mR[good])
    t_all = np.concatenate(ts)
    ratio_all = np.concatenate(ratios)
    for beta in np.arange(10, 0, -1) / 10.0:
        c_fit = float((ratio_all / t_all ** beta).max())
        if c_fit <= c_max:
            return GeometryFit(annular=(float(beta), c_fit, True),
                               centers=centers, radii=radii)
    c_fit = float((ratio_all / t_all ** 0.1).max())
    return GeometryFit(annular=(0.1, c_fit, False), centers=centers, radii=radii)


def estimate_geometry(space: Space, q: float | None = None) -> GeometryFit:
    """Convenience: fill every field of GeometryFit on default grids."""
    doubling = estimate_doubling_constant(space)
    lmb = fit_lower_mass_bound(space, q=q)
    annular = fit_annular_decay(space)
    rlmb = fit_relative_lower_mass_bound(space, q=lmb.lmb[0])
    return GeometryFit(doubling_constant=doubling.doubling_constant,
                       lmb=lmb.lmb, rlmb=rlmb.rlmb, annular=annular.annular,
                       centers=doubling.centers, radii=doubling.radii)
