"""Ball family enumeration and the fractional maximal operator.

The supremum domain is always an explicit finite family.  On the
interval engine the intrinsic-convention family is every pair of
candidate endpoints (grid sites, optionally the domain ends) read as an
interval; the prescribed-convention family is centers x a geometric
radius grid, with boundary-clipped traces keeping their prescribed
radius.  Point clouds use centers x candidate radii placed at midpoints
between consecutive distinct distances plus a geometric refinement
grid.  Refining a family can only increase the computed sups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .functions import SampledFunction
from .space import INTERVAL_1D, POINT_CLOUD, Ball, Space

INTRINSIC = "intrinsic"
PRESCRIBED = "prescribed"
RADIUS_REFINE_RATIO = 1.05


@dataclass(frozen=True, eq=False)
class BallFamily:
    space: Space
    convention: str
    r_min: float
    r_max: float
    # interval engine, intrinsic convention: implicit endpoint pairs
    endpoints: np.ndarray | None = None
    # prescribed 1d / point cloud: explicit center x radius product
    centers: np.ndarray | None = None
    radii: np.ndarray | None = None
    # explicit witness balls appended to the generated family
    extras: tuple = ()

    @property
    def is_pair_family(self) -> bool:
        return self.endpoints is not None

    @cached_property
    def size(self) -> int:
        n = len(self.extras)
        if self.is_pair_family:
            xe = self.endpoints
            j_lo = np.searchsorted(xe, xe + 2.0 * self.r_min, side="left")
            j_hi = np.searchsorted(xe, xe + 2.0 * self.r_max, side="right")
            n += int(np.sum(np.maximum(j_hi - np.maximum(j_lo, np.arange(xe.size) + 1), 0)))
        else:
            n += self.centers.size * self.radii.size
        return n

    def with_extras(self, balls) -> "BallFamily":
        return BallFamily(space=self.space, convention=self.convention,
                          r_min=self.r_min, r_max=self.r_max,
                          endpoints=self.endpoints, centers=self.centers,
                          radii=self.radii, extras=self.extras + tuple(balls))

    def pair_arrays(self, r_hi=None, length_cap=None):
        """Materialized (lo, hi) arrays of the generated pairs, windowed."""
        if not self.is_pair_family:
            raise ValueError("not a pair family")
        xe = self.endpoints
        r_hi = self.r_max if r_hi is None else min(r_hi, self.r_max)
        max_len = 2.0 * r_hi if length_cap is None else min(2.0 * r_hi, length_cap)
        los, his = [], []
        for i in range(xe.size - 1):
            j0 = np.searchsorted(xe, xe[i] + 2.0 * self.r_min, side="left")
            j0 = max(j0, i + 1)
            j1 = np.searchsorted(xe, xe[i] + max_len, side="right")
            if j1 > j0:
                his.append(xe[j0:j1])
                los.append(np.full(j1 - j0, xe[i]))
        if not los:
            return np.empty(0), np.empty(0)
        return np.concatenate(los), np.concatenate(his)

    def iter_balls(self, max_balls=None):
        """Materialize the family (small families / audits only)."""
        count = 0
        if self.is_pair_family:
            los, his = self.pair_arrays()
            for lo, hi in zip(los, his):
                if max_balls is not None and count >= max_balls:
                    return
                yield self.space.interval_ball(lo, hi)
                count += 1
        else:
            for r in self.radii:
                for c in self.centers:
                    if max_balls is not None and count >= max_balls:
                        return
                    yield self.space.ball(c, r)
                    count += 1
        yield from self.extras


@dataclass(frozen=True, eq=False)
class MaximalField:
    """Per-site values of the maximal operator plus the argmax balls."""

    space: Space
    alpha: float
    convention: str
    values: np.ndarray
    arg_lo: np.ndarray          # 1d: argmax interval; cloud: arg center
    arg_hi: np.ndarray
    arg_radius: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.values)

    def as_function(self) -> SampledFunction:
        """Piecewise-linear interpolant through the defined sites."""
        if self.space.engine == POINT_CLOUD:
            return SampledFunction(space=self.space, values=self.values)
        ok = self.defined
        if not np.all(ok):
            if not np.any(ok):
                raise ValueError("field is empty-flagged everywhere")
            return SampledFunction.piecewise_linear(
                self.space, self.space.grid[ok], self.values[ok])
        return SampledFunction.piecewise_linear(self.space, self.space.grid, self.values)

    def argmax_ball(self, k: int) -> Ball:
        if self.space.engine == INTERVAL_1D:
            return self.space.interval_ball(self.arg_lo[k], self.arg_hi[k])
        return self.space.ball(int(self.arg_lo[k]), self.arg_radius[k])


def _cloud_candidate_radii(space: Space, r_min: float, r_max: float,
                           cap: int = 512) -> np.ndarray:
    """Midpoints between consecutive distinct distances (0 prepended, so
    singleton balls are reachable), one radius past the largest distance,
    and a geometric refinement grid; subsampled evenly past ``cap``."""
    d = np.unique(space.dists[np.triu_indices(space.n_points, 1)])
    d = np.concatenate([[0.0], d[d > 0]])
    mids = (d[1:] + d[:-1]) / 2.0
    if mids.size > cap:
        mids = mids[np.unique(np.linspace(0, mids.size - 1, cap).astype(int))]
    above = np.array([(d[-1] + 2.0 * space.diameter()) / 2.0])
    n_geom = max(int(np.ceil(np.log(r_max / r_min) / np.log(RADIUS_REFINE_RATIO))), 1)
    geom = np.geomspace(r_min, r_max, min(n_geom + 1, 400))
    radii = np.unique(np.concatenate([mids, above, geom]))
    return radii[(radii >= r_min) & (radii <= r_max)]


def enumerate_balls(space: Space, r_min: float, r_max: float,
                    convention: str | None = None,
                    include_boundary: bool = True) -> BallFamily:
    """Deterministic ball family over the radius window [r_min, r_max]."""
    diam = space.diameter()
    if not (0 < r_min <= r_max < 2.0 * diam):
        raise ValueError("need 0 < r_min <= r_max < 2 diam(X)")
    if convention is None:
        convention = INTRINSIC if space.engine == INTERVAL_1D else PRESCRIBED
    if space.engine == INTERVAL_1D and convention == INTRINSIC:
        xe = space.endpoints if include_boundary else space.grid
        return BallFamily(space=space, convention=INTRINSIC,
                          r_min=float(r_min), r_max=float(r_max), endpoints=xe)
    if space.engine == INTERVAL_1D:
        n_geom = max(int(np.ceil(np.log(r_max / r_min) / np.log(RADIUS_REFINE_RATIO))), 1)
        radii = np.geomspace(r_min, r_max, min(n_geom + 1, 400))
        return BallFamily(space=space, convention=PRESCRIBED,
                          r_min=float(r_min), r_max=float(r_max),
                          centers=space.grid, radii=radii)
    radii = _cloud_candidate_radii(space, r_min, r_max)
    return BallFamily(space=space, convention=convention,
                      r_min=float(r_min), r_max=float(r_max),
                      centers=np.arange(space.n_points), radii=radii)


def default_family(space: Space, convention: str | None = None,
                   r_max_frac: float = 0.999) -> BallFamily:
    """Family spanning from the finest resolvable radius to near 2 diam."""
    diam = space.diameter()
    if space.engine == INTERVAL_1D:
        gaps = np.diff(space.endpoints)
        r_min = max(float(gaps[gaps > 0].min()) / 2.0, diam * 1e-12)
    else:
        pos = space.dists[space.dists > 0]
        r_min = float(pos.min()) / 2.0
    if convention == PRESCRIBED or space.engine == POINT_CLOUD:
        r_max = 2.0 * diam * r_max_frac
    else:
        r_max = diam / 2.0 + diam * 1e-9   # widest interval trace
    return enumerate_balls(space, r_min, r_max, convention)


# ------------------------------------------------------------------ operator


def _check_alpha(space: Space, alpha: float, q_exponent):
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha > 0:
        if space.truncated_from_unbounded:
            raise ValueError("alpha > 0 requires a bounded space "
                             "(this space truncates an unbounded one)")
        if q_exponent is None:
            raise ValueError("alpha > 0 requires a lower mass bound exponent")
        if alpha >= q_exponent:
            raise ValueError("need alpha < Q")


def _apply_extras_1d(space, g, extras, convention, alpha, rlo, rhi, vals, alo, ahi, arad):
    for ball in extras:
        r_eff = ball.effective_radius(convention)
        if not (rlo <= r_eff < rhi):
            continue
        if ball.measure <= 0:
            continue
        mean = _interval_mean_abs(space, g, ball.lo, ball.hi)
        v = mean * r_eff ** alpha if alpha != 0.0 else mean
        ids = ball.member_ids
        upd = v > vals[ids]
        vals[ids[upd]] = v
        alo[ids[upd]] = ball.lo
        ahi[ids[upd]] = ball.hi
        arad[ids[upd]] = r_eff


def _interval_mean_abs(space, g, lo, hi):
    t = g.segments
    idx = np.clip(np.searchsorted(t.bounds, [lo, hi], side="right") - 1,
                  0, t.w.size - 1)
    pw, pf = [], []
    for x, j in zip((lo, hi), idx):
        x0 = t.bounds[j]
        span = t.bounds[j + 1] - x0
        tt = (x - x0) / span if span > 0 else 0.0
        fx = t.vl[j] + tt * (t.vr[j] - t.vl[j])
        pw.append(t.cum_w[j] + t.w[j] * (x - x0))
        pf.append(t.cum_fw[j] + t.w[j] * (t.vl[j] + fx) / 2.0 * (x - x0))
    return (pf[1] - pf[0]) / (pw[1] - pw[0])


def fractional_maximal(space: Space, f: SampledFunction, alpha: float,
                       family: BallFamily, q_exponent: float | None = None,
                       radius_window: tuple | None = None) -> MaximalField:
    """Per-site sup over family balls containing the site of
    r_eff^alpha times the mean of |f| over the ball."""
    _check_alpha(space, alpha, q_exponent)
    rlo = family.r_min if radius_window is None else radius_window[0]
    rhi = (np.nextafter(family.r_max, np.inf) if radius_window is None
           else radius_window[1])
    g = f.abs()
    n = space.n_points
    vals = np.full(n, -np.inf)
    alo = np.full(n, np.nan)
    ahi = np.full(n, np.nan)
    arad = np.full(n, np.nan)

    if space.engine == INTERVAL_1D and family.is_pair_family:
        xe = family.endpoints
        gwe, gfe = _endpoint_prefixes(space, g, xe)
        K = xe.size
        out = np.full(K, -np.inf)
        oi = np.full(K, -1, dtype=np.int64)
        oj = np.full(K, -1, dtype=np.int64)
        _kernels.pair_field(xe, gwe, gfe, float(alpha), float(rlo), float(rhi),
                            out, oi, oj)
        gidx = np.searchsorted(xe, space.grid)
        vals = out[gidx]
        ok = oi[gidx] >= 0
        alo[ok] = xe[oi[gidx][ok]]
        ahi[ok] = xe[oj[gidx][ok]]
        arad[ok] = (ahi[ok] - alo[ok]) / 2.0
        _apply_extras_1d(space, g, family.extras, family.convention, alpha,
                         rlo, rhi, vals, alo, ahi, arad)
        return MaximalField(space=space, alpha=alpha, convention=family.convention,
                            values=vals, arg_lo=alo, arg_hi=ahi, arg_radius=arad)

    if space.engine == INTERVAL_1D:
        # prescribed convention: fixed-radius center sweeps, radii ascending
        xs = space.grid
        for r in family.radii:
            if not (rlo <= r < rhi):
                continue
            lo = np.maximum(xs - r, space.a)
            hi = np.minimum(xs + r, space.b)
            masses = space.mass_between(lo, hi)
            integ = _fw_between(g, lo, hi)
            v = np.where(masses > 0, integ / np.where(masses > 0, masses, 1.0), -np.inf)
            if alpha != 0.0:
                v = v * r ** alpha
            out = np.empty(xs.size)
            arg = np.empty(xs.size, dtype=np.int64)
            _kernels.sliding_window_max(xs, v, float(r), out, arg)
            upd = out > vals
            vals[upd] = out[upd]
            c = xs[arg[upd]]
            alo[upd] = np.maximum(c - r, space.a)
            ahi[upd] = np.minimum(c + r, space.b)
            arad[upd] = r
        _apply_extras_1d(space, g, family.extras, family.convention, alpha,
                         rlo, rhi, vals, alo, ahi, arad)
        return MaximalField(space=space, alpha=alpha, convention=family.convention,
                            values=vals, arg_lo=alo, arg_hi=ahi, arg_radius=arad)

    # point cloud: one membership mask per radius, radii ascending
    gv = np.abs(f.values)
    w = space.weights
    for r in family.radii:
        member = space.dists < r          # member[c, x]: x in B(c, r)
        msum = member @ w
        good = msum > 0
        means = np.where(good, (member @ (w * gv)) / np.where(good, msum, 1.0), 0.0)
        if family.convention == INTRINSIC:
            r_eff = np.empty(space.n_points)
            for c in range(space.n_points):
                m = member[c]
                r_eff[c] = space.dists[np.ix_(m, m)].max() / 2.0 if m.any() else 0.0
        else:
            r_eff = np.full(space.n_points, r)
        in_window = (r_eff >= rlo) & (r_eff < rhi)
        if alpha != 0.0:
            means = means * np.where(r_eff > 0, r_eff, 1.0) ** alpha
        v = np.where(good & in_window, means, -np.inf)
        per_point = np.where(member, v[:, None], -np.inf)
        best_c = per_point.argmax(axis=0)
        best_v = per_point[best_c, np.arange(space.n_points)]
        upd = best_v > vals
        vals[upd] = best_v[upd]
        alo[upd] = best_c[upd]
        ahi[upd] = best_c[upd]
        arad[upd] = r
    for ball in family.extras:
        r_eff = ball.effective_radius(family.convention)
        if not (rlo <= r_eff < rhi) or ball.measure <= 0:
            continue
        v = float(w[ball.members] @ gv[ball.members]) / ball.measure
        v *= r_eff ** alpha
        ids = ball.members
        upd = v > vals[ids]
        vals[ids[upd]] = v
        alo[ids[upd]] = ball.center
        ahi[ids[upd]] = ball.center
        arad[ids[upd]] = ball.radius
    return MaximalField(space=space, alpha=alpha, convention=family.convention,
                        values=vals, arg_lo=alo, arg_hi=ahi, arg_radius=arad)


def _endpoint_prefixes(space, g, xe):
    if xe is space.endpoints or (xe.size == space.endpoints.size
                                 and np.array_equal(xe, space.endpoints)):
        return g.endpoint_prefixes
    t = g.segments
    idx = np.clip(np.searchsorted(t.bounds, xe, side="right") - 1, 0, t.w.size - 1)
    x0 = t.bounds[idx]
    span = t.bounds[idx + 1] - x0
    tt = np.where(span > 0, (xe - x0) / np.where(span > 0, span, 1.0), 0.0)
    fx = t.vl[idx] + tt * (t.vr[idx] - t.vl[idx])
    we = t.cum_w[idx] + t.w[idx] * (xe - x0)
    fe = t.cum_fw[idx] + t.w[idx] * (t.vl[idx] + fx) / 2.0 * (xe - x0)
    return we, fe


def _fw_between(g, lo, hi):
    t = g.segments

    def prefix(x):
        idx = np.clip(np.searchsorted(t.bounds, x, side="right") - 1, 0, t.w.size - 1)
        x0 = t.bounds[idx]
        span = t.bounds[idx + 1] - x0
        tt = np.where(span > 0, (x - x0) / np.where(span > 0, span, 1.0), 0.0)
        fx = t.vl[idx] + tt * (t.vr[idx] - t.vl[idx])
        return t.cum_fw[idx] + t.w[idx] * (t.vl[idx] + fx) / 2.0 * (x - x0)

    return prefix(hi) - prefix(lo)


def local_global_split(space: Space, f: SampledFunction, alpha: float,
                       lam: float, r: float, family: BallFamily,
                       q_exponent: float | None = None):
    """(local, global) fields split at radius lambda * r; their pointwise
    max recombines to the full field exactly (half-open windows)."""
    if lam < 1 or r <= 0:
        raise ValueError("need lambda >= 1 and r > 0")
    cutoff = lam * r
    top = np.nextafter(family.r_max, np.inf)
    loc = fractional_maximal(space, f, alpha, family, q_exponent,
                             radius_window=(family.r_min, min(cutoff, top)))
    glob = fractional_maximal(space, f, alpha, family, q_exponent,
                              radius_window=(max(cutoff, family.r_min), top))
    return loc, glob


def conjugate_exponent(p: float, alpha: float, q: float) -> float:
    """Solve 1/p - 1/p* = alpha/Q; returns inf at the endpoint alpha*p = Q."""
    if not (1 < p < np.inf):
        raise ValueError("need 1 < p < inf")
    if alpha < 0 or alpha * p > q:
        raise ValueError("need 0 <= alpha <= Q/p")
    if alpha * p == q:
        return np.inf
    return p * q / (q - alpha * p)


def maximal_rows(field: MaximalField):
    """Per-site rows (x, value, argmax center, argmax radius) for CSV."""
    xs = field.space.points
    rows = []
    for k in range(xs.size):
        if field.space.engine == INTERVAL_1D:
            center = ((field.arg_lo[k] + field.arg_hi[k]) / 2.0
                      if np.isfinite(field.arg_lo[k]) else np.nan)
        else:
            center = field.arg_lo[k]
        rows.append((float(xs[k]), float(field.values[k]),
                     float(center), float(field.arg_radius[k])))
    return rows
