"""Covers with disjoint fifth-balls, Lipschitz partitions of unity, and
discrete convolutions.

The cover is a greedy maximal (2 delta / 5)-separated net scanned in
fixed site order, so runs are reproducible; separation makes the
fifth-balls disjoint while every site stays within 2 delta / 5 of a
center.  The partition profile is the explicit clamp ramp
psi_i(x) = clamp(2 - d(x, c_i)/delta, 0, 1), equal to 1 on B_i and
exactly zero outside 2 B_i, normalized by the (>= 1) pointwise sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import SampledFunction
from .oscillation import ball_mean
from .space import INTERVAL_1D, POINT_CLOUD, Space

OVERLAP_SCALES = (1, 2, 5, 7)


@dataclass(frozen=True, eq=False)
class Cover:
    space: Space
    delta: float
    centers: np.ndarray        # 1d: coordinates; cloud: point ids
    balls: tuple
    overlap_bound: dict

    @property
    def n_balls(self) -> int:
        return len(self.balls)

    def to_json(self) -> dict:
        return {"delta": self.delta,
                "centers": np.asarray(self.centers).tolist(),
                "radii": [b.radius for b in self.balls],
                "overlap_bound": {str(k): v for k, v in self.overlap_bound.items()}}


@dataclass(frozen=True, eq=False)
class Partition:
    cover: Cover
    # per ball: slice of sites where phi is nonzero, and the values there
    starts: np.ndarray
    stops: np.ndarray
    rows: tuple
    lipschitz_gauge: float

    def phi_at_sites(self, i: int) -> np.ndarray:
        out = np.zeros(self.cover.space.n_points)
        out[self.starts[i]:self.stops[i]] = self.rows[i]
        return out

    def sum_at_sites(self) -> np.ndarray:
        out = np.zeros(self.cover.space.n_points)
        for i in range(len(self.rows)):
            out[self.starts[i]:self.stops[i]] += self.rows[i]
        return out

    def to_json(self) -> dict:
        return {"cover": self.cover.to_json(),
                "lipschitz_gauge": self.lipschitz_gauge,
                "phi": [{"start": int(s), "values": r.tolist()}
                        for s, r in zip(self.starts, self.rows)]}


def _site_distances(space: Space, center):
    if space.engine == INTERVAL_1D:
        return np.abs(space.grid - center)
    return space.dists[int(center)]


def build_cover(space: Space, delta: float) -> Cover:
    """Greedy delta-cover whose fifth-balls are pairwise disjoint."""
    diam = space.diameter()
    if not (0 < delta < 2 * diam):
        raise ValueError("need 0 < delta < 2 diam(X)")
    sep = 2.0 * delta / 5.0
    centers = []
    if space.engine == INTERVAL_1D:
        last = -np.inf
        for x in space.grid:
            if x - last >= sep:
                centers.append(x)
                last = x
        centers = np.asarray(centers)
    else:
        chosen = []
        for i in range(space.n_points):
            if all(space.dists[i, j] >= sep for j in chosen):
                chosen.append(i)
        centers = np.asarray(chosen, dtype=int)
    balls = tuple(space.ball(c, delta) for c in centers)
    overlap = {}
    for k in OVERLAP_SCALES:
        counts = np.zeros(space.n_points, dtype=int)
        for c in centers:
            counts += _site_distances(space, c) < k * delta
        overlap[k] = int(counts.max())
    return Cover(space=space, delta=float(delta), centers=centers,
                 balls=balls, overlap_bound=overlap)


def build_partition(space: Space, cover: Cover) -> Partition:
    """Ramp-profile partition of unity subordinate to 2 B_i."""
    delta = cover.delta
    starts, stops, raw = [], [], []
    denom = np.zeros(space.n_points)
    for c in cover.centers:
        d = _site_distances(space, c)
        psi = np.clip(2.0 - d / delta, 0.0, 1.0)
        nz = np.flatnonzero(psi > 0)
        if nz.size == 0:
            starts.append(0)
            stops.append(0)
            raw.append(np.empty(0))
            continue
        s, t = nz[0], nz[-1] + 1
        starts.append(s)
        stops.append(t)
        raw.append(psi[s:t])
        denom[s:t] += psi[s:t]
    if np.any(denom < 1.0 - 1e-12):
        raise ValueError("cover does not cover every site; cannot normalize")
    rows = tuple(r / denom[s:t] for r, s, t in zip(raw, starts, stops))
    gauge = _partition_gauge(space, starts, stops, rows)
    return Partition(cover=cover, starts=np.asarray(starts, dtype=int),
                     stops=np.asarray(stops, dtype=int), rows=rows,
                     lipschitz_gauge=gauge)


def _partition_gauge(space, starts, stops, rows):
    """Measured max of |phi_i(x) - phi_i(y)| / d(x, y) over site pairs."""
    best = 0.0
    if space.engine == INTERVAL_1D:
        g = space.grid
        for s, t, r in zip(starts, stops, rows):
            if t - s < 1:
                continue
            lo = max(s - 1, 0)
            hi = min(t + 1, g.size)
            full = np.zeros(hi - lo)
            full[s - lo:t - lo] = r
            slopes = np.abs(np.diff(full)) / np.diff(g[lo:hi])
            if slopes.size:
                best = max(best, float(slopes.max()))
        return best
    d = space.dists
    pos = d > 0
    for s, t, r in zip(starts, stops, rows):
        phi = np.zeros(space.n_points)
        phi[s:t] = r
        diff = np.abs(phi[:, None] - phi[None, :])
        ratio = np.where(pos, diff / np.where(pos, d, 1.0), 0.0)
        best = max(best, float(ratio.max()))
    return best


def discrete_convolution(space: Space, f: SampledFunction, delta: float,
                         parts: tuple | None = None) -> SampledFunction:
    """Sum of ball means weighted by the partition: the scale-delta
    Lipschitz approximation of f, evaluated at the sites."""
    diam = space.diameter()
    if not (0 < delta < 2 * diam):
        raise ValueError("need 0 < delta < 2 diam(X)")
    if parts is None:
        cover = build_cover(space, delta)
        partition = build_partition(space, cover)
    else:
        cover, partition = parts
    out = np.zeros(space.n_points)
    for i, ball in enumerate(cover.balls):
        fb = ball_mean(space, f, ball)
        s, t = partition.starts[i], partition.stops[i]
        out[s:t] += fb * partition.rows[i]
    return SampledFunction.from_values(space, out)


@dataclass(frozen=True)
class GaugeReport:
    value: float
    no_pairs: bool = False


def lipschitz_gauge(space: Space, g: SampledFunction, scale: float) -> GaugeReport:
    """Max of |g(x) - g(y)| / d(x, y) over site pairs with 0 < d < scale.

    On the interval engine adjacent-site slopes dominate any wider pair,
    so the scan is linear.  Returns 0 with a flag when no pair qualifies.
    """
    v = g.point_values
    if space.engine == INTERVAL_1D:
        gaps = np.diff(space.grid)
        ok = gaps < scale
        if not np.any(ok):
            return GaugeReport(value=0.0, no_pairs=True)
        slopes = np.abs(np.diff(v))[ok] / gaps[ok]
        return GaugeReport(value=float(slopes.max()))
    d = space.dists
    mask = (d > 0) & (d < scale)
    if not np.any(mask):
        return GaugeReport(value=0.0, no_pairs=True)
    diff = np.abs(v[:, None] - v[None, :])
    ratio = diff[mask] / d[mask]
    return GaugeReport(value=float(ratio.max()))
