"""Sampled functions and exact integration against the space's measure.

Interval-engine functions are piecewise linear: breakpoint and value
arrays, with repeated breakpoints encoding jump discontinuities.  All
means, p-th moments and oscillations against the piecewise-constant
density are closed-form, so theorem checks carry no quadrature error.
Point-cloud functions are plain per-point value arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .space import INTERVAL_1D, POINT_CLOUD, Space


class SegmentTable(NamedTuple):
    """Piecewise-linear f against piecewise-constant density, merged.

    ``bounds`` has S+1 cut coordinates; segment j spans
    [bounds[j], bounds[j+1]] where f runs linearly from vl[j] to vr[j]
    and the density is the constant w[j].  ``cum_w``/``cum_fw`` are
    prefix integrals of the density and of f * density at the cuts.
    """

    bounds: np.ndarray
    vl: np.ndarray
    vr: np.ndarray
    w: np.ndarray
    cum_w: np.ndarray
    cum_fw: np.ndarray


def _eval_pl(bx, by, x, side="right"):
    """Evaluate a piecewise-linear function with possible jumps."""
    x = np.asarray(x, dtype=float)
    if side == "right":
        idx = np.searchsorted(bx, x, side="right") - 1
    else:
        idx = np.searchsorted(bx, x, side="left") - 1
    idx = np.clip(idx, 0, bx.size - 2)
    x0, x1 = bx[idx], bx[idx + 1]
    span = x1 - x0
    t = np.where(span > 0, (x - x0) / np.where(span > 0, span, 1.0), 0.0)
    return by[idx] + t * (by[idx + 1] - by[idx])


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real values attached to a space: per-point (cloud) or piecewise linear (1d)."""

    space: Space
    bx: np.ndarray | None = None      # 1d breakpoints (sorted; duplicates = jumps)
    by: np.ndarray | None = None
    values: np.ndarray | None = None  # cloud per-point values

    # ------------------------------------------------------------- builders

    @staticmethod
    def piecewise_linear(space, breakpoints, values) -> "SampledFunction":
        bx = np.asarray(breakpoints, dtype=float)
        by = np.asarray(values, dtype=float)
        if bx.size != by.size or bx.size < 2:
            raise ValueError("need matching breakpoint/value arrays, length >= 2")
        if np.any(np.diff(bx) < 0):
            raise ValueError("breakpoints must be sorted")
        if not np.all(np.isfinite(by)):
            raise ValueError("function values must be finite")
        # cover the full closed domain so integrals over any ball are defined
        if bx[0] > space.a:
            bx = np.concatenate([[space.a], bx])
            by = np.concatenate([[by[0]], by])
        if bx[-1] < space.b:
            bx = np.concatenate([bx, [space.b]])
            by = np.concatenate([by, [by[-1]]])
        return SampledFunction(space=space, bx=bx, by=by)

    @staticmethod
    def from_values(space, values) -> "SampledFunction":
        v = np.asarray(values, dtype=float)
        if space.engine == POINT_CLOUD:
            return SampledFunction(space=space, values=v)
        return SampledFunction.piecewise_linear(space, space.grid, v)

    @staticmethod
    def from_callable(space, fn) -> "SampledFunction":
        return SampledFunction.from_values(space, fn(space.points))

    @staticmethod
    def constant(space, c) -> "SampledFunction":
        if space.engine == POINT_CLOUD:
            return SampledFunction(space=space, values=np.full(space.n_points, float(c)))
        return SampledFunction(space=space, bx=np.array([space.a, space.b]),
                               by=np.array([float(c), float(c)]))

    # ------------------------------------------------------------- evaluation

    def __call__(self, x):
        if self.space.engine == POINT_CLOUD:
            return self.values[np.asarray(x, dtype=int)]
        return _eval_pl(self.bx, self.by, x)

    @cached_property
    def point_values(self) -> np.ndarray:
        """Values at the space's sites."""
        if self.space.engine == POINT_CLOUD:
            return self.values
        return _eval_pl(self.bx, self.by, self.space.grid)

    # ------------------------------------------------------------- arithmetic

    def _binary(self, other, op):
        if self.space.engine == POINT_CLOUD:
            ov = other.values if isinstance(other, SampledFunction) else other
            return SampledFunction(space=self.space, values=op(self.values, ov))
        if not isinstance(other, SampledFunction):
            return SampledFunction(space=self.space, bx=self.bx,
                                   by=op(self.by, float(other)))
        bx = np.concatenate([self.bx, other.bx])
        bx.sort(kind="stable")
        keep = np.ones(bx.size, dtype=bool)
        if bx.size > 2:          # collapse runs of 3+ equal cuts to double cuts
            keep[2:] = ~((bx[2:] == bx[1:-1]) & (bx[1:-1] == bx[:-2]))
        bx = bx[keep]
        # left/right limits keep jumps from either operand intact: the first
        # copy of a doubled cut carries the left limit, the second the right
        left = op(_eval_pl(self.bx, self.by, bx, "left"),
                  _eval_pl(other.bx, other.by, bx, "left"))
        right = op(_eval_pl(self.bx, self.by, bx, "right"),
                   _eval_pl(other.bx, other.by, bx, "right"))
        by = right.copy()
        dup_second = np.zeros(bx.size, dtype=bool)
        dup_second[1:] = bx[1:] == bx[:-1]
        dup_first = np.zeros(bx.size, dtype=bool)
        dup_first[:-1] = dup_second[1:]
        by[dup_first] = left[dup_first]
        by[-1] = left[-1]
        return SampledFunction(space=self.space, bx=bx, by=by)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        c = float(c)
        if self.space.engine == POINT_CLOUD:
            return SampledFunction(space=self.space, values=self.values * c)
        return SampledFunction(space=self.space, bx=self.bx, by=self.by * c)

    def __rmul__(self, c):
        return self.__mul__(c)

    def __neg__(self):
        return self * -1.0

    def abs(self) -> "SampledFunction":
        if self.space.engine == POINT_CLOUD:
            return SampledFunction(space=self.space, values=np.abs(self.values))
        bx, by = self.bx, self.by
        # insert a breakpoint at every interior sign crossing
        x0, x1 = bx[:-1], bx[1:]
        y0, y1 = by[:-1], by[1:]
        cross = (y0 * y1 < 0) & (x1 > x0)
        if np.any(cross):
            t = y0[cross] / (y0[cross] - y1[cross])
            roots = x0[cross] + t * (x1[cross] - x0[cross])
            bx = np.concatenate([bx, roots])
            by = np.concatenate([by, np.zeros(roots.size)])
            order = np.argsort(bx, kind="stable")
            bx, by = bx[order], by[order]
        return SampledFunction(space=self.space, bx=bx, by=np.abs(by))

    def __abs__(self):
        return self.abs()

    # ------------------------------------------------------------- tables

    @cached_property
    def segments(self) -> SegmentTable:
        if self.space.engine != INTERVAL_1D:
            raise ValueError("segment tables exist only on the interval engine")
        sp = self.space
        cuts = np.unique(np.concatenate([self.bx, sp.dens_x]))
        cuts = cuts[(cuts >= sp.a) & (cuts <= sp.b)]
        vl = _eval_pl(self.bx, self.by, cuts[:-1], "right")
        vr = _eval_pl(self.bx, self.by, cuts[1:], "left")
        w = sp.density_at((cuts[:-1] + cuts[1:]) / 2.0)
        seg_len = np.diff(cuts)
        # extended-precision accumulation keeps prefix differences accurate
        cum_w = np.concatenate(
            [[0.0], np.cumsum((w * seg_len).astype(np.longdouble))]).astype(float)
        cum_fw = np.concatenate(
            [[0.0], np.cumsum((w * (vl + vr) / 2.0 * seg_len)
                              .astype(np.longdouble))]).astype(float)
        return SegmentTable(cuts, vl, vr, w, cum_w, cum_fw)

    @cached_property
    def endpoint_prefixes(self) -> tuple:
        """(mass, integral of f*density) from a to each candidate endpoint."""
        t = self.segments
        xe = self.space.endpoints
        idx = np.clip(np.searchsorted(t.bounds, xe, side="right") - 1,
                      0, t.w.size - 1)
        x0 = t.bounds[idx]
        span = t.bounds[idx + 1] - x0
        tt = np.where(span > 0, (xe - x0) / np.where(span > 0, span, 1.0), 0.0)
        fx = t.vl[idx] + tt * (t.vr[idx] - t.vl[idx])
        we = t.cum_w[idx] + t.w[idx] * (xe - x0)
        fe = t.cum_fw[idx] + t.w[idx] * (t.vl[idx] + fx) / 2.0 * (xe - x0)
        return we, fe

    # ------------------------------------------------------------- norms

    def lp_norm(self, p: float) -> float:
        """Exact L^p norm over the whole space."""
        if self.space.engine == POINT_CLOUD:
            return float((self.space.weights @ np.abs(self.values) ** p) ** (1.0 / p))
        t = self.segments
        total = _abs_power_integral(t.bounds[:-1], t.bounds[1:], t.vl, t.vr, t.w, p)
        return float(total ** (1.0 / p))


def _abs_power_integral(x0, x1, y0, y1, w, p):
    """Sum of w * integral |linear|^p over segments, exact and stable."""
    seg = np.zeros_like(np.asarray(x0, dtype=float))
    ln = x1 - x0
    same = y0 * y1 >= 0
    u, v = np.abs(y0), np.abs(y1)
    seg = np.where(same, _same_sign_piece(u, v, ln, p), 0.0)
    if np.any(~same):
        i = ~same
        root_t = y0[i] / (y0[i] - y1[i])
        l1 = ln[i] * root_t
        l2 = ln[i] * (1 - root_t)
        seg_i = _same_sign_piece(np.abs(y0[i]), 0.0, l1, p) + \
            _same_sign_piece(0.0, np.abs(y1[i]), l2, p)
        seg = seg.copy()
        seg[i] = seg_i
    return float(np.sum(w * seg))


def _same_sign_piece(u, v, length, p):
    """Integral of |linear|^p over a piece where |l| runs from u to v >= 0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    length = np.asarray(length, dtype=float)
    if p == 1.0:
        return (u + v) / 2.0 * length
    diff = v - u
    mid = ((u + v) / 2.0) ** p * length
    big = np.maximum(u, v)
    safe = np.abs(diff) > 1e-12 * np.maximum(big, 1e-300)
    num = np.where(safe, (v ** (p + 1) - u ** (p + 1)), 1.0)
    den = np.where(safe, (p + 1) * diff, 1.0)
    return np.where(safe, num / den * length, mid)


# ------------------------------------------------------------- field quadrature


def field_lp_norm(space: Space, field_values, p: float) -> float:
    """L^p norm of a per-site field using the sites' Voronoi masses."""
    v = np.abs(np.asarray(field_values, dtype=float))
    return float((space.point_masses @ v ** p) ** (1.0 / p))


def field_superlevel_measure(space: Space, field_values, t) -> np.ndarray:
    """mu{ field > t } by site masses; t may be an array of thresholds."""
    v = np.asarray(field_values, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([space.point_masses[v > ti].sum() for ti in t])
    return out if out.size > 1 else out[0]
