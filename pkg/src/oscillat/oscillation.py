"""Ball means, p-mean oscillation, BMO/BLO functionals, and the
modulus of oscillation.

Every supremum ranges over an explicit BallFamily, so the same
operations serve the whole space, subdomains, and radius- or
measure-windowed moduli.  On the interval engine each per-ball quantity
is an exact closed-form integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .functions import SampledFunction
from .maximal import BallFamily
from .space import INTERVAL_1D, POINT_CLOUD, Ball, Space


@dataclass(frozen=True, eq=False)
class OscillationReport:
    value: float
    p: float
    argmax_ball: Ball | None = None


def ball_mean(space: Space, f: SampledFunction, ball: Ball) -> float:
    """mu-weighted mean of f over the ball (1d: exact integral ratio)."""
    if ball.measure <= 0:
        raise ValueError("ball has no mass")
    if space.engine == POINT_CLOUD:
        ids = ball.members
        w = space.weights[ids]
        return float(w @ f.values[ids] / w.sum())
    osc, mean, mass, _ = _ball_stats(f, [ball.lo], [ball.hi], 1.0)
    return float(mean[0])


def p_oscillation(space: Space, f: SampledFunction, ball: Ball, p: float) -> float:
    """(mean over the ball of |f - f_B|^p)^(1/p)."""
    if p < 1:
        raise ValueError("need p >= 1")
    if ball.measure <= 0:
        raise ValueError("ball has no mass")
    if space.engine == POINT_CLOUD:
        ids = ball.members
        w = space.weights[ids]
        fb = w @ f.values[ids] / w.sum()
        return float((w @ np.abs(f.values[ids] - fb) ** p / w.sum()) ** (1.0 / p))
    osc, _, _, _ = _ball_stats(f, [ball.lo], [ball.hi], p)
    return float(osc[0])


def ball_min(space: Space, f: SampledFunction, ball: Ball) -> float:
    """Essential infimum of f on the ball (atomic min / piecewise-linear min)."""
    if space.engine == POINT_CLOUD:
        return float(f.values[ball.members].min())
    _, _, _, fmin = _ball_stats(f, [ball.lo], [ball.hi], 1.0)
    return float(fmin[0])


def _ball_stats(f: SampledFunction, los, his, p: float):
    t = f.segments
    return _kernels.batch_ball_stats(
        t.bounds, t.vl, t.vr, t.w,
        np.asarray(los, dtype=float), np.asarray(his, dtype=float), float(p))


def family_ball_stats(space: Space, f: SampledFunction, family: BallFamily,
                      p: float = 1.0, r_hi=None, length_cap=None):
    """Materialized per-ball (lo, hi, oscillation, mean, mass, min) table."""
    if space.engine != INTERVAL_1D or not family.is_pair_family:
        rows = [[], [], [], [], [], []]
        for ball in family.iter_balls():
            ids = ball.members if space.engine == POINT_CLOUD else ball.member_ids
            if ball.measure <= 0 or (space.engine == POINT_CLOUD and not ids.size):
                continue
            o = p_oscillation(space, f, ball, p)
            m = ball_mean(space, f, ball)
            mn = ball_min(space, f, ball)
            lo = ball.lo if space.engine == INTERVAL_1D else ball.center
            hi = ball.hi if space.engine == INTERVAL_1D else ball.center
            for row, v in zip(rows, (lo, hi, o, m, ball.measure, mn)):
                row.append(v)
        return tuple(np.asarray(r, dtype=float) for r in rows)
    los, his = family.pair_arrays(r_hi=r_hi, length_cap=length_cap)
    for ball in family.extras:
        los = np.append(los, ball.lo)
        his = np.append(his, ball.hi)
    osc, mean, mass, fmin = _ball_stats(f, los, his, p)
    return los, his, osc, mean, mass, fmin


def bmo_norm(space: Space, f: SampledFunction, p: float,
             family: BallFamily) -> OscillationReport:
    """Sup of the p-oscillation over the family, with the achieving ball."""
    if p < 1:
        raise ValueError("need p >= 1")
    if space.engine == INTERVAL_1D and family.is_pair_family:
        t = f.segments
        best, bi, bj = _kernels.pair_sup_stat(
            t.bounds, t.vl, t.vr, t.w, family.endpoints,
            float(family.r_min), float(family.r_max), float(p), 0)
        ball = (space.interval_ball(family.endpoints[bi], family.endpoints[bj])
                if bi >= 0 else None)
        value = max(best, 0.0)
        for extra in family.extras:
            o = p_oscillation(space, f, extra, p)
            if o > value:
                value, ball = o, extra
        return OscillationReport(value=float(value), p=p, argmax_ball=ball)
    best, ball = 0.0, None
    for b in family.iter_balls():
        if b.measure <= 0:
            continue
        if space.engine == POINT_CLOUD and not b.members.size:
            continue
        o = p_oscillation(space, f, b, p)
        if o > best:
            best, ball = o, b
    return OscillationReport(value=float(best), p=p, argmax_ball=ball)


def blo_gauge(space: Space, f: SampledFunction,
              family: BallFamily) -> OscillationReport:
    """Sup over the family of (ball mean - essential infimum)."""
    if space.engine == INTERVAL_1D and family.is_pair_family:
        t = f.segments
        best, bi, bj = _kernels.pair_sup_stat(
            t.bounds, t.vl, t.vr, t.w, family.endpoints,
            float(family.r_min), float(family.r_max), 1.0, 1)
        ball = (space.interval_ball(family.endpoints[bi], family.endpoints[bj])
                if bi >= 0 else None)
        value = max(best, 0.0)
        for extra in family.extras:
            g = ball_mean(space, f, extra) - ball_min(space, f, extra)
            if g > value:
                value, ball = g, extra
        return OscillationReport(value=float(value), p=1.0, argmax_ball=ball)
    best, ball = 0.0, None
    for b in family.iter_balls():
        if b.measure <= 0 or (space.engine == POINT_CLOUD and not b.members.size):
            continue
        g = ball_mean(space, f, b) - ball_min(space, f, b)
        if g > best:
            best, ball = g, b
    return OscillationReport(value=float(best), p=1.0, argmax_ball=ball)


def oscillation_modulus(space: Space, f: SampledFunction, r: float, p: float,
                        family: BallFamily, by: str = "radius") -> float:
    """sup of the p-oscillation over family balls with radius <= r.

    ``by="measure"`` gives the diagnostic variant with mu(B) <= r instead
    (vanishing-measure profile); it is reported, with no approximation
    theory attached to it.
    """
    if r <= 0:
        raise ValueError("need r > 0")
    if by not in ("radius", "measure"):
        raise ValueError("by must be 'radius' or 'measure'")
    if by == "radius" and space.engine == INTERVAL_1D and family.is_pair_family:
        if family.r_min > r:
            return 0.0
        t = f.segments
        best, bi, bj = _kernels.pair_sup_stat(
            t.bounds, t.vl, t.vr, t.w, family.endpoints,
            float(family.r_min), float(min(r, family.r_max)), float(p), 0)
        value = max(best, 0.0)
        for extra in family.extras:
            if extra.intrinsic_radius <= r:
                value = max(value, p_oscillation(space, f, extra, p))
        return float(value)
    if space.engine == INTERVAL_1D and family.is_pair_family:
        # measure window: lengths are capped by r / min density
        cap = r / float(space.dens_w.min())
        los, his, osc, mean, mass, fmin = family_ball_stats(
            space, f, family, p=p, length_cap=cap)
        ok = (mass > 0) & (mass <= r)
        return float(osc[ok].max()) if np.any(ok) else 0.0
    best = 0.0
    for b in family.iter_balls():
        if b.measure <= 0 or (space.engine == POINT_CLOUD and not b.members.size):
            continue
        size = b.effective_radius(family.convention) if by == "radius" else b.measure
        if size <= r:
            best = max(best, p_oscillation(space, f, b, p))
    return float(best)


@dataclass(frozen=True)
class MeanDriftReport:
    drift: float
    log_factor: float       # log(r_outer / r_inner) + 1
    ratio: float            # drift / (log_factor * bmo), nan when bmo not given


def mean_drift(space: Space, f: SampledFunction, inner: Ball, outer: Ball,
               bmo: float | None = None) -> MeanDriftReport:
    """|f_inner - f_outer| for nested balls, with the log-bound ratio."""
    if space.engine == INTERVAL_1D:
        nested = inner.lo >= outer.lo and inner.hi <= outer.hi
    else:
        nested = set(inner.members.tolist()) <= set(outer.members.tolist())
    if not nested:
        raise ValueError("inner ball must be contained in outer ball")
    drift = abs(ball_mean(space, f, inner) - ball_mean(space, f, outer))
    log_factor = np.log(outer.radius / inner.radius) + 1.0
    ratio = drift / (log_factor * bmo) if bmo else np.nan
    return MeanDriftReport(drift=float(drift), log_factor=float(log_factor),
                           ratio=float(ratio))


def oscillation_rows(space: Space, f: SampledFunction, family: BallFamily,
                     p: float = 1.0, max_balls: int = 20000):
    """Per-ball (center, radius, mean, oscillation) rows for CSV emission."""
    rows = []
    if space.engine == INTERVAL_1D and family.is_pair_family:
        los, his, osc, mean, mass, _ = family_ball_stats(space, f, family, p=p)
        stride = max(1, los.size // max_balls)
        for k in range(0, los.size, stride):
            rows.append(((los[k] + his[k]) / 2.0, (his[k] - los[k]) / 2.0,
                         mean[k], osc[k]))
        return rows
    for b in family.iter_balls(max_balls=max_balls):
        if b.measure <= 0 or (space.engine == POINT_CLOUD and not b.members.size):
            continue
        rows.append((float(b.center), float(b.radius),
                     ball_mean(space, f, b), p_oscillation(space, f, b, p)))
    return rows


def function_summary(space: Space, f: SampledFunction, family: BallFamily,
                     p: float = 1.0, radius_grid=None) -> dict:
    """bmo, blo and a radius profile of the oscillation modulus."""
    if radius_grid is None:
        radius_grid = np.geomspace(family.r_min * 2, family.r_max, 9)
    bmo = bmo_norm(space, f, p, family)
    blo = blo_gauge(space, f, family)
    omega = [(float(r), oscillation_modulus(space, f, r, p, family))
             for r in radius_grid]
    return {"bmo": bmo.value, "blo": blo.value, "p": p, "omega": omega}
