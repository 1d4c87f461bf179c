"""Compiled kernels for the 1-d interval engine.

All heavy sups run here: the pair-family maximal field (suffix-max over
right endpoints, O(K^2) for K candidate endpoints), streaming
oscillation sups over pair families, batch per-ball statistics, and a
monotone-deque sliding-window max for fixed-radius center sweeps.
Kernels are sequential on purpose: results must be bit-identical across
runs and thread counts, and the arithmetic is cheap enough.

Per-ball statistics accumulate locally (mass, mean and the |f - c|^p
moment are summed over the ball's own segments, with the mean centered
at the ball's first value) so a constant function has oscillation
exactly zero and errors scale with the local variation of f, not with
prefix-integral magnitudes.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _seg_index(bounds, x):
    j = np.searchsorted(bounds, x, side="right") - 1
    if j < 0:
        j = 0
    m = bounds.size - 2
    if j > m:
        j = m
    return j


@njit(cache=True)
def _abs_pow_piece(u, v, length, p):
    """Integral of |linear|^p over a piece where |l| runs u -> v, both >= 0."""
    if length <= 0.0:
        return 0.0
    if p == 1.0:
        return 0.5 * (u + v) * length
    d = v - u
    big = u if u > v else v
    if big <= 0.0:
        return 0.0
    if abs(d) <= 1e-12 * big:
        return (0.5 * (u + v)) ** p * length
    return (v ** (p + 1.0) - u ** (p + 1.0)) / ((p + 1.0) * d) * length


@njit(cache=True)
def _ball_accumulate(bounds, vl, vr, w, lo, hi, p):
    """(mass, mean, |f - mean|^p moment, essinf) over (lo, hi), local sums."""
    j1 = _seg_index(bounds, lo)
    j2 = _seg_index(bounds, hi)
    mass = 0.0
    shifted = 0.0      # integral of (f - ref) * w; ref = f at the ball's left end
    ref = np.nan
    mn = np.inf
    for j in range(j1, j2 + 1):
        x0 = bounds[j]
        x1 = bounds[j + 1]
        span = x1 - x0
        if span <= 0.0:
            continue
        u1 = x0 if x0 > lo else lo
        u2 = x1 if x1 < hi else hi
        if u2 <= u1:
            continue
        slope = (vr[j] - vl[j]) / span
        f1 = vl[j] + (u1 - x0) * slope
        f2 = vl[j] + (u2 - x0) * slope
        if np.isnan(ref):
            ref = f1
        if f1 < mn:
            mn = f1
        if f2 < mn:
            mn = f2
        length = u2 - u1
        mass += w[j] * length
        shifted += w[j] * ((f1 - ref) + (f2 - ref)) * 0.5 * length
    if mass <= 0.0:
        return 0.0, np.nan, np.nan, np.nan
    c = ref + shifted / mass
    num = 0.0
    for j in range(j1, j2 + 1):
        x0 = bounds[j]
        x1 = bounds[j + 1]
        span = x1 - x0
        if span <= 0.0:
            continue
        u1 = x0 if x0 > lo else lo
        u2 = x1 if x1 < hi else hi
        if u2 <= u1:
            continue
        slope = (vr[j] - vl[j]) / span
        e1 = (vl[j] - c) + (u1 - x0) * slope
        e2 = (vl[j] - c) + (u2 - x0) * slope
        length = u2 - u1
        if e1 * e2 >= 0.0:
            num += w[j] * _abs_pow_piece(abs(e1), abs(e2), length, p)
        else:
            t = e1 / (e1 - e2)
            num += w[j] * (_abs_pow_piece(abs(e1), 0.0, length * t, p)
                           + _abs_pow_piece(0.0, abs(e2), length * (1.0 - t), p))
    return mass, c, num, mn


@njit(cache=True)
def batch_ball_stats(bounds, vl, vr, w, los, his, p):
    """Exact (oscillation, mean, mass, essinf) per interval ball."""
    n = los.size
    osc = np.empty(n)
    mean = np.empty(n)
    mass = np.empty(n)
    fmin = np.empty(n)
    for k in range(n):
        m, c, num, mn = _ball_accumulate(bounds, vl, vr, w, los[k], his[k], p)
        if m <= 0.0:
            osc[k] = np.nan
            mean[k] = np.nan
            mass[k] = 0.0
            fmin[k] = np.nan
        else:
            osc[k] = (num / m) ** (1.0 / p)
            mean[k] = c
            mass[k] = m
            fmin[k] = mn
    return osc, mean, mass, fmin


@njit(cache=True)
def pair_sup_stat(bounds, vl, vr, w, xe, rlo, rhi, p, mode):
    """Sup over endpoint pairs with rlo <= r <= rhi of the p-oscillation
    (mode 0) or of mean - essinf (mode 1)."""
    K = xe.size
    best = -np.inf
    bi = -1
    bj = -1
    for i in range(K - 1):
        j0 = np.searchsorted(xe, xe[i] + 2.0 * rlo, side="left")
        if j0 <= i:
            j0 = i + 1
        for j in range(j0, K):
            r = 0.5 * (xe[j] - xe[i])
            if r > rhi:
                break
            m, c, num, mn = _ball_accumulate(bounds, vl, vr, w, xe[i], xe[j], p)
            if m <= 0.0:
                continue
            val = (num / m) ** (1.0 / p) if mode == 0 else c - mn
            if val > best:
                best = val
                bi = i
                bj = j
    return best, bi, bj


@njit(cache=True)
def pair_field(xe, cwe, cfe, alpha, rlo, rhi, out_val, out_i, out_j):
    """Sup over endpoint pairs of r_eff^alpha * mean, per interior site.

    xe are sorted candidate endpoints; cwe/cfe are prefix mass and
    prefix integral of |f| * density at these endpoints.  A site k is
    strictly inside pair (i, j) iff i < k < j.  The radius window is
    half-open, rlo <= r < rhi, so a local/global split at a cutoff
    recombines to the full field exactly.  Ties prefer the smaller
    radius, then the smaller center.
    """
    K = xe.size
    for i in range(K - 2):
        vmax = -np.inf
        jmax = -1
        for j in range(K - 1, i, -1):
            r = 0.5 * (xe[j] - xe[i])
            if rlo <= r < rhi:
                m = cwe[j] - cwe[i]
                if m > 0.0:
                    val = (cfe[j] - cfe[i]) / m
                    if alpha != 0.0:
                        val *= r ** alpha
                    if val > vmax or (val == vmax and jmax >= 0 and j < jmax):
                        vmax = val
                        jmax = j
            k = j - 1
            if k > i and k < K - 1 and jmax >= 0:
                if vmax > out_val[k]:
                    out_val[k] = vmax
                    out_i[k] = i
                    out_j[k] = jmax
                elif vmax == out_val[k] and out_j[k] >= 0:
                    r_new = xe[jmax] - xe[i]
                    r_old = xe[out_j[k]] - xe[out_i[k]]
                    if r_new < r_old or (r_new == r_old and
                                         xe[i] + xe[jmax] < xe[out_i[k]] + xe[out_j[k]]):
                        out_i[k] = i
                        out_j[k] = jmax


@njit(cache=True)
def sliding_window_max(xs, vals, radius, out, arg):
    """out[k] = max of vals over centers c with |xs[k] - xs[c]| < radius."""
    n = xs.size
    dq = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    right = 0
    for k in range(n):
        while right < n and xs[right] < xs[k] + radius:
            while tail > head and vals[dq[tail - 1]] < vals[right]:
                tail -= 1
            dq[tail] = right
            tail += 1
            right += 1
        while head < tail and xs[dq[head]] <= xs[k] - radius:
            head += 1
        if head < tail:
            out[k] = vals[dq[head]]
            arg[k] = dq[head]
        else:
            out[k] = -np.inf
            arg[k] = -1
