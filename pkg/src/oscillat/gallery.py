"""Named example spaces and functions with closed-form oracles.

Five constructions: the weighted-ray pair separating the two vanishing-
oscillation classes (radius-vanishing vs measure-vanishing), and the
three discontinuity witnesses for the maximal operator.  Unbounded rays
are truncated to (0, L); the truncation deficit is part of the oracle
where it matters (the flat-level example reads n - (1-x)^2 / (2(L-x))
instead of the exact constant n, recovering it as L grows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import SampledFunction
from .maximal import BallFamily, default_family, fractional_maximal
from .oscillation import bmo_norm, p_oscillation
from .space import Ball, Space
from .verify import CheckReport

GALLERY_NAMES = ("vmo-not-vmomu", "vmomu-not-vmo", "unbounded-discont",
                 "bounded-discont-M", "bounded-discont-Malpha")
MIN_GRID = 256


@dataclass(frozen=True, eq=False)
class NamedExample:
    name: str
    space: Space
    f: SampledFunction
    alpha: float
    truncation: float | None
    witness_balls: tuple
    oracle_region: tuple
    params: dict = field(default_factory=dict)

    def shifted(self, n: float) -> SampledFunction:
        """f_n = f - n."""
        return self.f - float(n)


def _tent_train_breakpoints(L: int):
    """Unit tents on every [n, n+1): peaks at half-integers."""
    bx = np.arange(0, 2 * L + 1) / 2.0
    by = np.where(np.arange(bx.size) % 2 == 1, 1.0, 0.0)
    return bx, by


def build_example(name: str, n_grid: int = 4000, truncation: float = 64.0,
                  alpha: float = 0.5) -> NamedExample:
    """Construct a named example with its exact weights and functions."""
    if name not in GALLERY_NAMES:
        raise ValueError(f"unknown example {name!r}; choose from {GALLERY_NAMES}")
    if n_grid < MIN_GRID:
        raise ValueError(f"need n_grid >= {MIN_GRID}")

    if name == "vmo-not-vmomu":
        L = int(truncation)
        dens_x = np.arange(0, L + 1, dtype=float)
        dens_w = 1.0 / np.sqrt(np.arange(1, L + 1, dtype=float))
        bx, by = _tent_train_breakpoints(L)
        space = Space.uniform_interval(0.0, float(L), n_grid, dens_x, dens_w,
                                       extra_grid=bx)
        f = SampledFunction.piecewise_linear(space, bx, by)
        witnesses = tuple(space.interval_ball(n, n + 1) for n in range(L))
        return NamedExample(name=name, space=space, f=f, alpha=0.0,
                            truncation=float(L), witness_balls=witnesses,
                            oracle_region=(0.0, float(L)),
                            params={"n_grid": n_grid})

    if name == "vmomu-not-vmo":
        L = int(truncation)
        n_max = int(math.isqrt(L - 1))        # largest n with n^2 < L
        dens_x = np.arange(0, L + 1, dtype=float)
        dens_w = np.arange(1, L + 1, dtype=float)
        bx, by = [0.0], [0.0]
        for n in range(1, n_max + 1):
            s = 1.0 / (n + 1)
            bx += [n * n, n * n + s / 2.0, n * n + s]
            by += [0.0, 1.0, 0.0]
        bx.append(float(L))
        by.append(0.0)
        space = Space.uniform_interval(0.0, float(L), n_grid, dens_x, dens_w,
                                       extra_grid=bx)
        f = SampledFunction.piecewise_linear(space, bx, by)
        witnesses = tuple(space.interval_ball(n * n, n * n + 1.0 / (n + 1))
                          for n in range(1, n_max + 1))
        return NamedExample(name=name, space=space, f=f, alpha=0.0,
                            truncation=float(L), witness_balls=witnesses,
                            oracle_region=(0.0, float(L)),
                            params={"n_grid": n_grid, "n_max": n_max})

    if name == "unbounded-discont":
        L = float(truncation)
        space = Space.uniform_interval(0.0, L, n_grid, extra_grid=[1.0],
                                       truncated_from_unbounded=True)
        f = SampledFunction.piecewise_linear(space, [0.0, 1.0, L], [1.0, 0.0, 0.0])
        return NamedExample(name=name, space=space, f=f, alpha=0.0,
                            truncation=L, witness_balls=(),
                            oracle_region=(0.0, 1.0), params={"n_grid": n_grid})

    # the two bounded discontinuity examples share the space and function
    space = Space.uniform_interval(0.0, 2.0, n_grid, extra_grid=[1.0])
    f = SampledFunction.piecewise_linear(space, [0.0, 1.0, 2.0], [0.0, 0.0, 1.0])
    a = 0.0 if name == "bounded-discont-M" else float(alpha)
    if name == "bounded-discont-Malpha" and not (0 < a < 1):
        raise ValueError("need 0 < alpha < 1")
    return NamedExample(name=name, space=space, f=f, alpha=a,
                        truncation=None, witness_balls=(),
                        oracle_region=(0.0, 1.0), params={"n_grid": n_grid})


def evaluate_oracle(example: NamedExample, x, n: float | None = None):
    """Closed-form value of the relevant maximal field at x.

    For the bounded examples this is M^alpha f (or M^alpha f_n when n is
    given); for the truncated ray it is the deficit-corrected flat level.
    Outside the derived region the value is NaN (undefined-flag).
    """
    x = np.asarray(x, dtype=float)
    lo, hi = example.oracle_region
    out = np.full(x.shape, np.nan)
    inside = (x > lo) & (x < hi)
    if example.name == "bounded-discont-M":
        if n is None:
            out[inside] = 1.0 / (2.0 * (2.0 - x[inside]))
        else:
            out[inside] = float(n)
    elif example.name == "bounded-discont-Malpha":
        a = example.alpha
        if n is None:
            out[inside] = 1.0 / (2.0 ** (a + 1.0) * (2.0 - x[inside]) ** (1.0 - a))
        else:
            if n <= 1.0 / a:
                raise ValueError("flat-level formula needs n > 1/alpha")
            out[inside] = float(n) - 0.25
    elif example.name == "unbounded-discont":
        L = example.truncation
        if n is None:
            out[inside] = 1.0 - x[inside] / 2.0
        else:
            out[inside] = float(n) - (1.0 - x[inside]) ** 2 / (2.0 * (L - x[inside]))
    else:
        # the oscillation oracles: 1/4 on every witness ball
        raise ValueError("this example's oracle is the per-witness oscillation 1/4")
    return out if out.shape else float(out)


def continuity_experiment(name: str, n_range, alpha: float = 0.5,
                          n_grid: int = 2000,
                          family: BallFamily | None = None) -> CheckReport:
    """Discontinuity witness: f_n -> f in BMO while the maximal images
    keep an oscillation gap on (0, 1) bounded away from zero."""
    if name not in ("unbounded-discont", "bounded-discont-M",
                    "bounded-discont-Malpha"):
        raise ValueError("not a discontinuity example")
    ex = build_example(name, n_grid=n_grid, alpha=alpha)
    space = ex.space
    fam = default_family(space) if family is None else family
    q = 1.0
    probe = space.interval_ball(0.0, 1.0)
    base = fractional_maximal(space, ex.f, ex.alpha, fam,
                              q if ex.alpha > 0 else None)
    base_fn = base.as_function()
    rows = []
    min_gap = np.inf
    max_norm_diff = 0.0
    for n in n_range:
        fn = ex.shifted(n)
        norm_diff = bmo_norm(space, fn - ex.f, 1.0, fam).value
        mfn = fractional_maximal(space, fn, ex.alpha, fam,
                                 q if ex.alpha > 0 else None)
        gap = p_oscillation(space, mfn.as_function() - base_fn, probe, 1.0)
        rows.append({"n": float(n), "bmo_f_n_minus_f": float(norm_diff),
                     "gap_on_unit_interval": float(gap)})
        min_gap = min(min_gap, gap)
        max_norm_diff = max(max_norm_diff, norm_diff)
    holds = max_norm_diff <= 1e-12 and min_gap > 0
    return CheckReport(name=f"continuity:{name}", holds=bool(holds),
                       worst_ratio=float(min_gap), fitted_constant=float(min_gap),
                       config={"alpha": ex.alpha, "n_grid": n_grid,
                               "n_range": [float(n) for n in n_range]},
                       notes=rows)
