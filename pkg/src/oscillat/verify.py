"""Numerical checks of the theorem-level inequalities.

Each check returns a CheckReport: whether the contract held, the worst
left/right ratio, the fitted constant standing in for the theorem's
non-explicit C, and up to ten worst witnesses.  Exact laws (pointwise
sublinearity, contraction) are asserted at 1e-12 slack; everything else
is acceptance by "finite and stable under refinement", the desk-scale
reading of existential constants.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .covers import build_cover, build_partition, discrete_convolution
from .functions import SampledFunction, field_lp_norm, field_superlevel_measure
from .maximal import (BallFamily, MaximalField, conjugate_exponent,
                      fractional_maximal, local_global_split)
from .oscillation import bmo_norm, oscillation_modulus, p_oscillation
from .space import Ball, Space

EXACT_SLACK = 1e-12
WEAK_TYPE_THRESHOLDS = 64


def _digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class CheckReport:
    name: str
    holds: bool
    worst_ratio: float
    fitted_constant: float
    witnesses: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def digest(self) -> str:
        return _digest(self.config)

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": bool(self.holds),
                "worst_ratio": float(self.worst_ratio),
                "fitted_constant": float(self.fitted_constant),
                "witnesses": self.witnesses, "notes": self.notes,
                "config": self.config, "config_digest": self.digest}


def _top_witnesses(points, ratios, k=10):
    order = np.argsort(ratios)[::-1][:k]
    return [{"site": float(points[i]), "ratio": float(ratios[i])} for i in order]


# ------------------------------------------------------------- exact laws


def check_sublinearity(space: Space, f: SampledFunction, g: SampledFunction,
                       alpha: float, family: BallFamily,
                       q_exponent: float | None = None) -> CheckReport:
    """M(f+g) <= Mf + Mg and |Mf - Mg| <= M(f-g), pointwise and exact."""
    mf = fractional_maximal(space, f, alpha, family, q_exponent).values
    mg = fractional_maximal(space, g, alpha, family, q_exponent).values
    msum = fractional_maximal(space, f + g, alpha, family, q_exponent).values
    mdiff = fractional_maximal(space, f - g, alpha, family, q_exponent).values
    ok = np.isfinite(mf) & np.isfinite(mg) & np.isfinite(msum) & np.isfinite(mdiff)
    slack_sub = msum[ok] - (mf[ok] + mg[ok])
    slack_con = np.abs(mf[ok] - mg[ok]) - mdiff[ok]
    worst = float(max(slack_sub.max(initial=-np.inf),
                      slack_con.max(initial=-np.inf)))
    rhs_sub = mf[ok] + mg[ok]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs_sub > 0, msum[ok] / rhs_sub, 1.0)
    report = CheckReport(
        name="sublinearity",
        holds=worst <= EXACT_SLACK,
        worst_ratio=float(np.nanmax(ratios)),
        fitted_constant=float(np.nanmax(ratios)),
        witnesses=_top_witnesses(space.points[ok], ratios),
        config={"alpha": alpha, "family_size": family.size, "slack": worst})
    return report


# ------------------------------------------------------------- Lp comparisons


def check_pointwise_comparison(space: Space, f: SampledFunction, alpha: float,
                               p: float, family: BallFamily, q_exponent: float,
                               refined=None) -> CheckReport:
    """Fitted constant in M^a f <= C ||f||_p^{ap/Q} (Mf)^{1-ap/Q}."""
    if p < 1:
        raise ValueError("need p >= 1")
    if not (0 < alpha and (alpha < q_exponent if p == 1 else alpha * p <= q_exponent)):
        raise ValueError("need 0 < alpha <= Q/p (alpha < Q when p = 1)")
    fitted, ratios = _pointwise_comparison_fit(space, f, alpha, p, family, q_exponent)
    holds = np.isfinite(fitted)
    notes = []
    if refined is not None:
        space2, family2 = refined
        f2 = _transfer(f, space2)
        fitted2, _ = _pointwise_comparison_fit(space2, f2, alpha, p, family2, q_exponent)
        drift = abs(fitted2 - fitted) / max(fitted, 1e-300)
        holds = holds and np.isfinite(fitted2) and drift < 0.2
        notes.append({"refined_constant": float(fitted2), "drift": float(drift)})
    return CheckReport(name="pointwise-comparison", holds=bool(holds),
                       worst_ratio=float(fitted), fitted_constant=float(fitted),
                       witnesses=_top_witnesses(space.points, ratios),
                       config={"alpha": alpha, "p": p, "q": q_exponent},
                       notes=notes)


def _pointwise_comparison_fit(space, f, alpha, p, family, q):
    norm = f.lp_norm(p)
    if norm <= 0:
        raise ValueError("need ||f||_p > 0")
    m0 = fractional_maximal(space, f, 0.0, family).values
    ma = fractional_maximal(space, f, alpha, family, q).values
    expo = alpha * p / q
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = norm ** expo * np.where(m0 > 0, m0, np.nan) ** (1.0 - expo)
        ratios = ma / denom
    fitted = float(np.nanmax(ratios))
    return fitted, np.nan_to_num(ratios, nan=0.0)


def _transfer(f: SampledFunction, space2: Space) -> SampledFunction:
    """Same function on a refined grid of the same interval."""
    return SampledFunction.piecewise_linear(space2, f.bx, f.by)


def check_operator_norms(space: Space, functions, alpha: float, p: float,
                         family: BallFamily, q_exponent: float,
                         refined=None) -> CheckReport:
    """Weak-type (p=1) or strong-type (p>1) operator-norm ratios."""
    fitted, per_fn = _operator_norm_fit(space, functions, alpha, p, family, q_exponent)
    notes = [{"per_function": per_fn}]
    holds = np.isfinite(fitted)
    if refined is not None:
        space2, family2 = refined
        fns2 = [_transfer(fn, space2) for fn in functions]
        fitted2, _ = _operator_norm_fit(space2, fns2, alpha, p, family2, q_exponent)
        drift = abs(fitted2 - fitted) / max(fitted, 1e-300)
        holds = holds and np.isfinite(fitted2) and drift < 0.2
        notes.append({"refined_constant": float(fitted2), "drift": float(drift)})
    # exact scale invariance under f -> 10f for the first function
    fn = functions[0]
    r1, _ = _operator_norm_fit(space, [fn], alpha, p, family, q_exponent)
    r2, _ = _operator_norm_fit(space, [fn * 10.0], alpha, p, family, q_exponent)
    scale_err = abs(r1 - r2) / max(r1, 1e-300)
    holds = holds and scale_err <= 1e-9
    notes.append({"scale_invariance_error": float(scale_err)})
    return CheckReport(name="operator-norms", holds=bool(holds),
                       worst_ratio=float(fitted), fitted_constant=float(fitted),
                       config={"alpha": alpha, "p": p, "q": q_exponent,
                               "n_functions": len(functions)},
                       notes=notes)


def _operator_norm_fit(space, functions, alpha, p, family, q):
    if alpha * p > q or (p == 1 and alpha >= q):
        raise ValueError("need alpha <= Q/p (alpha < Q when p = 1)")
    best = -np.inf
    per_fn = []
    for fn in functions:
        norm = fn.lp_norm(p)
        if norm <= 0:
            continue
        field_vals = fractional_maximal(space, fn, alpha, family,
                                        q if alpha > 0 else None).values
        if p == 1:
            t = np.geomspace(max(field_vals[field_vals > 0].min(), 1e-12),
                             field_vals.max(), WEAK_TYPE_THRESHOLDS)
            mu = field_superlevel_measure(space, field_vals, t)
            ratio = float(np.max(t * mu ** ((q - alpha) / q)) / norm)
        else:
            pstar = conjugate_exponent(p, alpha, q)
            if not np.isfinite(pstar):
                per_fn.append(None)   # endpoint: strong-type check skipped
                continue
            ratio = float(field_lp_norm(space, field_vals, pstar) / norm)
        per_fn.append(ratio)
        best = max(best, ratio)
    return float(best), per_fn


# ------------------------------------------------------------- BMO -> BLO


def check_blo_bound(space: Space, functions, alpha: float, family: BallFamily,
                    test_family: BallFamily, q_exponent: float,
                    refined=None) -> CheckReport:
    """Fitted C in  mean_B(M^a f) - essinf_B(M^a f)
    <= C (mu(X)^{a/Q} + diam^a) ||f||_BMO over the test family."""
    fitted, per_fn = _blo_fit(space, functions, alpha, family, test_family, q_exponent)
    notes = [{"per_function": per_fn}]
    holds = np.isfinite(fitted)
    if refined is not None:
        space2, family2, test2 = refined
        fns2 = [_transfer(fn, space2) for fn in functions]
        fitted2, _ = _blo_fit(space2, fns2, alpha, family2, test2, q_exponent)
        drift = abs(fitted2 - fitted) / max(fitted, 1e-300)
        holds = holds and np.isfinite(fitted2) and drift < 0.2
        notes.append({"refined_constant": float(fitted2), "drift": float(drift)})
    return CheckReport(name="blo-bound", holds=bool(holds), worst_ratio=fitted,
                       fitted_constant=fitted,
                       config={"alpha": alpha, "q": q_exponent,
                               "n_functions": len(functions)},
                       notes=notes)


def _blo_fit(space, functions, alpha, family, test_family, q):
    from .oscillation import blo_gauge
    scale = space.total_mass ** (alpha / q) + space.diameter() ** alpha
    best = -np.inf
    per_fn = []
    for fn in functions:
        bmo = bmo_norm(space, fn, 1.0, family).value
        if bmo <= 1e-14:
            per_fn.append(None)      # constants excluded: ||f||_BMO = 0
            continue
        mfield = fractional_maximal(space, fn, alpha, family,
                                    q if alpha > 0 else None)
        gauge = blo_gauge(space, mfield.as_function(), test_family).value
        ratio = gauge / (scale * bmo)
        per_fn.append(float(ratio))
        best = max(best, ratio)
    return float(best), per_fn


# ------------------------------------------------------------- local/global


def check_oscillation_lemmas(space: Space, f: SampledFunction, alpha: float,
                             lam: float, family: BallFamily, test_balls,
                             q_exponent: float, beta: float) -> CheckReport:
    """Local and global oscillation bounds for the split maximal function.

    Local: O(M_loc, B) <= C lam^{Q/p} mu(B)^{a/Q} O_p(f, 3 lam B) with
    p = 2Q/(Q + a).  Global (lam >= 4): O(M_glob, B) <= C diam^a
    (lam^{-b} log lam + lam^{-b}) ||f||_BMO.
    """
    if lam < 4:
        raise ValueError("global oscillation lemma needs lambda >= 4")
    q = q_exponent
    p = 2.0 * q / (q + alpha)
    bmo = bmo_norm(space, f, 1.0, family).value
    diam = space.diameter()
    envelope = lam ** (-beta) * np.log(lam) + lam ** (-beta)
    loc_ratios, glob_ratios, notes = [], [], []
    for ball in test_balls:
        r = ball.radius
        if 3.0 * lam * r >= 2.0 * diam:
            notes.append({"skipped_ball": (float(ball.center), float(r)),
                          "reason": "3 lam B exceeds the radius range"})
            continue
        loc, glob = local_global_split(space, f, alpha, lam, r, family,
                                       q if alpha > 0 else None)
        osc_p_big = p_oscillation(space, f, ball.scaled(3.0 * lam), p)
        denom_loc = lam ** (q / p) * ball.measure ** (alpha / q) * osc_p_big
        if denom_loc > 0 and np.all(np.isfinite(loc.values)):
            osc_loc = p_oscillation(space, loc.as_function(), ball, 1.0)
            loc_ratios.append(osc_loc / denom_loc)
        if bmo > 1e-14 and np.any(np.isfinite(glob.values)):
            osc_glob = p_oscillation(space, glob.as_function(), ball, 1.0)
            glob_ratios.append(osc_glob / (diam ** alpha * envelope * bmo))
    fitted = float(max(loc_ratios + glob_ratios, default=np.nan))
    holds = np.isfinite(fitted)
    return CheckReport(
        name="oscillation-lemmas", holds=bool(holds), worst_ratio=fitted,
        fitted_constant=fitted,
        config={"alpha": alpha, "lambda": lam, "q": q, "beta": beta,
                "p": p, "envelope": float(envelope)},
        notes=notes + [{"local_ratios": [float(x) for x in loc_ratios],
                        "global_ratios": [float(x) for x in glob_ratios]}])


def global_oscillation_sweep(space, f, alpha, lambdas, family, test_balls,
                             q_exponent, beta):
    """Measured global oscillations and envelopes across a lambda sweep."""
    rows = []
    diam = space.diameter()
    bmo = bmo_norm(space, f, 1.0, family).value
    for lam in lambdas:
        envelope = lam ** (-beta) * np.log(lam) + lam ** (-beta)
        measured = []
        for ball in test_balls:
            _, glob = local_global_split(space, f, alpha, lam, ball.radius,
                                         family, q_exponent if alpha > 0 else None)
            if np.any(np.isfinite(glob.values)):
                measured.append(p_oscillation(space, glob.as_function(), ball, 1.0))
        rows.append({"lambda": float(lam), "envelope": float(envelope),
                     "bound": float(envelope * diam ** alpha * bmo),
                     "measured": [float(m) for m in measured]})
    return rows


# ------------------------------------------------------------- Sarason route


def seeded_interval_space(seed: int, n_grid: int = 256,
                          a: float = 0.0, b: float = 2.0) -> Space:
    """Random weighted interval: 3..7 density pieces, values in [0.2, 5]."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, 8))
    cuts = np.sort(rng.uniform(a, b, size=k - 1))
    dens_x = np.concatenate([[a], cuts, [b]])
    dens_w = rng.uniform(0.2, 5.0, size=k)
    return Space.uniform_interval(a, b, n_grid, dens_x, dens_w, extra_grid=cuts)


def seeded_piecewise_linear(space: Space, seed: int, knots: int = 10,
                            scale: float = 1.0) -> SampledFunction:
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(space.a, space.b, size=knots))
    xs = np.concatenate([[space.a], xs, [space.b]])
    ys = rng.normal(0.0, scale, size=xs.size)
    return SampledFunction.piecewise_linear(space, xs, ys)


def standard_battery(space: Space) -> list:
    """Fixed function battery on an interval space: ramp, tent train,
    step, piecewise-linear sine, and two seeded random functions."""
    a, b = space.a, space.b
    ramp = SampledFunction.piecewise_linear(space, [a, b], [a, b])
    k = max(int((b - a) * 4), 4)
    bx = a + np.arange(2 * k + 1) * (b - a) / (2 * k)
    by = np.where(np.arange(bx.size) % 2 == 1, 1.0, 0.0)
    tent = SampledFunction.piecewise_linear(space, bx, by)
    mid = (a + b) / 2.0
    step = SampledFunction.piecewise_linear(space, [a, mid, mid, b],
                                            [1.0, 1.0, 0.0, 0.0])
    sx = np.linspace(a, b, 129)
    sinpl = SampledFunction.piecewise_linear(space, sx,
                                             np.sin(3.0 * np.pi * (sx - a) / (b - a)))
    return [ramp, tent, step, sinpl,
            seeded_piecewise_linear(space, 7), seeded_piecewise_linear(space, 11)]


def sarason_profile(space: Space, f: SampledFunction, deltas, p: float,
                    family: BallFamily, floor_balls=()) -> CheckReport:
    """||f - f_delta||_BMO against C * omega_p(f, 7 delta) along a delta grid.

    floor_balls, when given, also record the oscillation of f - f_delta
    on named witness balls (the non-decay floor for non-VMO inputs).
    """
    deltas = list(deltas)
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    rows = []
    worst = -np.inf
    for d in deltas:
        fd = discrete_convolution(space, f, d)
        dist = bmo_norm(space, f - fd, 1.0, family).value
        omega = oscillation_modulus(space, f, 7.0 * d, p, family)
        floor = max((p_oscillation(space, f - fd, b, 1.0) for b in floor_balls),
                    default=np.nan)
        ratio = dist / omega if omega > 0 else np.inf
        worst = max(worst, ratio)
        rows.append({"delta": float(d), "distance": float(dist),
                     "omega_7d": float(omega), "ratio": float(ratio),
                     "witness_floor": float(floor)})
    return CheckReport(name="sarason-profile",
                       holds=bool(np.isfinite(worst)),
                       worst_ratio=float(worst), fitted_constant=float(worst),
                       config={"p": p, "deltas": [float(d) for d in deltas]},
                       notes=rows)


def coarse_test_family(space: Space, max_endpoints: int = 65) -> BallFamily:
    """Strided pair family used as the set of test balls in ball-wise checks."""
    xe = space.endpoints
    stride = max(xe.size // max_endpoints, 1)
    sub = np.unique(np.concatenate([xe[::stride], xe[-1:]]))
    gaps = np.diff(sub)
    return BallFamily(space=space, convention="intrinsic",
                      r_min=float(gaps[gaps > 0].min()) / 2.0,
                      r_max=(space.b - space.a) / 2.0 + 1e-12,
                      endpoints=sub)


# ------------------------------------------------------------- suite runner


def run_suite(name: str, space: Space | None = None, n_grid: int = 512,
              seed: int = 0) -> list:
    """Named verify suites for the CLI; smaller versions of the
    acceptance-scale runs, on the standard battery unless a space is given."""
    from .gallery import build_example
    from .maximal import default_family, enumerate_balls

    if name == "all":
        out = []
        for sub in ("sublinearity", "types", "blo", "osc-lemmas", "sarason"):
            out.extend(run_suite(sub, space=space, n_grid=n_grid, seed=seed))
        return out

    q = 1.0
    if name == "sublinearity":
        reports = []
        for s in range(3):
            sp = space or seeded_interval_space(seed + s, n_grid=min(n_grid, 256))
            fam = default_family(sp)
            for k in range(4):
                f = seeded_piecewise_linear(sp, seed + 100 * s + k)
                g = seeded_piecewise_linear(sp, seed + 100 * s + k + 50)
                alpha = 0.0 if k % 2 == 0 else 0.5
                reports.append(check_sublinearity(sp, f, g, alpha, fam, q))
            if space is not None:
                break
        return reports

    sp = space or Space.uniform_interval(0.0, 2.0, n_grid)
    fam = default_family(sp)
    battery = standard_battery(sp)
    sp2 = Space.uniform_interval(sp.a, sp.b, 2 * n_grid)
    fam2 = default_family(sp2)

    if name == "types":
        reports = [check_pointwise_comparison(sp, battery[0], 0.5, 1.0, fam, q,
                                              refined=(sp2, fam2))]
        for p in (1.0, 4.0 / 3.0):
            reports.append(check_operator_norms(sp, battery, 0.5, p, fam, q,
                                                refined=(sp2, fam2)))
        return reports

    if name == "blo":
        test = coarse_test_family(sp)
        test2 = coarse_test_family(sp2)
        return [check_blo_bound(sp, battery, alpha, fam, test, q,
                                refined=(sp2, fam2, test2))
                for alpha in (0.0, 0.5)]

    if name == "osc-lemmas":
        from .space import fit_annular_decay
        beta = fit_annular_decay(sp).annular[0]
        tent = battery[1]
        r = sp.diameter() / 64.0
        test_balls = [sp.ball(sp.a + frac * (sp.b - sp.a), r)
                      for frac in (0.3, 0.5, 0.7)]
        return [check_oscillation_lemmas(sp, tent, alpha, lam, fam, test_balls,
                                         q, beta)
                for alpha in (0.0, 0.5) for lam in (4.0, 8.0, 16.0)]

    if name == "sarason":
        two_pi = 2.0 * np.pi
        ssp = Space.uniform_interval(0.0, two_pi, n_grid)
        sx = np.linspace(0.0, two_pi, 257)
        sine = SampledFunction.piecewise_linear(ssp, sx, np.sin(sx))
        sfam = default_family(ssp)
        rep = sarason_profile(ssp, sine, [2.0 ** -k for k in range(1, 7)],
                              1.0, sfam)
        ex = build_example("vmomu-not-vmo", n_grid=max(n_grid, 1024))
        exfam = enumerate_balls(ex.space, 1e-3, 1.0).with_extras(ex.witness_balls)
        rep2 = sarason_profile(ex.space, ex.f, [2.0 ** -k for k in range(1, 7)],
                               1.0, exfam, floor_balls=ex.witness_balls)
        rep2.name = "sarason-profile-non-vmo"
        return [rep, rep2]

    raise ValueError(f"unknown suite {name!r}")
