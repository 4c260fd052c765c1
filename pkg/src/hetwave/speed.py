"""Wave-speed determination by sign bisection on the minimized action.

For c below the wave speed the constrained minimum of the weighted action is
negative (membership in the speed set); at and above it the minimum is >= 0,
and exactly 0 at the speed for every large enough cylinder offset L. The speed
is therefore bracketed a priori by

    c_max = sqrt(2 W^-(a^-)) / d0,
    c_min = sup_t  W^-(a^-) e^{-2 t c_max} /
            ( (1/2)(|a+ - a-|/(2t))^2 * 2t + int_{-t}^{t} W^+(affine ramp) dx ),

and located by bisecting the predicate "minimized action < -tol_E". The
membership value is normalized at the rim abscissa (factor e^{-c(L - x_ref)}),
which makes the bisection path exactly independent of the grid's weight
normalization. After bisection the wave is re-centered so its sublevel exit
sits at x = 0 and re-solved once with L doubled to confirm a zero action with
no active constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constrained_min import ConstraintSpec, MinimizeResult, minimize
from .geometry import GeometryReport
from .grid_action import (Grid, Profile, action, affine_seed, make_grid,
                          recenter_values)
from .potentials import PotentialSpec

__all__ = [
    "SpeedBracket",
    "SpeedResult",
    "SolveOptions",
    "speed_bounds",
    "min_action",
    "solve_speed",
    "uniqueness_check",
    "UniquenessReport",
]


@dataclass(frozen=True)
class SpeedBracket:
    c_min: float
    c_max: float
    d0: float
    t_star: float

    def __post_init__(self):
        if not (0.0 < self.c_min <= self.c_max):
            raise ValueError(f"degenerate speed bracket [{self.c_min}, {self.c_max}]")


@dataclass
class SolveOptions:
    M: float
    h: float
    L: float
    r0: float
    alpha: float
    tol_c: Optional[float] = None      # default 1e-4 * c_max
    tol_E: float = 1e-5                # zero band for the scaled action at x_ref = L
    tol_g: float = 1e-7
    max_iter: int = 100000
    seed_t: Optional[float] = None     # affine seed half-width; default min(L, 2)


@dataclass
class SpeedResult:
    c_star: float
    wave: Profile
    action_at_c_star: float
    trace: list = field(default_factory=list)  # (c, minimized action at rim scale, rim-, rim+)
    L_used: float = 0.0
    M_used: float = 0.0
    tol_c: float = 0.0
    tol_E: float = 0.0
    rim_free: bool = False
    bracket: Optional[SpeedBracket] = None
    confirm: Optional[MinimizeResult] = None
    retried_larger_M: bool = False

    def to_dict(self) -> dict:
        return {
            "c_star": self.c_star,
            "action_at_c_star": self.action_at_c_star,
            "trace": [list(t) for t in self.trace],
            "L_used": self.L_used,
            "M_used": self.M_used,
            "tol_c": self.tol_c,
            "tol_E": self.tol_E,
            "rim_free": self.rim_free,
            "bracket": None if self.bracket is None else {
                "c_min": self.bracket.c_min, "c_max": self.bracket.c_max,
                "d0": self.bracket.d0, "t_star": self.bracket.t_star,
            },
            "retried_larger_M": self.retried_larger_M,
        }


def speed_bounds(p: PotentialSpec, geo: GeometryReport) -> SpeedBracket:
    """A priori bracket [c_min, c_max] from the geometry report's d0."""
    if geo.d0 <= 0.0:
        raise ValueError("degenerate geometry: d0 <= 0")
    wminus = p.w_minus_at_a_minus
    c_max = math.sqrt(2.0 * wminus) / geo.d0
    sep = p.a_plus - p.a_minus
    best, t_star = -np.inf, np.nan
    for t in np.geomspace(0.05, 50.0, 32):
        xs = np.linspace(-t, t, 512)
        ramp = p.a_minus[None, :] + ((xs + t) / (2.0 * t))[:, None] * sep[None, :]
        w_plus = np.maximum(p.eval(ramp), 0.0)
        trapz = getattr(np, "trapezoid", np.trapz)
        denom = (0.5 * (np.linalg.norm(sep) / (2.0 * t)) ** 2 * (2.0 * t)
                 + float(trapz(w_plus, xs)))
        val = wminus * math.exp(-2.0 * t * c_max) / denom
        if val > best:
            best, t_star = val, float(t)
    return SpeedBracket(c_min=float(best), c_max=float(c_max), d0=float(geo.d0),
                        t_star=t_star)


def min_action(c: float, p: PotentialSpec, cs: ConstraintSpec, grid: Grid,
               warm: Optional[Profile] = None, tol_g: float = 1e-7,
               max_iter: int = 100000, alpha: Optional[float] = None,
               seed_t: Optional[float] = None) -> tuple[float, MinimizeResult]:
    """Minimized action at speed c, normalized at the rim abscissa.

    Solves from the affine competitor and, when given, from a warm-start
    profile, and keeps the lower action of the two.
    """
    t = seed_t if seed_t is not None else min(cs.L, 2.0)
    best = minimize(c, cs, affine_seed(grid, p, t), p, tol_g=tol_g,
                    max_iter=max_iter, alpha=alpha)
    if warm is not None:
        other = minimize(c, cs, warm, p, tol_g=tol_g, max_iter=max_iter, alpha=alpha)
        if other.action.scaled_total < best.action.scaled_total:
            best = other
    rim_scaled = best.action.rescaled(cs.L).scaled_total
    return rim_scaled, best


def _recenter_to_alpha_exit(res: MinimizeResult, p: PotentialSpec) -> Profile:
    """Integer-cell translation of the values so that lambda_alpha- ~ 0."""
    lam = res.lambda_alpha_minus
    if lam is None:
        lam = res.lambda_plus if res.lambda_plus is not None else 0.0
    k = int(round(lam / res.profile.grid.spacing))
    if k == 0:
        return res.profile
    return recenter_values(res.profile, k, p)


def solve_speed(p: PotentialSpec, geo: GeometryReport, opts: SolveOptions) -> SpeedResult:
    """Bisection for c* = sup{c : minimized action < -tol_E} with confirmation."""
    bracket = speed_bounds(p, geo)
    tol_c = opts.tol_c if opts.tol_c is not None else 1e-4 * bracket.c_max
    grid = make_grid(opts.M, opts.h, opts.L)
    cs = ConstraintSpec(L=opts.L, r0=opts.r0, a_plus=p.a_plus, a_minus=p.a_minus)
    cs.validate_against(grid)
    kw = dict(tol_g=opts.tol_g, max_iter=opts.max_iter, alpha=opts.alpha,
              seed_t=opts.seed_t)

    trace: list[tuple] = []

    def probe(c: float, warm: Optional[Profile]) -> tuple[bool, float, MinimizeResult]:
        val, res = min_action(c, p, cs, grid, warm=warm, **kw)
        trace.append((c, val, res.rim_contact_minus, res.rim_contact_plus))
        return val < -opts.tol_E, val, res

    c_lo, c_hi = 0.5 * bracket.c_min, bracket.c_max
    in_lo, _, res_lo = probe(c_lo, None)
    in_hi, _, res_hi = probe(c_hi, res_lo.profile)
    if not in_lo:
        raise RuntimeError(
            f"speed predicate false at c = {c_lo:.6g} (below the a priori bracket); "
            "grid too coarse or hypotheses violated; trace: " + repr(trace))
    if in_hi:
        raise RuntimeError(
            f"speed predicate true at c_max = {c_hi:.6g}, violating the sup-C bound; "
            "trace: " + repr(trace))

    warm = res_lo.profile
    while c_hi - c_lo > tol_c:
        c_mid = 0.5 * (c_lo + c_hi)
        inside, _, res_mid = probe(c_mid, warm)
        warm = res_mid.profile
        if inside:
            c_lo = c_mid
        else:
            c_hi = c_mid

    c_star = 0.5 * (c_lo + c_hi)

    retried = False
    for attempt in range(2):
        L2 = 2.0 * cs.L
        M2, grid2 = opts.M, grid
        if L2 >= opts.M - 2.0 * opts.h - 1.0:
            M2 = L2 + (opts.M - cs.L)
            grid2 = make_grid(M2, opts.h, cs.L)
        cs2 = ConstraintSpec(L=L2, r0=cs.r0, a_plus=p.a_plus, a_minus=p.a_minus)

        _, res_star = min_action(c_star, p, cs, grid, warm=warm, **kw)
        centered = _recenter_to_alpha_exit(res_star, p)
        if grid2 is not grid:
            centered = _embed(centered, grid2, p)
        confirm = minimize(c_star, cs2, centered, p, tol_g=opts.tol_g,
                           max_iter=opts.max_iter, alpha=opts.alpha)
        confirm_centered = _recenter_to_alpha_exit(confirm, p)
        confirm = minimize(c_star, cs2, confirm_centered, p, tol_g=opts.tol_g,
                           max_iter=opts.max_iter, alpha=opts.alpha)
        act_rim = confirm.action.rescaled(cs2.L).scaled_total
        rim_free = not (confirm.rim_contact_minus or confirm.rim_contact_plus)
        trace.append((c_star, act_rim, confirm.rim_contact_minus,
                      confirm.rim_contact_plus))
        if rim_free or attempt == 1:
            break
        # rim contact persisted at both L and 2L: grow the window once and retry
        retried = True
        opts = SolveOptions(M=opts.M * 1.5, h=opts.h, L=opts.L, r0=opts.r0,
                            alpha=opts.alpha, tol_c=opts.tol_c, tol_E=opts.tol_E,
                            tol_g=opts.tol_g, max_iter=opts.max_iter,
                            seed_t=opts.seed_t)
        grid = make_grid(opts.M, opts.h, opts.L)
        warm = None  # the enlarged grid invalidates the warm profile

    return SpeedResult(
        c_star=float(c_star),
        wave=confirm.profile,
        action_at_c_star=float(act_rim),
        trace=trace,
        L_used=cs2.L,
        M_used=grid2.half_width,
        tol_c=tol_c,
        tol_E=opts.tol_E,
        rim_free=rim_free,
        bracket=bracket,
        confirm=confirm,
        retried_larger_M=retried,
    )


def _embed(u: Profile, grid2: Grid, p: PotentialSpec) -> Profile:
    """Resample a profile onto a wider grid with the same spacing, padding with a+-."""
    x_old, x_new = u.grid.nodes, grid2.nodes
    vals = np.empty((len(x_new), u.dim))
    for i in range(u.dim):
        vals[:, i] = np.interp(x_new, x_old, u.values[:, i],
                               left=p.a_minus[i], right=p.a_plus[i])
    vals[0] = p.a_minus
    vals[-1] = p.a_plus
    return Profile(grid2, vals, clamped=True)


@dataclass
class UniquenessReport:
    residual: float
    lhs: float
    rhs: float
    action_at_c_alt: float
    negativity_ok: bool

    def to_dict(self) -> dict:
        return {"residual": self.residual, "lhs": self.lhs, "rhs": self.rhs,
                "action_at_c_alt": self.action_at_c_alt,
                "negativity_ok": self.negativity_ok}


def uniqueness_check(wave: Profile, c_star: float, c_alt: float,
                     p: PotentialSpec) -> UniquenessReport:
    """Evaluate the two sides of the speed-uniqueness identity on the wave.

    c1 E_{c1}(U) = (c1 - c2) int |U_x|^2 e^{c1 x} dx
                   + e^{c1 x} (W(U) - |U_x|^2/2) evaluated across the domain,
    with c1 = c_alt, c2 = c_star; boundary derivatives one-sided second order.
    For c_alt < c_star the left side must be negative (the contradiction that
    forces the speed to be unique).
    """
    grid = wave.grid
    x = grid.nodes
    h = grid.spacing
    c1, c2 = c_alt, c_star
    # unnormalized weights; domain sizes keep c1*M well under the guard
    grid0 = Grid(grid.half_width, grid.spacing, 0.0, grid.offset)
    u0 = Profile(grid0, wave.values, wave.clamped)
    e1 = action(c1, u0, p).scaled_total
    lhs = c1 * e1

    du = np.diff(wave.values, axis=0)
    wm = np.exp(c1 * grid0.midpoints)
    kin_int = float(np.sum(np.sum(du * du, axis=1) / h * wm))  # int |U_x|^2 e^{c1 x}

    def one_sided(idx: int, sign: int) -> np.ndarray:
        if sign > 0:
            return (-3.0 * wave.values[idx] + 4.0 * wave.values[idx + 1]
                    - wave.values[idx + 2]) / (2.0 * h)
        return (3.0 * wave.values[idx] - 4.0 * wave.values[idx - 1]
                + wave.values[idx - 2]) / (2.0 * h)

    def bterm(idx: int, sign: int) -> float:
        ux = one_sided(idx, sign)
        w = float(p.eval(wave.values[idx][None, :]))
        return math.exp(c1 * x[idx]) * (w - 0.5 * float(ux @ ux))

    rhs = (c1 - c2) * kin_int + (bterm(len(x) - 1, -1) - bterm(0, +1))
    scale = max(abs(lhs), abs(rhs), 1e-12)
    return UniquenessReport(
        residual=abs(lhs - rhs) / scale,
        lhs=lhs,
        rhs=rhs,
        action_at_c_alt=e1,
        negativity_ok=bool(e1 < 0.0) if c_alt < c_star else True,
    )
