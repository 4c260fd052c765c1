"""Numeric probes for the geometric constants the structural hypotheses need.

For a bistable potential the probe measures, inside a box around the minima:

* the sublevel set {W <= alpha} and its connected components (flood fill for
  N <= 2, ray sampling above);
* d_alpha = dist(C_alpha^-, B(a+, r0)) and its alpha -> 0 limit d0;
* d0_geom = dist between the +-alpha0 level boundaries of the a^- component
  (the margin entering the lambda constraint, distinct from d0);
* the gradient floor c0 = min |grad W| on the zero-level boundary of the a^-
  component, the curvature cap b = max eig Hess W on {W <= 0};
* the radial-monotonicity radius r0_max and floor w*;
* the admissible level bar_alpha0 = c0 * lambda / 4 with
  lambda = min(c0/(2b), d0_geom, 0.9/kappa_max).

Everything is sampled; fields that are only statistically verified carry a
note in ``GeometryReport.notes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .potentials import PotentialSpec, eval_hess

__all__ = ["GeometryReport", "geometry_probe", "default_box", "auto_geometry"]

GATED_FLAGS = ("h", "hstar1", "hstar2", "H3i")


@dataclass
class GeometryReport:
    alpha: float
    r0: float
    d_alpha: float
    d0: float
    d0_geom: float
    component_count: int
    r0_max: float
    w_star: float
    R_alpha_max: float
    c0: float
    b: float
    kappa_max: float
    lambda_margin: float
    alpha_bar0: float
    hypothesis_flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    potential: str = ""

    @property
    def gated_ok(self) -> bool:
        """Conjunction of the flags the solve path actually relies on."""
        return all(bool(self.hypothesis_flags.get(k, False)) for k in GATED_FLAGS)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "r0": self.r0,
            "d_alpha": self.d_alpha,
            "d0": self.d0,
            "d0_geom": self.d0_geom,
            "component_count": self.component_count,
            "r0_max": self.r0_max,
            "w_star": self.w_star,
            "R_alpha_max": self.R_alpha_max,
            "c0": self.c0,
            "b": self.b,
            "kappa_max": self.kappa_max,
            "lambda_margin": self.lambda_margin,
            "alpha_bar0": self.alpha_bar0,
            "hypothesis_flags": dict(self.hypothesis_flags),
            "notes": list(self.notes),
            "potential": self.potential,
        }


def default_box(p: PotentialSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of the minima inflated by factor 2 plus 1.0 absolute margin."""
    lo = np.minimum(p.a_plus, p.a_minus)
    hi = np.maximum(p.a_plus, p.a_minus)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return center - (2.0 * half + 1.0), center + (2.0 * half + 1.0)


def _finite(w: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(w), w, np.inf)


# ----------------------------------------------------------------------
# 1D machinery
# ----------------------------------------------------------------------


def _refine_crossing_1d(p: PotentialSpec, level: float, x_in: float, x_out: float,
                        iters: int = 60) -> float:
    """Bisect for W(x) = level between a point inside (W <= level) and outside."""
    for _ in range(iters):
        mid = 0.5 * (x_in + x_out)
        if float(p.eval(np.array([mid]))) <= level:
            x_in = mid
        else:
            x_out = mid
    return 0.5 * (x_in + x_out)


def _component_1d(p: PotentialSpec, level: float, xs: np.ndarray, ws: np.ndarray,
                  anchor: float) -> Optional[tuple[float, float]]:
    """Refined [lo, hi] of the {W <= level} run containing (the node nearest) anchor."""
    mask = _finite(ws) <= level
    idx = int(np.argmin(np.abs(xs - anchor)))
    if not mask[idx]:
        near = np.nonzero(mask)[0]
        if len(near) == 0:
            return None
        idx = int(near[np.argmin(np.abs(xs[near] - anchor))])
        if abs(xs[idx] - anchor) > 2.0 * (xs[1] - xs[0]):
            return None
    i = idx
    while i > 0 and mask[i - 1]:
        i -= 1
    j = idx
    while j < len(xs) - 1 and mask[j + 1]:
        j += 1
    lo = xs[i] if i == 0 else _refine_crossing_1d(p, level, xs[i], xs[i - 1])
    hi = xs[j] if j == len(xs) - 1 else _refine_crossing_1d(p, level, xs[j], xs[j + 1])
    return float(lo), float(hi)


def _count_components_1d(xs: np.ndarray, ws: np.ndarray, level: float,
                         anchors: list[float]) -> tuple[int, bool]:
    mask = _finite(ws) <= level
    for a in anchors:
        mask[int(np.argmin(np.abs(xs - a)))] = True  # minima always belong
    runs = np.nonzero(np.diff(mask.astype(int)) != 0)[0]
    count = int(np.count_nonzero(np.diff(np.concatenate([[0], mask.astype(int), [0]])) == 1))
    compact = not (mask[0] or mask[-1])
    del runs
    return count, compact


def _interval_gap(a: tuple[float, float], b: tuple[float, float]) -> float:
    return max(0.0, a[0] - b[1], b[0] - a[1])


# ----------------------------------------------------------------------
# 2D / N-D machinery
# ----------------------------------------------------------------------


def _radial_boundary(p: PotentialSpec, level: float, center: np.ndarray,
                     dirs: np.ndarray, r_cap: float) -> np.ndarray:
    """First radius where W(center + r*dir) crosses level, per direction (bisected).

    Valid under radial monotonicity / star-shapedness; directions that never
    cross within r_cap get r_cap (and the caller should flag non-compactness).
    """
    n = len(dirs)
    r = np.zeros(n)
    coarse = np.linspace(0.0, r_cap, 256)[1:]
    pts = center + coarse[None, :, None] * dirs[:, None, :]
    above = _finite(p.eval(pts)) > level
    for k in range(n):
        hit = np.nonzero(above[k])[0]
        if len(hit) == 0:
            r[k] = r_cap
            continue
        i = hit[0]
        r_in = coarse[i - 1] if i > 0 else 0.0
        r_out = coarse[i]
        for _ in range(60):
            mid = 0.5 * (r_in + r_out)
            if float(p.eval(center + mid * dirs[k])) <= level:
                r_in = mid
            else:
                r_out = mid
        r[k] = 0.5 * (r_in + r_out)
    return r


def _polar_curvature_max(r: np.ndarray) -> float:
    """Max curvature of the closed polar curve r(theta), uniform theta spacing."""
    n = len(r)
    dth = 2.0 * np.pi / n
    rp = (np.roll(r, -1) - np.roll(r, 1)) / (2.0 * dth)
    rpp = (np.roll(r, -1) - 2.0 * r + np.roll(r, 1)) / dth**2
    kappa = np.abs(r**2 + 2.0 * rp**2 - r * rpp) / (r**2 + rp**2) ** 1.5
    return float(np.max(kappa))


def _max_hess_eig(p: PotentialSpec, pts: np.ndarray) -> float:
    h = eval_hess(p, pts)
    if p.dim == 1:
        return float(np.max(h[..., 0, 0]))
    eigs = np.linalg.eigvalsh(h)
    return float(np.max(eigs))


def _min_hess_eig(p: PotentialSpec, pts: np.ndarray) -> float:
    h = eval_hess(p, pts)
    if p.dim == 1:
        return float(np.min(h[..., 0, 0]))
    eigs = np.linalg.eigvalsh(h)
    return float(np.min(eigs))


# ----------------------------------------------------------------------
# Radial monotonicity radius
# ----------------------------------------------------------------------


def _radial_mono_ok(p: PotentialSpec, center: np.ndarray, radius: float,
                    dirs: np.ndarray, sign_positive: bool | None) -> bool:
    """Monotone radius test about one minimum, plus the sign condition of the
    constraint cylinders (W >= 0 near a+, W < 0 near a-) when requested."""
    rr = np.linspace(radius / 256.0, radius, 256)
    pts = center + rr[None, :, None] * dirs[:, None, :]
    g = p.grad(pts)
    radial = np.sum(g * dirs[:, None, :], axis=-1)
    if np.min(radial) <= 0.0:
        return False
    if sign_positive is None:
        return True
    w = p.eval(pts)
    if sign_positive:
        return bool(np.min(w) >= -1e-14)
    return bool(np.max(w) < 0.0)


def _r0_max(p: PotentialSpec, dirs: np.ndarray, r_start: float) -> float:
    """Largest verified radius for (h) + the cylinder sign conditions, dyadic ladder
    with a short bisection refinement between the last pass and first fail."""

    def feasible(r: float) -> bool:
        return (_radial_mono_ok(p, p.a_plus, r, dirs, True)
                and _radial_mono_ok(p, p.a_minus, r, dirs, False))

    r = r_start
    for _ in range(14):
        if feasible(r):
            break
        r *= 0.5
    else:
        return 0.0
    lo, hi = r, min(2.0 * r, r_start * 2.0)
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ----------------------------------------------------------------------
# The probe
# ----------------------------------------------------------------------


def geometry_probe(p: PotentialSpec, alpha: float, r0: float,
                   box: tuple | None = None, resolution: int = 0,
                   seed: int = 0) -> GeometryReport:
    """Measure the geometric constants at sublevel `alpha` and cylinder radius `r0`."""
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    lo_box, hi_box = box if box is not None else default_box(p)
    lo_box = np.atleast_1d(np.asarray(lo_box, float))
    hi_box = np.atleast_1d(np.asarray(hi_box, float))
    notes: list[str] = []
    wminus = p.w_minus_at_a_minus
    alpha_geom = alpha if alpha > 0.0 else 0.05 * wminus

    if p.dim == 1:
        res = resolution if resolution >= 201 else 4001
        xs = np.linspace(lo_box[0], hi_box[0], res)
        ws = p.eval(xs[:, None])
        am, ap = float(p.a_minus[0]), float(p.a_plus[0])

        count, compact = _count_components_1d(xs, ws, alpha, [am, ap])
        comp_a = _component_1d(p, alpha, xs, ws, am)
        comp_0 = _component_1d(p, 0.0, xs, ws, am)
        comp_p = _component_1d(p, alpha_geom, xs, ws, am)
        comp_m = _component_1d(p, -alpha_geom, xs, ws, am)
        if comp_a is None or comp_0 is None:
            raise ValueError("geometry_probe: a_minus sublevel component not found in box")

        ball_p = (ap - r0, ap + r0)
        d_alpha = _interval_gap(comp_a, ball_p)
        d0 = _interval_gap(comp_0, ball_p)
        if comp_p is not None and comp_m is not None:
            d0_geom = max(0.0, min(comp_m[0] - comp_p[0], comp_p[1] - comp_m[1]))
        else:
            d0_geom = 0.0
            notes.append("d0_geom: +-alpha0 level components not both resolved")
        R_alpha_max = max(am - comp_a[0], comp_a[1] - am)

        n0 = (-float(p.grad(np.array([[comp_0[0]]]))[0, 0]),
              float(p.grad(np.array([[comp_0[1]]]))[0, 0]))
        c0 = float(min(n0))
        bnd0 = np.array([[comp_0[0]], [comp_0[1]]])
        h3ii_min = _min_hess_eig(p, bnd0)

        sub = xs[_finite(ws) <= 0.0]
        sub_pts = np.concatenate([sub, [am, ap, comp_0[0], comp_0[1]]])[:, None]
        b = _max_hess_eig(p, sub_pts)

        dirs = np.array([[-1.0], [1.0]])
        r0_max = _r0_max(p, dirs, 0.75 * p.separation)

        # w*: radial derivative floor between r0 and the component edge, both rays
        w_star = np.inf
        for sgn, edge in ((-1.0, am - comp_a[0]), (1.0, comp_a[1] - am)):
            if edge <= r0:
                continue
            rr = np.linspace(r0, edge, 256)
            g = p.grad((am + sgn * rr)[:, None])[:, 0] * sgn
            w_star = min(w_star, float(np.min(g)))
        if not np.isfinite(w_star):
            w_star = 0.0
            notes.append("w*: component edge inside r0; floor undefined")

        kappa_max = 0.0  # no curvature in the scalar case
        convex_ok = True
    elif p.dim == 2:
        res = max(resolution, 201)
        g1 = np.linspace(lo_box[0], hi_box[0], res)
        g2 = np.linspace(lo_box[1], hi_box[1], res)
        X1, X2 = np.meshgrid(g1, g2, indexing="ij")
        pts = np.stack([X1, X2], axis=-1)
        ws = _finite(p.eval(pts))

        def label_at(level):
            mask = ws <= level
            im = int(np.argmin(np.abs(g1 - p.a_minus[0]))), int(np.argmin(np.abs(g2 - p.a_minus[1])))
            ipl = int(np.argmin(np.abs(g1 - p.a_plus[0]))), int(np.argmin(np.abs(g2 - p.a_plus[1])))
            mask[im] = True
            mask[ipl] = True
            labels, n = ndimage.label(mask)
            border = (np.any(labels[0, :] > 0) or np.any(labels[-1, :] > 0)
                      or np.any(labels[:, 0] > 0) or np.any(labels[:, -1] > 0))
            lab_m, lab_p = labels[im], labels[ipl]
            touches = bool(np.isin(labels[0, :], [lab_m, lab_p]).any()
                           or np.isin(labels[-1, :], [lab_m, lab_p]).any()
                           or np.isin(labels[:, 0], [lab_m, lab_p]).any()
                           or np.isin(labels[:, -1], [lab_m, lab_p]).any())
            del border
            return n, lab_m, lab_p, touches

        count, lab_m, lab_p, touches = label_at(alpha)
        compact = (not touches) and (lab_m != lab_p)

        r_cap = float(np.max(hi_box - lo_box))
        th = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        r_a = _radial_boundary(p, alpha, p.a_minus, dirs, r_cap)
        r_0 = _radial_boundary(p, 0.0, p.a_minus, dirs, r_cap)
        bnd_a = p.a_minus + r_a[:, None] * dirs
        bnd_0 = p.a_minus + r_0[:, None] * dirs
        notes.append("boundary curves sampled radially (star-shaped per (h*)(2))")

        R_alpha_max = float(np.max(r_a))
        d_alpha = max(0.0, float(np.min(np.linalg.norm(bnd_a - p.a_plus, axis=-1))) - r0)
        d0 = max(0.0, float(np.min(np.linalg.norm(bnd_0 - p.a_plus, axis=-1))) - r0)

        r_gp = _radial_boundary(p, alpha_geom, p.a_minus, dirs, r_cap)
        r_gm = _radial_boundary(p, -alpha_geom, p.a_minus, dirs, r_cap)
        bp = p.a_minus + r_gp[:, None] * dirs
        bm = p.a_minus + r_gm[:, None] * dirs
        dist = np.linalg.norm(bp[:, None, :] - bm[None, :, :], axis=-1)
        d0_geom = float(np.min(dist))

        grad0 = p.grad(bnd_0)
        c0 = float(np.min(np.linalg.norm(grad0, axis=-1)))
        h3ii_min = _min_hess_eig(p, bnd_0)

        sub_idx = np.nonzero(ws.ravel() <= 0.0)[0]
        if len(sub_idx) > 20000:
            sub_idx = sub_idx[:: len(sub_idx) // 20000 + 1]
        sub_pts = pts.reshape(-1, 2)[sub_idx]
        sub_pts = np.concatenate([sub_pts, bnd_0, [p.a_minus, p.a_plus]], axis=0)
        b = _max_hess_eig(p, sub_pts)

        dirs64 = np.stack([np.cos(th[::12]), np.sin(th[::12])], axis=-1)
        r0_max = _r0_max(p, dirs64, 0.75 * p.separation)

        w_star = np.inf
        dirs_w = dirs[::3]
        r_edge = r_a[::3]
        for k in range(len(dirs_w)):
            if r_edge[k] <= r0:
                continue
            rr = np.linspace(r0, r_edge[k], 128)
            g = p.grad(p.a_minus + rr[:, None] * dirs_w[k])
            w_star = min(w_star, float(np.min(np.sum(g * dirs_w[k], axis=-1))))
        if not np.isfinite(w_star):
            w_star = 0.0
            notes.append("w*: component edge inside r0; floor undefined")

        level_for_kappa = r_a if alpha > 0.0 else r_0
        kappa_max = _polar_curvature_max(level_for_kappa)

        try:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(bnd_a)
            area_poly = 0.5 * abs(np.sum(bnd_a[:, 0] * np.roll(bnd_a[:, 1], -1)
                                         - np.roll(bnd_a[:, 0], -1) * bnd_a[:, 1]))
            convex_ok = area_poly >= 0.995 * hull.volume
        except Exception:
            convex_ok = True
            notes.append("convexity check skipped (hull failure)")
    else:
        # N > 2: ray/cluster sampling only; exactness not claimed
        rng = np.random.default_rng(seed)
        n_rays = max(resolution, 100000) // 64
        dirs = rng.normal(size=(max(n_rays, 512), p.dim))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        r_cap = float(np.max(hi_box - lo_box))
        r_a = _radial_boundary(p, alpha, p.a_minus, dirs, r_cap)
        r_0 = _radial_boundary(p, 0.0, p.a_minus, dirs, r_cap)
        bnd_a = p.a_minus + r_a[:, None] * dirs
        bnd_0 = p.a_minus + r_0[:, None] * dirs
        notes.append("N > 2: sampled ray probe; component count heuristic")

        R_alpha_max = float(np.max(r_a))
        d_alpha = max(0.0, float(np.min(np.linalg.norm(bnd_a - p.a_plus, axis=-1))) - r0)
        d0 = max(0.0, float(np.min(np.linalg.norm(bnd_0 - p.a_plus, axis=-1))) - r0)

        seg = p.a_minus + np.linspace(0.0, 1.0, 512)[:, None] * (p.a_plus - p.a_minus)
        separated = bool(np.max(p.eval(seg)) > alpha)
        count = 2 if separated else 1
        compact = bool(np.max(r_a) < 0.9 * r_cap)

        r_gp = _radial_boundary(p, alpha_geom, p.a_minus, dirs[:256], r_cap)
        r_gm = _radial_boundary(p, -alpha_geom, p.a_minus, dirs[:256], r_cap)
        d0_geom = float(np.min(r_gm - r_gp) * -1.0) if np.all(r_gp >= r_gm) else float(
            np.min(np.abs(r_gp - r_gm)))
        d0_geom = abs(d0_geom)

        grad0 = p.grad(bnd_0)
        c0 = float(np.min(np.linalg.norm(grad0, axis=-1)))
        h3ii_min = _min_hess_eig(p, bnd_0[:256])
        b = _max_hess_eig(p, np.concatenate([bnd_0[:2000], [p.a_minus, p.a_plus]], axis=0))
        r0_max = _r0_max(p, dirs[:128], 0.75 * p.separation)

        w_star = np.inf
        for k in range(min(len(dirs), 256)):
            if r_a[k] <= r0:
                continue
            rr = np.linspace(r0, r_a[k], 64)
            g = p.grad(p.a_minus + rr[:, None] * dirs[k])
            w_star = min(w_star, float(np.min(np.sum(g * dirs[k], axis=-1))))
        if not np.isfinite(w_star):
            w_star = 0.0
        kappa_max = b / max(c0, 1e-300)
        notes.append("kappa_max estimated conservatively as b/c0")
        convex_ok = True

    lam_parts = [c0 / (2.0 * b) if b > 0 else np.inf, d0_geom if d0_geom > 0 else np.inf]
    if p.dim >= 2 and kappa_max > 0.0:
        lam_parts.append(0.9 / kappa_max)  # strict inequality in the curvature bound
    lambda_margin = float(min(lam_parts))
    if not np.isfinite(lambda_margin):
        lambda_margin = 0.0
        notes.append("lambda: no finite constraint; degenerate geometry")
    alpha_bar0 = c0 * lambda_margin / 4.0

    flags = {
        "h": bool(r0_max > 0.0 and (r0 <= r0_max + 1e-12)),
        "hstar1": bool(count == 2 and compact and convex_ok),
        "hstar2": bool(w_star > 0.0),
        "H3i": bool(c0 > 0.0),
        "H3ii": bool(h3ii_min > 0.0),
    }
    return GeometryReport(
        alpha=alpha,
        r0=r0,
        d_alpha=d_alpha,
        d0=d0,
        d0_geom=d0_geom,
        component_count=count,
        r0_max=r0_max,
        w_star=w_star,
        R_alpha_max=R_alpha_max,
        c0=c0,
        b=b,
        kappa_max=kappa_max,
        lambda_margin=lambda_margin,
        alpha_bar0=alpha_bar0,
        hypothesis_flags=flags,
        notes=notes,
        potential=p.name,
    )


def auto_geometry(p: PotentialSpec, box: tuple | None = None, resolution: int = 0,
                  r0: float | None = None, alpha: float | None = None,
                  seed: int = 0) -> GeometryReport:
    """Two-phase probe: level 0 fixes r0/alpha_bar0; the working level is alpha_bar0/2.

    Explicit r0/alpha are passed through unchanged.
    """
    probe0 = geometry_probe(p, 0.0, r0 if r0 is not None else 0.0,
                            box=box, resolution=resolution, seed=seed)
    if r0 is None:
        r0 = min(probe0.r0_max / 2.0, p.separation / 10.0)
    if alpha is None:
        alpha = probe0.alpha_bar0 / 2.0
    geo = geometry_probe(p, alpha, r0, box=box, resolution=resolution, seed=seed)
    # the admissible band is pinned at level 0; keep phase-1 constants authoritative
    geo.lambda_margin = probe0.lambda_margin
    geo.alpha_bar0 = probe0.alpha_bar0
    geo.c0 = probe0.c0
    geo.b = probe0.b
    geo.d0_geom = probe0.d0_geom
    return geo
