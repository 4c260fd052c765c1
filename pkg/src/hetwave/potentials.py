"""Bistable potentials W: R^N -> R with two minima at unequal depth.

Every potential is described by a :class:`PotentialSpec`: the two minima
a+ (zero level) and a- (deeper, W(a-) < 0), callables for W and grad W
(vectorized over trailing point batches), and an optional Hessian. The
built-in families are

* ``nagumo``         -- W(u) = a u^2/2 - (1+a) u^3/3 + u^4/4, a in (0, 1/2),
                        so W'(u) = -u(1-u)(u-a), wells a+ = 0, a- = 1;
* ``planar_deformed``-- (u1^2-1)^2 + u2^2 minus C times a clamped quintic
                        smoothstep in u1, tilting the (+1,0) well down;
* ``pwell_deformed`` -- |u-a+|^p |u-a-|^p deepened near a- by a compactly
                        supported bump factor;
* ``appendix_bistable`` -- a scalar three-well chain a- = 1, a0 = 2, a+ = 3
                        with W(a+) = 0 > W(a0) > W(a-), used to demo blocked
                        connections and the hat deformation.

Transforms: :func:`reflect_above` folds the graph of W upward outside a
convex region (making the potential coercive without touching it inside),
and :func:`appendix_hat` flips the deep well of a scalar potential so the
middle critical point becomes the global minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "PotentialError",
    "PotentialSpec",
    "ConvexRegion",
    "make_builtin",
    "eval_w",
    "eval_grad",
    "eval_hess",
    "reflect_above",
    "appendix_hat",
    "from_coefficient_file",
    "validate_spec",
]


class PotentialError(ValueError):
    """Raised when a potential violates its structural invariants."""


@dataclass
class PotentialSpec:
    """A potential with its minima and certified structure.

    ``eval``/``grad``/``hess`` accept arrays shaped (..., dim) and return
    (...,), (..., dim) and (..., dim, dim) respectively.
    """

    dim: int
    a_plus: np.ndarray
    a_minus: np.ndarray
    w_at_a_minus: float
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.a_plus - self.a_minus))

    @property
    def w_minus_at_a_minus(self) -> float:
        """W^-(a^-) = -W(a^-) > 0."""
        return -self.w_at_a_minus


def eval_w(p: PotentialSpec, u) -> np.ndarray:
    """W(u); non-finite values propagate (probes treat them as out of box)."""
    return p.eval(np.asarray(u, dtype=float))


def eval_grad(p: PotentialSpec, u) -> np.ndarray:
    return p.grad(np.asarray(u, dtype=float))


def eval_hess(p: PotentialSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if p.hess is not None:
        return p.hess(u)
    return _fd_hessian(p.grad, u)


def _fd_gradient(w: Callable, u: np.ndarray) -> np.ndarray:
    """Central differences of W with relative step 1e-6*(1+|u|), O(h^2)."""
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    h = 1e-6 * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
    for i in range(u.shape[-1]):
        e = np.zeros(u.shape[-1])
        e[i] = 1.0
        g[..., i] = (w(u + h * e) - w(u - h * e)) / (2.0 * h[..., 0])
    return g


def _fd_hessian(grad: Callable, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    out = np.empty(u.shape[:-1] + (n, n))
    h = 1e-6 * (1.0 + np.linalg.norm(u, axis=-1, keepdims=True))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        col = (grad(u + h * e) - grad(u - h * e)) / (2.0 * h)
        out[..., :, i] = col
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def validate_spec(p: PotentialSpec, rng: np.random.Generator | None = None) -> None:
    """Check the PotentialSpec invariants; raise PotentialError naming the first violated one."""
    gp = np.linalg.norm(eval_grad(p, p.a_plus))
    gm = np.linalg.norm(eval_grad(p, p.a_minus))
    if gp > 1e-8:
        raise PotentialError(f"{p.name}: grad(a_plus) = {gp:.3e} != 0 (a_plus not critical)")
    if gm > 1e-8:
        raise PotentialError(f"{p.name}: grad(a_minus) = {gm:.3e} != 0 (a_minus not critical)")
    wp = float(eval_w(p, p.a_plus))
    if abs(wp) > 1e-12:
        raise PotentialError(f"{p.name}: W(a_plus) = {wp:.3e} != 0")
    wm = float(eval_w(p, p.a_minus))
    if not wm < 0.0:
        raise PotentialError(
            f"{p.name}: W(a_minus) = {wm:.6g} >= 0 violates W(a_minus) < 0 = W(a_plus)"
        )
    if abs(wm - p.w_at_a_minus) > 1e-10 * max(1.0, abs(wm)):
        raise PotentialError(f"{p.name}: recorded w_at_a_minus inconsistent with eval")
    if p.hess is not None:
        rng = rng or np.random.default_rng(0)
        span = max(1.0, p.separation)
        for _ in range(10):
            u = p.a_minus + span * rng.uniform(-1.0, 1.0, size=p.dim)
            h_an = p.hess(u)
            h_fd = _fd_hessian(p.grad, u)
            scale = max(1.0, float(np.abs(h_an).max()))
            if np.abs(h_an - h_fd).max() > 1e-4 * scale:
                raise PotentialError(f"{p.name}: hess disagrees with FD of grad at {u}")


# ----------------------------------------------------------------------
# Built-in families
# ----------------------------------------------------------------------


def _make_nagumo(a: float) -> PotentialSpec:
    if not (0.0 < a < 0.5):
        raise PotentialError(
            f"nagumo: a = {a} outside (0, 1/2); W(a_minus) = (2a-1)/12 >= 0 would "
            "violate W(a_minus) < 0 = W(a_plus)"
        )

    def w(u):
        v = u[..., 0]
        return a * v**2 / 2.0 - (1.0 + a) * v**3 / 3.0 + v**4 / 4.0

    def gw(u):
        v = u[..., 0]
        return (v * (v - a) * (v - 1.0))[..., None]

    def hw(u):
        v = u[..., 0]
        return (a - 2.0 * (1.0 + a) * v + 3.0 * v**2)[..., None, None]

    return PotentialSpec(
        dim=1,
        a_plus=np.array([0.0]),
        a_minus=np.array([1.0]),
        w_at_a_minus=(2.0 * a - 1.0) / 12.0,
        eval=w,
        grad=gw,
        hess=hw,
        name="nagumo",
        params={"a": a},
    )


def _smoothstep(t):
    """Quintic smoothstep 6t^5-15t^4+10t^3 clamped to [0,1]; C^2 at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (6.0 * t**2 - 15.0 * t + 10.0)


def _smoothstep_d(t):
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * t**2 * (t - 1.0) ** 2, 0.0)


def _smoothstep_dd(t):
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 60.0 * t * (2.0 * t - 1.0) * (t - 1.0), 0.0)


def _make_planar_deformed(c_def: float) -> PotentialSpec:
    if not c_def > 0.0:
        raise PotentialError(f"planar_deformed: C = {c_def} must be > 0 (no deeper well)")

    def w(u):
        u1, u2 = u[..., 0], u[..., 1]
        return (u1**2 - 1.0) ** 2 + u2**2 - c_def * _smoothstep(u1)

    def gw(u):
        u1, u2 = u[..., 0], u[..., 1]
        g = np.empty_like(u)
        g[..., 0] = 4.0 * u1 * (u1**2 - 1.0) - c_def * _smoothstep_d(u1)
        g[..., 1] = 2.0 * u2
        return g

    def hw(u):
        u1 = u[..., 0]
        h = np.zeros(u.shape[:-1] + (2, 2))
        h[..., 0, 0] = 12.0 * u1**2 - 4.0 - c_def * _smoothstep_dd(u1)
        h[..., 1, 1] = 2.0
        return h

    return PotentialSpec(
        dim=2,
        a_plus=np.array([-1.0, 0.0]),
        a_minus=np.array([1.0, 0.0]),
        w_at_a_minus=-c_def,
        eval=w,
        grad=gw,
        hess=hw,
        name="planar_deformed",
        params={"C": c_def},
    )


def _make_pwell_deformed(p_exp: float, eps: float, delta: float, dim: int) -> PotentialSpec:
    if p_exp < 2.0:
        raise PotentialError(f"pwell_deformed: p = {p_exp} must be >= 2 (C^2 at the wells)")
    if eps <= 0.0 or delta <= 0.0:
        raise PotentialError("pwell_deformed: eps and delta must be > 0")
    a_plus = np.zeros(dim)
    a_plus[0] = -1.0
    a_minus = np.zeros(dim)
    a_minus[0] = 1.0
    if delta >= 2.0:
        raise PotentialError("pwell_deformed: delta must be smaller than the well separation")

    def base(u):
        rp = np.linalg.norm(u - a_plus, axis=-1)
        rm = np.linalg.norm(u - a_minus, axis=-1)
        return rp**p_exp * rm**p_exp

    def base_grad(u):
        dp = u - a_plus
        dm = u - a_minus
        rp2 = np.sum(dp**2, axis=-1)[..., None]
        rm2 = np.sum(dm**2, axis=-1)[..., None]
        # p |u-a+|^{p-2}(u-a+) |u-a-|^p + symmetric term; safe at the wells for p >= 2
        with np.errstate(invalid="ignore"):
            t1 = p_exp * rp2 ** (p_exp / 2.0 - 1.0) * dp * rm2 ** (p_exp / 2.0)
            t2 = p_exp * rm2 ** (p_exp / 2.0 - 1.0) * dm * rp2 ** (p_exp / 2.0)
        return np.nan_to_num(t1) + np.nan_to_num(t2)

    # bump cap: C = max W on the sphere |u - a-| = delta
    cap = _sphere_max(base, a_minus, delta, dim)

    def bump(u):
        r2 = np.sum((u - a_minus) ** 2, axis=-1)
        inside = r2 < delta**2
        g = np.where(inside, 1.0 / np.where(inside, r2 - delta**2, -1.0), 0.0)
        return np.where(inside, eps * np.exp(g) + 1.0, 1.0)

    def bump_grad(u):
        d = u - a_minus
        r2 = np.sum(d**2, axis=-1)
        inside = r2 < delta**2
        denom = np.where(inside, r2 - delta**2, -1.0)
        g = np.where(inside, 1.0 / denom, 0.0)
        pref = np.where(inside, -eps * np.exp(g) / denom**2, 0.0)
        return pref[..., None] * 2.0 * d

    def w(u):
        f = bump(u)
        return f * base(u) - cap * (f - 1.0)

    def gw(u):
        f = bump(u)[..., None]
        df = bump_grad(u)
        return df * (base(u)[..., None] - cap) + f * base_grad(u)

    w_min = float(-cap * eps * math.exp(-1.0 / delta**2))
    return PotentialSpec(
        dim=dim,
        a_plus=a_plus,
        a_minus=a_minus,
        w_at_a_minus=w_min,
        eval=w,
        grad=gw,
        hess=None,
        name="pwell_deformed",
        params={"p": p_exp, "eps": eps, "delta": delta, "dim": dim},
    )


def _sphere_max(f: Callable, center: np.ndarray, radius: float, dim: int) -> float:
    if dim == 1:
        pts = np.array([center - radius, center + radius])
    elif dim == 2:
        th = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        pts = center + radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    else:
        rng = np.random.default_rng(12345)
        d = rng.normal(size=(20000, dim))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        pts = center + radius * d
    return float(np.max(f(pts)))


def _make_appendix_bistable(b1: float, b2: float, scale: float) -> PotentialSpec:
    """Scalar three-well chain: minima at 1 (global), 2 (middle), 3 (zero level).

    W' = scale*(u-1)(u-b1)(u-2)(u-b2)(u-3) with barrier positions 1 < b1 < 2 < b2 < 3;
    the constant of integration sets W(3) = 0.
    """
    if not (1.0 < b1 < 2.0 < b2 < 3.0):
        raise PotentialError("appendix_bistable: barriers must satisfy 1 < b1 < 2 < b2 < 3")
    dpoly = scale * np.polynomial.Polynomial.fromroots([1.0, b1, 2.0, b2, 3.0])
    poly = dpoly.integ()
    poly = poly - poly(3.0)
    w1, w2 = poly(1.0), poly(2.0)
    if not (w1 < w2 < 0.0):
        raise PotentialError(
            f"appendix_bistable: W(1)={w1:.4g}, W(2)={w2:.4g} violates W(a+)=0 > W(a0) > W(a-)"
        )
    hpoly = dpoly.deriv()

    def w(u):
        return poly(u[..., 0])

    def gw(u):
        return dpoly(u[..., 0])[..., None]

    def hw(u):
        return hpoly(u[..., 0])[..., None, None]

    return PotentialSpec(
        dim=1,
        a_plus=np.array([3.0]),
        a_minus=np.array([1.0]),
        w_at_a_minus=float(w1),
        eval=w,
        grad=gw,
        hess=hw,
        name="appendix_bistable",
        params={"b1": b1, "b2": b2, "scale": scale, "a0": 2.0, "w_at_a0": float(w2)},
    )


_BUILTINS = ("nagumo", "pwell_deformed", "planar_deformed", "appendix_bistable")


def make_builtin(name: str, params: dict | None = None) -> PotentialSpec:
    """Construct a built-in potential; rejects out-of-range parameters with a diagnostic."""
    params = dict(params or {})
    if name == "nagumo":
        spec = _make_nagumo(float(params.get("a", 0.25)))
    elif name == "planar_deformed":
        spec = _make_planar_deformed(float(params.get("C", 0.3)))
    elif name == "pwell_deformed":
        spec = _make_pwell_deformed(
            float(params.get("p", 2.0)),
            float(params.get("eps", 1.0)),
            float(params.get("delta", 0.5)),
            int(params.get("dim", 2)),
        )
    elif name == "appendix_bistable":
        spec = _make_appendix_bistable(
            float(params.get("b1", 1.7)),
            float(params.get("b2", 2.7)),
            float(params.get("scale", 1.0)),
        )
    else:
        raise PotentialError(f"unknown builtin potential {name!r}; known: {_BUILTINS}")
    validate_spec(spec)
    return spec


# ----------------------------------------------------------------------
# Transforms
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexRegion:
    """Ball (center, radius) or axis-aligned box (lo, hi) used as the localization set."""

    kind: str  # "ball" | "box"
    center: np.ndarray | None = None
    radius: float = 0.0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    @staticmethod
    def ball(center, radius: float) -> "ConvexRegion":
        return ConvexRegion(kind="ball", center=np.atleast_1d(np.asarray(center, float)),
                            radius=float(radius))

    @staticmethod
    def box(lo, hi) -> "ConvexRegion":
        return ConvexRegion(kind="box", lo=np.atleast_1d(np.asarray(lo, float)),
                            hi=np.atleast_1d(np.asarray(hi, float)))

    def contains(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, float)
        if self.kind == "ball":
            return np.sum((u - self.center) ** 2, axis=-1) <= self.radius**2
        return np.all((u >= self.lo) & (u <= self.hi), axis=-1)

    def boundary_samples(self, n: int, rng: np.random.Generator) -> np.ndarray:
        dim = len(self.center) if self.kind == "ball" else len(self.lo)
        if self.kind == "ball":
            if dim == 1:
                return np.array([[self.center[0] - self.radius], [self.center[0] + self.radius]])
            d = rng.normal(size=(n, dim))
            d /= np.linalg.norm(d, axis=-1, keepdims=True)
            return self.center + self.radius * d
        if dim == 1:
            return np.array([[self.lo[0]], [self.hi[0]]])
        pts = rng.uniform(self.lo, self.hi, size=(n, dim))
        face_axis = rng.integers(0, dim, size=n)
        face_side = rng.integers(0, 2, size=n)
        bound = np.where(face_side == 0, self.lo[face_axis], self.hi[face_axis])
        pts[np.arange(n), face_axis] = bound
        return pts

    def interior_samples(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "ball":
            dim = len(self.center)
            d = rng.normal(size=(n, dim))
            d /= np.linalg.norm(d, axis=-1, keepdims=True)
            r = self.radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
            return self.center + r * d * 0.999
        span = self.hi - self.lo
        return self.lo + 0.001 * span + 0.998 * span * rng.uniform(size=(n, len(self.lo)))


def reflect_above(p: PotentialSpec, omega: ConvexRegion, n_boundary: int = 10000,
                  seed: int = 0) -> PotentialSpec:
    """Fold W upward about m = min W on the (sampled) boundary of omega, outside omega only.

    Inside omega the potential is untouched; outside, values below m are replaced
    by 2m - W, so the result is >= m on ext(omega) and coercive enough for the
    constrained solve while keeping every minimizer trapped in omega.
    """
    rng = np.random.default_rng(seed)
    bnd = omega.boundary_samples(n_boundary, rng)
    m = float(np.min(p.eval(bnd)))
    premise_ok = m > max(0.0, p.w_at_a_minus)  # boundary must exceed both well values
    interior = omega.interior_samples(4096, rng)
    interior_violations = int(np.count_nonzero(p.eval(interior) >= m))
    boundary_below_m = int(np.count_nonzero(p.eval(bnd) < m))

    base_w, base_g = p.eval, p.grad

    def w(u):
        u = np.asarray(u, float)
        val = base_w(u)
        outside_low = (~omega.contains(u)) & (val < m)
        return np.where(outside_low, 2.0 * m - val, val)

    def gw(u):
        u = np.asarray(u, float)
        val = base_w(u)
        g = base_g(u)
        outside_low = (~omega.contains(u)) & (val < m)
        return np.where(outside_low[..., None], -g, g)

    return PotentialSpec(
        dim=p.dim,
        a_plus=p.a_plus.copy(),
        a_minus=p.a_minus.copy(),
        w_at_a_minus=p.w_at_a_minus,
        eval=w,
        grad=gw,
        hess=None,
        name=p.name + "_reflected",
        params={
            **p.params,
            "reflection_level": m,
            "boundary_samples": len(bnd),
            "hstar2_premise_ok": premise_ok,
            "interior_violations": interior_violations,
            "boundary_below_m": boundary_below_m,
        },
    )


def appendix_hat(w1d: PotentialSpec, a_minus: float, a0: float, omega2: float,
                 k_gain: float) -> PotentialSpec:
    """Flip the deep well of a scalar potential so a0 becomes the global minimum.

    Piecewise in u: constant W(omega2) for u >= omega2; W itself on [a0, omega2);
    on (a_minus, a0) a bell-weighted blend between W and the flipped branch
    -(F(a_minus) W(u) - 2 W(a_minus)); the pure flipped branch for u <= a_minus.
    F(u) = k_gain * exp((u-a0)^-1 (u-a0+2 a_minus)^-1) on its support.
    Records whether What(a_minus) >= W(Omega_1) with Omega_1 = 2 a_minus - a0.
    """
    if w1d.dim != 1:
        raise PotentialError("appendix_hat requires a scalar potential")
    if not (a_minus < a0 < omega2):
        raise PotentialError(
            f"appendix_hat: breakpoints must satisfy a_minus < a0 < omega2, "
            f"got {a_minus}, {a0}, {omega2}"
        )

    base_w, base_g = w1d.eval, w1d.grad
    wm = float(base_w(np.array([a_minus])))
    w_o2 = float(base_w(np.array([omega2])))

    def bell(v):
        v = np.asarray(v, float)
        lo, hi = min(a0, a0 - 2.0 * a_minus), max(a0, a0 - 2.0 * a_minus)
        inside = (v > lo) & (v < hi)
        quad = np.where(inside, (v - a0) * (v - a0 + 2.0 * a_minus), -1.0)
        return np.where(inside, k_gain * np.exp(1.0 / quad), 0.0)

    f_am = float(bell(a_minus))
    if f_am <= 0.0:
        raise PotentialError("appendix_hat: bell vanishes at a_minus; breakpoints "
                             "incompatible with the bell support")

    def w(u):
        v = np.asarray(u, float)[..., 0]
        base = base_w(v[..., None])
        flipped = -(f_am * base - 2.0 * wm)
        beta = bell(v) / f_am
        blend = base + beta * (flipped - base)
        out = np.where(v >= omega2, w_o2, base)
        out = np.where((v >= a_minus) & (v < a0), blend, out)
        out = np.where(v < a_minus, flipped, out)
        return out

    def gw(u):
        v = np.asarray(u, float)[..., 0]
        g = base_g(v[..., None])[..., 0]
        d = 1e-7 * (1.0 + np.abs(v))
        mid = (v >= a_minus) & (v < a0)
        # blend branch differentiated numerically (bell derivative is unwieldy)
        wp = w((v + d)[..., None])
        wm_ = w((v - d)[..., None])
        g_mid = (wp - wm_) / (2.0 * d)
        out = np.where(v >= omega2, 0.0, g)
        out = np.where(mid, g_mid, out)
        out = np.where(v < a_minus, -f_am * g, out)
        return out[..., None]

    what_am = float(w(np.array([a_minus])))
    omega1 = 2.0 * a_minus - a0
    w_o1 = float(base_w(np.array([omega1])))
    w_a0 = float(base_w(np.array([a0])))
    return PotentialSpec(
        dim=1,
        a_plus=w1d.a_plus.copy(),
        a_minus=np.array([a0]),
        w_at_a_minus=w_a0,
        eval=w,
        grad=gw,
        hess=None,
        name=w1d.name + "_hat",
        params={
            **w1d.params,
            "hat_a_minus_old": a_minus,
            "hat_a0": a0,
            "hat_omega2": omega2,
            "hat_K": k_gain,
            "hat_omega1": omega1,
            "hat_height_ok": what_am >= w_o1,
        },
    )


# ----------------------------------------------------------------------
# User potentials from coefficient files
# ----------------------------------------------------------------------


def from_coefficient_file(path, a_plus, a_minus, name: str = "user_poly") -> PotentialSpec:
    """Load a polynomial potential.

    File format: one monomial per line, "e1 e2 ... eN coeff" (integer exponents,
    final float coefficient); blank lines and '#' comments ignored.
    """
    exps, coeffs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            if len(toks) < 2:
                raise PotentialError(f"{path}: malformed line {raw!r}")
            exps.append([int(t) for t in toks[:-1]])
            coeffs.append(float(toks[-1]))
    if not exps:
        raise PotentialError(f"{path}: no monomials found")
    dims = {len(e) for e in exps}
    if len(dims) != 1:
        raise PotentialError(f"{path}: inconsistent exponent tuple lengths {sorted(dims)}")
    dim = dims.pop()
    E = np.array(exps, dtype=float)  # (m, dim)
    C = np.array(coeffs, dtype=float)  # (m,)

    def w(u):
        u = np.asarray(u, float)
        # prod over dims of u_i^{e_i}, summed against coefficients
        powers = u[..., None, :] ** E  # (..., m, dim)
        return np.sum(C * np.prod(powers, axis=-1), axis=-1)

    def gw(u):
        u = np.asarray(u, float)
        g = np.zeros_like(u)
        for i in range(dim):
            Ei = E.copy()
            mask = Ei[:, i] > 0
            Ci = C * Ei[:, i]
            Ei[:, i] = np.maximum(Ei[:, i] - 1.0, 0.0)
            powers = u[..., None, :] ** Ei
            g[..., i] = np.sum((Ci * mask) * np.prod(powers, axis=-1), axis=-1)
        return g

    a_plus = np.atleast_1d(np.asarray(a_plus, float))
    a_minus = np.atleast_1d(np.asarray(a_minus, float))
    if len(a_plus) != dim or len(a_minus) != dim:
        raise PotentialError(f"{path}: minima dimension mismatch with exponent tuples")
    spec = PotentialSpec(
        dim=dim,
        a_plus=a_plus,
        a_minus=a_minus,
        w_at_a_minus=float(w(a_minus)),
        eval=w,
        grad=gw,
        hess=None,
        name=name,
        params={"file": str(path)},
    )
    validate_spec(spec)
    return spec
