"""Adaptive Gauss-Kronrod integration with graded meshes, tails, and extrapolation.

Integrands are vectorized: the evaluator receives a 1-D numpy array of
abscissae and returns an array of the same shape.  Singular behaviour is
described by metadata (breakpoints plus algebraic exponent hints) so the
engine can grade its initial mesh geometrically toward each singular point.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend
from ._rules import GK_NODES, jacobi_unit
from .errors import (
    ConvergenceError,
    DegenerateLadderError,
    ParameterError,
    SlowDecayError,
    UnsupportedDimensionError,
)
from .params import omega

_EPS = np.finfo(float).eps
_JACOBI_HIGH = 20
_JACOBI_LOW = 12


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4096
    grading_ratio: float = 0.25
    tail_radius: float = 64.0
    extrapolation_levels: int = 6

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ParameterError("tolerances must be positive")
        if not (0.0 < self.grading_ratio < 1.0):
            raise ParameterError("grading_ratio must lie in (0, 1)")
        if not self.tail_radius > 1.0:
            raise ParameterError("tail_radius must exceed 1")
        if self.max_subdivisions < 1 or self.extrapolation_levels < 2:
            raise ParameterError("max_subdivisions >= 1 and extrapolation_levels >= 2 required")

    def replace(self, **changes) -> "QuadConfig":
        return dataclasses.replace(self, **changes)

    def tightened(self, factor: float = 0.1) -> "QuadConfig":
        """Configuration for inner integrals of a nested computation."""
        return self.replace(abs_tol=self.abs_tol * factor, rel_tol=self.rel_tol * factor)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_CONFIG = QuadConfig()


@dataclass(frozen=True)
class Integrand1D:
    """A vectorized integrand plus the metadata the engine relies on.

    ``singular_exponents[i]`` is the exponent alpha with f ~ |t - b_i|^alpha
    near ``breakpoints[i]``; ``None`` marks a plain kink.  ``decay_exponent``
    is p with |f(t)| <= C |t|^-p for large |t|.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    singular_exponents: tuple = ()
    decay_exponent: float | None = None

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        exps = tuple(self.singular_exponents) or (None,) * len(bps)
        if len(exps) != len(bps):
            raise ParameterError("one exponent hint per breakpoint is required")
        order = sorted(range(len(bps)), key=lambda i: bps[i])
        object.__setattr__(self, "breakpoints", tuple(bps[i] for i in order))
        object.__setattr__(self, "singular_exponents", tuple(exps[i] for i in order))

    def __call__(self, t):
        return self.evaluator(t)


def _as_integrand(f) -> Integrand1D:
    return f if isinstance(f, Integrand1D) else Integrand1D(f)


def _grading_depth(alpha, ratio: float) -> int:
    """Number of geometric levels so the innermost panel is negligible."""
    a = 0.0 if alpha is None else float(alpha)
    a = max(a, -0.999)
    levels = math.ceil(math.log(1e-16) / ((a + 1.0) * math.log(ratio)))
    return int(min(max(levels, 3), 200))


def _graded_points(p: float, q: float, alpha, ratio: float) -> list:
    """Mesh points in (p, q) accumulating geometrically at p."""
    depth = 3 if _jacobi_hint(alpha) else _grading_depth(alpha, ratio)
    h = q - p
    return [p + h * ratio**i for i in range(1, depth + 1)]


def _jacobi_hint(alpha) -> bool:
    """Exponents handled by a product rule on the panel touching the point."""
    return alpha is not None and -1.0 < float(alpha) < 0.0


def _initial_mesh(f: Integrand1D, a: float, b: float, cfg: QuadConfig):
    """Initial panels plus per-panel singular exponents at each end (nan if none)."""
    marks = {}
    for bp, ex in zip(f.breakpoints, f.singular_exponents):
        if a <= bp <= b:
            marks[bp] = ex
    cuts = sorted(set([a, b]) | set(marks))
    mesh = [a]
    for p, q in zip(cuts[:-1], cuts[1:]):
        left, right = p in marks, q in marks
        pts_l = pts_r = []
        if left and right:
            mid = 0.5 * (p + q)
            pts_l = _graded_points(p, mid, marks[p], cfg.grading_ratio) + [mid]
            pts_r = [q - (t - p) for t in _graded_points(p, mid, marks[q], cfg.grading_ratio)]
        elif left:
            pts_l = _graded_points(p, q, marks[p], cfg.grading_ratio)
        elif right:
            pts_r = [q - (t - p) for t in _graded_points(p, q, marks[q], cfg.grading_ratio)]
        mesh.extend(pts_l)
        mesh.extend(pts_r)
        mesh.append(q)
    mesh = np.unique(np.array(mesh, dtype=float))
    a_lo = np.full(mesh.size - 1, np.nan)
    a_hi = np.full(mesh.size - 1, np.nan)
    for bp, ex in marks.items():
        if not _jacobi_hint(ex):
            continue
        i = int(np.searchsorted(mesh, bp))
        if i < a_lo.size:
            a_lo[i] = ex
        if i > 0:
            a_hi[i - 1] = ex
    return mesh, a_lo, a_hi


def _eval_regular(f, lo: np.ndarray, hi: np.ndarray):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = c[:, None] + h[:, None] * GK_NODES[None, :]
    vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)][:3]
        raise FloatingPointError(f"integrand not finite at {bad.tolist()}")
    return _backend.gk15_reduce(vals, h)


def _eval_singular(f, lo: np.ndarray, hi: np.ndarray, alpha: float, at_lo: bool):
    """Product Gauss-Jacobi rule for f ~ |t - end|^alpha at one panel end."""
    w = hi - lo
    results = []
    for n in (_JACOBI_HIGH, _JACOBI_LOW):
        u, wt = jacobi_unit(n, alpha)
        tau = w[:, None] * u[None, :]
        x = lo[:, None] + tau if at_lo else hi[:, None] - tau
        vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        if not np.all(np.isfinite(vals)):
            bad = x[~np.isfinite(vals)][:3]
            raise FloatingPointError(f"integrand not finite at {bad.tolist()}")
        g = vals / tau**alpha
        results.append((g @ wt) * w ** (alpha + 1.0))
    hi_v, lo_v = results
    err = np.abs(hi_v - lo_v) + 50.0 * _EPS * np.abs(hi_v)
    return hi_v, err


def _eval_panels(f, lo, hi, a_lo, a_hi):
    val = np.empty(lo.size)
    err = np.empty(lo.size)
    sing_lo = np.isfinite(a_lo)
    sing_hi = np.isfinite(a_hi) & ~sing_lo
    reg = ~(sing_lo | sing_hi)
    if reg.any():
        val[reg], err[reg] = _eval_regular(f, lo[reg], hi[reg])
    for mask, alphas, at_lo in ((sing_lo, a_lo, True), (sing_hi, a_hi, False)):
        for alpha in np.unique(alphas[mask]):
            sel = mask & (alphas == alpha)
            val[sel], err[sel] = _eval_singular(f, lo[sel], hi[sel], float(alpha), at_lo)
    return val, err


def _adaptive(f, mesh, cfg: QuadConfig):
    mesh, a_lo, a_hi = mesh
    lo, hi = mesh[:-1].copy(), mesh[1:].copy()
    val, err = _eval_panels(f, lo, hi, a_lo, a_hi)
    while True:
        total = math.fsum(val[np.argsort(lo, kind="stable")])
        tot_err = float(err.sum())
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if tot_err <= tol:
            return total, tot_err
        scale = np.maximum(np.abs(lo), np.abs(hi))
        splittable = (hi - lo) > 128.0 * _EPS * np.maximum(scale, 1e-300)
        cand = np.nonzero(splittable)[0]
        if cand.size == 0:
            return total, tot_err
        order = cand[np.argsort(-err[cand], kind="stable")]
        csum = np.cumsum(err[order])
        n_pick = int(np.searchsorted(csum, tot_err - 0.5 * tol) + 1)
        pick = order[: min(n_pick, order.size)]
        if lo.size + pick.size > cfg.max_subdivisions:
            raise ConvergenceError(
                f"subdivision budget {cfg.max_subdivisions} exhausted "
                f"(estimate {total:.16g}, error {tot_err:.3g}, tolerance {tol:.3g})",
                total,
                tot_err,
            )
        mid = 0.5 * (lo[pick] + hi[pick])
        nan = np.full(pick.size, np.nan)
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_alo = np.concatenate([a_lo[pick], nan])
        new_ahi = np.concatenate([nan, a_hi[pick]])
        nv, ne = _eval_panels(f, new_lo, new_hi, new_alo, new_ahi)
        keep = np.ones(lo.size, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        a_lo = np.concatenate([a_lo[keep], new_alo])
        a_hi = np.concatenate([a_hi[keep], new_ahi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def integrate_1d(f, a: float, b: float, cfg: QuadConfig = DEFAULT_CONFIG):
    """Integral of f over [a, b] as (value, err_est)."""
    f = _as_integrand(f)
    a, b = float(a), float(b)
    if a == b:
        return 0.0, 0.0
    if a > b:
        v, e = integrate_1d(f, b, a, cfg)
        return -v, e
    return _adaptive(f.evaluator, _initial_mesh(f, a, b, cfg), cfg)


def integrate_improper(f, a: float, cfg: QuadConfig = DEFAULT_CONFIG):
    """Integral over (a, inf): finite part up to R, then t = R/u on the tail."""
    f = _as_integrand(f)
    p = f.decay_exponent
    if p is None or p <= 1.0:
        raise SlowDecayError(f"decay exponent {p} must exceed 1 for an improper integral")
    a = float(a)
    R = max(cfg.tail_radius, a)
    v1, e1 = integrate_1d(f, a, R, cfg) if R > a else (0.0, 0.0)
    ev = f.evaluator

    def tail(u):
        return ev(R / u) * (R / (u * u))

    bps, exps = [0.0], [p - 2.0]
    for bp, ex in zip(f.breakpoints, f.singular_exponents):
        if bp > R:
            bps.append(R / bp)
            exps.append(ex)
    v2, e2 = integrate_1d(Integrand1D(tail, tuple(bps), tuple(exps)), 0.0, 1.0, cfg)
    return v1 + v2, e1 + e2


def integrate_real_line(f, cfg: QuadConfig = DEFAULT_CONFIG, center: float = 0.0):
    """Integral over the whole real line, split at ``center``."""
    f = _as_integrand(f)
    ev = f.evaluator
    right = Integrand1D(
        lambda t: ev(center + t),
        tuple(b - center for b in f.breakpoints if b >= center) or (),
        tuple(e for b, e in zip(f.breakpoints, f.singular_exponents) if b >= center) or (),
        f.decay_exponent,
    )
    left = Integrand1D(
        lambda t: ev(center - t),
        tuple(center - b for b in f.breakpoints if b <= center) or (),
        tuple(e for b, e in zip(f.breakpoints, f.singular_exponents) if b <= center) or (),
        f.decay_exponent,
    )
    v1, e1 = integrate_improper(right, 0.0, cfg)
    v2, e2 = integrate_improper(left, 0.0, cfg)
    return v1 + v2, e1 + e2


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; infinite bounds are allowed and need a decay exponent."""

    lower: tuple
    upper: tuple


@dataclass(frozen=True)
class Slab:
    """{lo < x_1 < hi} x R^(N-1)."""

    lo: float
    hi: float


@dataclass(frozen=True)
class Whole:
    """All of R^N, integrated in polar coordinates about ``center``."""

    center: tuple = field(default=())


def _frame(axis: np.ndarray):
    """Orthonormal frame (axis, b, c) in R^3."""
    a = axis / np.linalg.norm(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    b = trial - a * (trial @ a)
    b /= np.linalg.norm(b)
    c = np.cross(a, b)
    return a, b, c


def _ray_interval(p, theta, center, radius):
    """Parameters [r0, r1] where p + r*theta (r >= 0) lies in the ball, or None."""
    d = p - center
    bq = float(theta @ d)
    cq = float(d @ d) - radius * radius
    disc = bq * bq - cq
    if disc <= 0.0:
        return None
    sq = math.sqrt(disc)
    r1 = -bq + sq
    if r1 <= 0.0:
        return None
    r0 = max(0.0, -bq - sq) if cq > 0.0 else 0.0
    return r0, r1


def _batch(fn):
    return lambda ts: np.array([fn(float(t)) for t in np.asarray(ts).ravel()])


def _radial_1d(g, r0, r1, cfg, hint, scale=0.0):
    if hint is not None and hint >= 0.0 and r0 == 0.0:
        # below this radius pole + r*theta rounds back onto the pole; the
        # skipped piece is O(floor^(1+hint)) and far below any tolerance
        r0 = 64.0 * np.finfo(float).eps * scale
    bps = (r0,) if hint is not None else ()
    exps = (hint,) if hint is not None else ()
    return integrate_1d(Integrand1D(g, bps, exps), r0, r1, cfg)[0]


def _polar_ball(f, N, center, radius, pole, pole_exponent, cfg):
    inner = cfg.tightened()
    c = np.asarray(center, dtype=float)
    p = c.copy() if pole is None else np.asarray(pole, dtype=float)
    off = c - p
    dist = float(np.linalg.norm(off))
    inside = dist < radius
    scale = max(float(np.max(np.abs(p))), radius)
    hint = None
    if pole_exponent is not None:
        hint = pole_exponent + N - 1
    if N == 2:
        if inside:
            lo, hi = 0.0, 2.0 * math.pi
            ang_bps, ang_exps = (), ()
        else:
            th0 = math.atan2(off[1], off[0])
            beta = math.asin(min(1.0, radius / dist))
            lo, hi = th0 - beta, th0 + beta
            ang_bps, ang_exps = (lo, hi), (0.5, 0.5)

        def per_angle(th):
            theta = np.array([math.cos(th), math.sin(th)])
            iv = _ray_interval(p, theta, c, radius)
            if iv is None:
                return 0.0
            g = lambda r: f(p[None, :] + r[:, None] * theta[None, :]) * r
            return _radial_1d(g, iv[0], iv[1], inner, hint if iv[0] == 0.0 else None, scale)

        return integrate_1d(Integrand1D(_batch(per_angle), ang_bps, ang_exps), lo, hi, cfg)
    # N == 3
    axis = off if dist > 0 else np.array([1.0, 0.0, 0.0])
    a, b, cc = _frame(axis)
    phi_max = math.pi if inside else math.asin(min(1.0, radius / dist))

    def per_dir(phi, psi):
        theta = math.cos(phi) * a + math.sin(phi) * (math.cos(psi) * b + math.sin(psi) * cc)
        iv = _ray_interval(p, theta, c, radius)
        if iv is None:
            return 0.0
        g = lambda r: f(p[None, :] + r[:, None] * theta[None, :]) * r * r
        return _radial_1d(g, iv[0], iv[1], inner.tightened(), hint if iv[0] == 0.0 else None, scale)

    def per_phi(phi):
        if math.sin(phi) == 0.0:
            return 0.0
        val = integrate_1d(_batch(lambda psi: per_dir(phi, psi)), 0.0, 2.0 * math.pi, inner)[0]
        return val * math.sin(phi)

    bps = () if inside else (phi_max,)
    exps = () if inside else (0.5,)
    return integrate_1d(Integrand1D(_batch(per_phi), bps, exps), 0.0, phi_max, cfg)


def _polar_whole(f, N, center, decay, cfg):
    inner = cfg.tightened()
    c = np.asarray(center, dtype=float) if len(center) else np.zeros(N)
    rad_decay = None if decay is None else decay - (N - 1)

    def radial(theta, cfg_r):
        g = lambda r: f(c[None, :] + r[:, None] * theta[None, :]) * r ** (N - 1)
        return integrate_improper(Integrand1D(g, decay_exponent=rad_decay), 0.0, cfg_r)[0]

    if N == 2:
        per = lambda th: radial(np.array([math.cos(th), math.sin(th)]), inner)
        return integrate_1d(_batch(per), 0.0, 2.0 * math.pi, cfg)
    a, b, cc = _frame(np.array([1.0, 0.0, 0.0]))

    def per_phi(phi):
        def per_psi(psi):
            th = math.cos(phi) * a + math.sin(phi) * (math.cos(psi) * b + math.sin(psi) * cc)
            return radial(th, inner.tightened())

        return integrate_1d(_batch(per_psi), 0.0, 2.0 * math.pi, inner)[0] * math.sin(phi)

    return integrate_1d(_batch(per_phi), 0.0, math.pi, cfg)


def _iterated_box(f, N, lower, upper, decay, cfg):
    def integrate_axis(g, lo, hi, cfg_axis):
        ig = Integrand1D(g, decay_exponent=decay)
        if math.isinf(lo) and math.isinf(hi):
            return integrate_real_line(ig, cfg_axis)[0]
        if math.isinf(hi):
            return integrate_improper(ig, lo, cfg_axis)[0]
        if math.isinf(lo):
            flipped = Integrand1D(lambda t: g(-t), decay_exponent=decay)
            return integrate_improper(flipped, -hi, cfg_axis)[0]
        return integrate_1d(ig, lo, hi, cfg_axis)[0]

    def level(prefix, depth, cfg_lvl):
        if depth == N - 1:
            def g(t):
                pts = np.empty((t.size, N))
                pts[:, :depth] = prefix
                pts[:, depth] = t
                return f(pts)
        else:
            g = _batch(lambda t: level(prefix + [t], depth + 1, cfg_lvl.tightened()))
        return integrate_axis(g, lower[depth], upper[depth], cfg_lvl)

    if N == 1:
        g = lambda t: f(t[:, None])
        ig = Integrand1D(g, decay_exponent=decay)
        lo, hi = lower[0], upper[0]
        if math.isinf(lo) or math.isinf(hi):
            return integrate_axis(g, lo, hi, cfg), 0.0
        return integrate_1d(ig, lo, hi, cfg)
    return level([], 0, cfg), 0.0


def integrate_nd(
    f,
    region,
    N: int,
    cfg: QuadConfig = DEFAULT_CONFIG,
    *,
    radial: bool = False,
    pole=None,
    pole_exponent: float | None = None,
    decay_exponent: float | None = None,
):
    """Integral of f over a ball, box, slab or all of R^N, 1 <= N <= 3.

    ``f`` maps an (M, N) array to M values.  With ``radial=True`` it is a
    function of the distance to the region center and the polar reduction
    with the sphere measure omega_N is used.  ``pole`` moves the polar
    origin to a singular point of f and ``pole_exponent`` is the exponent
    beta with |f| ~ |y - pole|^beta there.
    """
    if not (1 <= N <= 3):
        raise UnsupportedDimensionError(f"numerical integration supports N <= 3, got {N}")
    if radial:
        if isinstance(region, Ball):
            g = Integrand1D(lambda r: f(r) * r ** (N - 1))
            v, e = integrate_1d(g, 0.0, region.radius, cfg)
        elif isinstance(region, Whole):
            dec = None if decay_exponent is None else decay_exponent - (N - 1)
            v, e = integrate_improper(Integrand1D(lambda r: f(r) * r ** (N - 1), decay_exponent=dec), 0.0, cfg)
        else:
            raise ParameterError("radial reduction needs a Ball or Whole region")
        w = omega(N) if N > 1 else 2.0
        return w * v, w * e
    if isinstance(region, Ball):
        c = np.asarray(region.center, dtype=float)
        if N == 1:
            lo, hi = c[0] - region.radius, c[0] + region.radius
            bps, exps = (), ()
            if pole is not None and lo < float(np.ravel(pole)[0]) < hi:
                bps, exps = (float(np.ravel(pole)[0]),), (pole_exponent,)
            return integrate_1d(Integrand1D(lambda t: f(t[:, None]), bps, exps), lo, hi, cfg)
        return _polar_ball(f, N, c, region.radius, pole, pole_exponent, cfg)
    if isinstance(region, Box):
        return _iterated_box(f, N, list(map(float, region.lower)), list(map(float, region.upper)), decay_exponent, cfg)
    if isinstance(region, Slab):
        lower = [region.lo] + [-math.inf] * (N - 1)
        upper = [region.hi] + [math.inf] * (N - 1)
        return _iterated_box(f, N, lower, upper, decay_exponent, cfg)
    if isinstance(region, Whole):
        if N == 1:
            c = float(region.center[0]) if len(region.center) else 0.0
            return integrate_real_line(Integrand1D(lambda t: f(t[:, None]), decay_exponent=decay_exponent), cfg, c)
        return _polar_whole(f, N, region.center, decay_exponent, cfg)
    raise ParameterError(f"unknown region {region!r}")


# ---------------------------------------------------------- extrapolation


def richardson(samples: Sequence, order_hint: float, step: float = 1.0):
    """Extrapolated limit and a crude error estimate.

    Fits v(h) = L + sum_j C_j h^(order_hint + j*step) through all samples.
    The error estimate is the change when the coarsest sample is dropped.
    """
    pts = [(float(h), float(v)) for h, v in samples]
    if len(pts) < 3:
        raise DegenerateLadderError("at least 3 samples are needed")
    hs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(hs <= 0) or np.any(np.diff(hs) >= 0):
        raise DegenerateLadderError("h must be positive and strictly decreasing")
    if np.any(hs[1:] / hs[:-1] > 0.95):
        raise DegenerateLadderError("consecutive h ratios must stay below 0.95")

    def solve(h, v):
        x = h / h[0]
        cols = [np.ones_like(x)] + [x ** (order_hint + j * step) for j in range(len(x) - 1)]
        A = np.stack(cols, axis=1)
        return float(np.linalg.solve(A, v)[0])

    L = solve(hs, vs)
    L2 = solve(hs[1:], vs[1:])
    return L, abs(L - L2)


def limit_extrapolate(samples: Sequence, order_hint: float, step: float = 1.0) -> float:
    """Richardson-type limit of v(h) as h -> 0."""
    return richardson(samples, order_hint, step)[0]
