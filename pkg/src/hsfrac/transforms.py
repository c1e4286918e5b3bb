"""Point inversions, Kelvin transforms and weighted boundary traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CenterPointError, ExtrapolationError, ParameterError
from .fields import (
    BallSupport,
    ExteriorSupport,
    HalfspaceSupport,
    Hyperplane,
    PointKink,
    ScalarField,
    Sphere,
)
from .params import Params
from .quadrature import DEFAULT_CONFIG, QuadConfig, richardson


@dataclass(frozen=True)
class Inversion:
    """kappa x = c (x + v)/|x + v|^2 - v."""

    c: float
    v: tuple

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError("inversion scale c must be positive")
        object.__setattr__(self, "v", tuple(float(t) for t in np.atleast_1d(self.v)))

    @property
    def N(self) -> int:
        return len(self.v)

    @property
    def center(self) -> np.ndarray:
        return -np.asarray(self.v)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """kappa on an (M, N) array; rows equal to -v give nan."""
        w = np.asarray(pts, dtype=float) + np.asarray(self.v)[None, :]
        r2 = np.einsum("ij,ij->i", w, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.c * w / r2[:, None] - np.asarray(self.v)[None, :]
        return out


def invert_point(inv: Inversion, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (inv.N,):
        raise ParameterError(f"point of dimension {x.size} for an inversion in R^{inv.N}")
    w = x + np.asarray(inv.v)
    r2 = float(w @ w)
    if r2 == 0.0:
        raise CenterPointError(f"inversion is undefined at its center {(-w + x).tolist()}")
    return inv.c * w / r2 - np.asarray(inv.v)


def jacobian_det(inv: Inversion, x) -> float:
    """|det D kappa(x)| = c^N |x + v|^(-2N)."""
    w = np.atleast_1d(np.asarray(x, dtype=float)) + np.asarray(inv.v)
    r2 = float(w @ w)
    if r2 == 0.0:
        raise CenterPointError("Jacobian is undefined at the inversion center")
    return inv.c**inv.N * r2 ** (-inv.N)


def inversion_identities(inv: Inversion, x, y):
    """Both sides of the three standard identities for c = 2, v = e1.

    Returns ((lhs, rhs), ...) for
    1 - |kx|^2 = 4 x1/|x+e1|^2,
    |kx - ky| = 2|x-y|/(|x+e1||y+e1|),
    |ky + e1| = 2/|y+e1|.
    """
    e1 = np.zeros(inv.N)
    e1[0] = 1.0
    if inv.c != 2.0 or not np.array_equal(np.asarray(inv.v), e1):
        raise ParameterError("the identities are stated for c = 2, v = e1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    kx, ky = invert_point(inv, x), invert_point(inv, y)
    nx, ny = float(np.linalg.norm(x + e1)), float(np.linalg.norm(y + e1))
    return (
        (1.0 - float(kx @ kx), 4.0 * x[0] / nx**2),
        (float(np.linalg.norm(kx - ky)), 2.0 * float(np.linalg.norm(x - y)) / (nx * ny)),
        (float(np.linalg.norm(ky + e1)), 2.0 / ny),
    )


# ------------------------------------------------------- metadata mapping
#
# Work in shifted coordinates: z + v = zeta for the source and x + v = w for
# the image, so zeta = c w/|w|^2 is a pure inversion about the origin.


def _map_sphere(inv: Inversion, center, radius, exponent):
    z0 = np.asarray(center, dtype=float) + np.asarray(inv.v)
    q = float(z0 @ z0) - radius**2
    if abs(q) <= 1e-14 * max(1.0, radius**2):
        nz = float(np.linalg.norm(z0))
        n = z0 / nz
        return Hyperplane(tuple(n), inv.c / (2.0 * nz) - float(n @ np.asarray(inv.v)), exponent)
    return Sphere(tuple(inv.c * z0 / q - np.asarray(inv.v)), inv.c * radius / abs(q), exponent)


def _map_plane(inv: Inversion, normal, offset, exponent):
    n = np.asarray(normal, dtype=float)
    d = offset + float(n @ np.asarray(inv.v))
    if d == 0.0:
        return Hyperplane(tuple(n), -float(n @ np.asarray(inv.v)), exponent)
    return Sphere(tuple(inv.c * n / (2.0 * d) - np.asarray(inv.v)), inv.c / (2.0 * abs(d)), exponent)


def _map_kink(inv: Inversion, k):
    if isinstance(k, Sphere):
        return _map_sphere(inv, k.center, k.radius, k.exponent)
    if isinstance(k, Hyperplane):
        return _map_plane(inv, k.normal, k.offset, k.exponent)
    if isinstance(k, PointKink):
        zeta = np.asarray(k.point, dtype=float) + np.asarray(inv.v)
        if not np.any(zeta):
            return None
        return PointKink(tuple(inv.c * zeta / float(zeta @ zeta) - np.asarray(inv.v)), k.exponent)
    raise ParameterError(f"unknown kink type {type(k).__name__}")


def _map_support(inv: Inversion, sup):
    """Image of a support region; returns (support, compact)."""
    if sup is None:
        return None, False
    if isinstance(sup, BallSupport):
        if sup.radius == 0.0:
            # empty support stays empty
            zeta = np.asarray(sup.center, dtype=float) + np.asarray(inv.v)
            where = inv.center if not np.any(zeta) else invert_point(inv, sup.center)
            return BallSupport(tuple(where), 0.0), True
        img = _map_sphere(inv, sup.center, sup.radius, None)
        center_inside = sup.contains(inv.center)
        if isinstance(img, Hyperplane):
            # -v on the sphere: the ball maps to a half-space
            probe = np.asarray(sup.center) + 0.5 * (np.asarray(sup.center) - inv.center)
            n = np.asarray(img.normal)
            side = float(n @ invert_point(inv, probe)) >= img.offset
            return (HalfspaceSupport(tuple(n), img.offset) if side else HalfspaceSupport(tuple(-n), -img.offset)), False
        if center_inside:
            return ExteriorSupport(img.center, img.radius), False
        return BallSupport(img.center, img.radius), True
    if isinstance(sup, HalfspaceSupport):
        n = np.asarray(sup.normal, dtype=float)
        d = sup.offset + float(n @ np.asarray(inv.v))
        img = _map_plane(inv, sup.normal, sup.offset, None)
        if isinstance(img, Hyperplane):
            return HalfspaceSupport(tuple(n), img.offset), False
        if d > 0:
            return BallSupport(img.center, img.radius), True
        return ExteriorSupport(img.center, img.radius), False
    if isinstance(sup, ExteriorSupport):
        img = _map_sphere(inv, sup.center, sup.radius, None)
        if isinstance(img, Hyperplane):
            return None, False
        if sup.contains(inv.center):
            return BallSupport(img.center, img.radius), True
        return None, False
    raise ParameterError(f"unknown support type {type(sup).__name__}")


def _exponent_at_center(u: ScalarField, inv: Inversion) -> float:
    """Local power of |u| near -v (0 if u is generic there)."""
    x0 = inv.center
    ex = []
    for k in u.kinks:
        if k.distance(x0) <= 1e-14:
            ex.append(0.0 if k.exponent is None else float(k.exponent))
    if u.support is not None and not u.support.contains(x0):
        return math.inf
    return min(ex) if ex else 0.0


@dataclass(frozen=True)
class KelvinField(ScalarField):
    """K_s u(x) = |x + v|^(2s - N) u(kappa x)."""

    base: Optional[ScalarField] = None
    inversion: Optional[Inversion] = None
    s: float = 0.0


def kelvin_apply(u: ScalarField, inv: Inversion, s: float) -> KelvinField:
    N = u.N
    if inv.N != N:
        raise ParameterError("inversion and field dimensions differ")
    c, v = inv.c, np.asarray(inv.v)
    expo = 2.0 * s - N
    e_center = _exponent_at_center(u, inv)
    near_power = expo + u.decay_exponent  # behavior of K_s u at -v

    def ev(pts):
        pts = np.asarray(pts, dtype=float)
        w = pts + v[None, :]
        r2 = np.einsum("ij,ij->i", w, w)
        out = np.zeros(len(pts))
        ok = r2 > 0
        if np.any(ok):
            z = c * w[ok] / r2[ok, None] - v[None, :]
            out[ok] = r2[ok] ** (0.5 * expo) * u.evaluator(z)
        if not np.all(ok):
            out[~ok] = 0.0 if near_power > 0 else math.inf
        return out

    kinks = [k2 for k2 in (_map_kink(inv, k) for k in u.kinks) if k2 is not None]
    support, compact = _map_support(inv, u.support)
    if not compact and math.isfinite(near_power):
        kinks.append(PointKink(tuple(inv.center), near_power))
    decay = math.inf if compact else N - 2.0 * s + e_center
    # local stretch of the inversion over the source's region of interest
    if isinstance(u.support, BallSupport) and compact and u.support.radius > 0:
        far = float(np.linalg.norm(np.asarray(u.support.center) + v)) + u.support.radius
        scale = u.scale * c / far**2
    else:
        scale = u.scale * min(1.0, c / (1.0 + float(np.linalg.norm(v))) ** 2)
    return KelvinField(
        ev,
        N,
        support,
        decay,
        tuple(kinks),
        u.smoothness,
        None,
        scale,
        f"K_{s:g}[{u.label}]",
        base=u,
        inversion=inv,
        s=float(s),
    )


def kelvin_covariance_check(
    u: ScalarField,
    inv: Inversion,
    params: Params,
    x,
    cfg: QuadConfig = DEFAULT_CONFIG,
):
    """(lhs, rhs) of (-Delta)^s K_s u = c^2s |x+v|^-4s K_s[(-Delta)^s u]."""
    from .fraclap import frac_laplacian_at

    x = np.atleast_1d(np.asarray(x, dtype=float))
    s, N = params.s, params.N
    ku = kelvin_apply(u, inv, s)
    lhs = frac_laplacian_at(ku, x, params, cfg)[0]
    w = x + np.asarray(inv.v)
    r = float(np.linalg.norm(w))
    inner = frac_laplacian_at(u, invert_point(inv, x), params, cfg)[0]
    rhs = inv.c ** (2 * s) * r ** (-4 * s) * r ** (2 * s - N) * inner
    return lhs, rhs


# ------------------------------------------------------------------ traces


def _ladder_F(u: ScalarField, zp: np.ndarray, sigma: float, hs: np.ndarray) -> np.ndarray:
    pts = np.zeros((hs.size, u.N))
    pts[:, 0] = hs
    pts[:, 1:] = zp[None, :]
    return hs ** (1.0 - sigma) * u.values(pts)


def _boundary_tail(u: ScalarField, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size == u.N:
        if z[0] != 0.0:
            raise ParameterError("trace point must lie on {x1 = 0}")
        return z[1:]
    if z.size == u.N - 1:
        return z
    raise ParameterError(f"boundary point of size {z.size} for a field on R^{u.N}")


def _default_step(u: ScalarField, k: int) -> float:
    return 0.25 * min(u.scale, 1.0) / (k + 1)


def trace_D_with_error(
    u: ScalarField,
    z,
    k: int,
    sigma: float,
    cfg: QuadConfig = DEFAULT_CONFIG,
    h0: float | None = None,
):
    """(1/k!) lim_{x1 -> 0+} d^k/dx1^k [x1^(1-sigma) u] and an error estimate.

    At each ladder step h the k-th forward divided difference of
    F = x1^(1-sigma) u on the nodes h, 2h, ..., (k+1)h approximates
    F^(k)(0)/k! with an O(h) error, removed by Richardson extrapolation.
    """
    if k < 0:
        raise ParameterError("trace order k must be nonnegative")
    zp = _boundary_tail(u, z)
    h0 = _default_step(u, k) if h0 is None else float(h0)
    levels = max(3, cfg.extrapolation_levels)
    nodes = np.arange(1, k + 2, dtype=float)
    # k-th divided difference on equispaced nodes j*h: sum_j w_j F(j h) / h^k
    weights = np.array([(-1) ** (k - j) * math.comb(k, j) for j in range(k + 1)], dtype=float) / math.factorial(k)
    samples = []
    for i in range(levels):
        h = h0 * 0.5**i
        F = _ladder_F(u, zp, sigma, h * nodes)
        samples.append((h, float(weights @ F) / h**k))
    val, err = richardson(samples, 1.0, 1.0)
    if not (math.isfinite(val) and math.isfinite(err)):
        raise ExtrapolationError(f"trace ladder produced non-finite values {samples}")
    _check_contracting(*zip(*samples), val)
    return val, err


def _check_contracting(hs, vals, val) -> None:
    """A ladder converging at O(h) has successive changes shrinking by about
    half; growing changes mean the limit does not exist (e.g. x1^(-a) blowup)."""
    d = np.abs(np.diff(np.asarray(vals, dtype=float)))
    noise = 1e-6 * max(1.0, abs(val))
    if d.size >= 2 and d[-1] > noise and d[-1] > 0.9 * d[-2]:
        raise ExtrapolationError(f"trace ladder diverges: last changes {d[-2]:.3e}, {d[-1]:.3e}")


def trace_D(u: ScalarField, z, k: int, sigma: float, cfg: QuadConfig = DEFAULT_CONFIG, h0: float | None = None) -> float:
    val, err = trace_D_with_error(u, z, k, sigma, cfg, h0)
    if err > 1e-2 * max(1.0, abs(val)):
        raise ExtrapolationError(f"trace ladder did not stabilize: {val} +- {err}")
    return val


def trace_limit(u: ScalarField, z, k: int, sigma: float, cfg: QuadConfig = DEFAULT_CONFIG, h0: float | None = None) -> float:
    """lim x1^(1-k-sigma) u(x1, z'), valid when the lower traces vanish."""
    zp = _boundary_tail(u, z)
    h0 = _default_step(u, k) if h0 is None else float(h0)
    levels = max(3, cfg.extrapolation_levels)
    hs = h0 * 0.5 ** np.arange(levels)
    vals = _ladder_F(u, zp, sigma, hs) / hs**k
    val, err = richardson(list(zip(hs, vals)), 1.0, 1.0)
    if not math.isfinite(val) or err > 1e-2 * max(1.0, abs(val)):
        raise ExtrapolationError(f"trace ladder did not stabilize: {val} +- {err}")
    _check_contracting(hs, vals, val)
    return val
