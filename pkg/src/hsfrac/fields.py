"""Evaluable scalar fields with the geometric metadata quadrature relies on.

A field knows where it is not smooth (its kinks), where it is supported,
and how it behaves at infinity.  Fields may also expose ``line_taylor``:
Taylor coefficients of r -> u(x + r*theta) at r = 0, which lets the
fractional Laplacian treat the cancelling near-origin region exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError

# ------------------------------------------------------------------ kinks


@dataclass(frozen=True)
class Hyperplane:
    """The set {x : x . normal = offset}; normal is a unit vector."""

    normal: tuple
    offset: float
    exponent: Optional[float] = None

    def distance(self, x):
        return abs(float(np.dot(self.normal, x)) - self.offset)

    def line_hits(self, x, theta):
        nt = float(np.dot(self.normal, theta))
        if nt == 0.0:
            return []
        return [(self.offset - float(np.dot(self.normal, x))) / nt]


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float
    exponent: Optional[float] = None

    def distance(self, x):
        return abs(float(np.linalg.norm(np.asarray(x) - np.asarray(self.center))) - self.radius)

    def line_hits(self, x, theta):
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        th = np.asarray(theta, dtype=float)
        a = float(th @ th)
        b = float(th @ d)
        c = float(d @ d) - self.radius**2
        disc = b * b - a * c
        if disc < 0.0:
            return []
        sq = math.sqrt(disc)
        return [(-b - sq) / a, (-b + sq) / a]


@dataclass(frozen=True)
class PointKink:
    point: tuple
    exponent: Optional[float] = None

    def distance(self, x):
        return float(np.linalg.norm(np.asarray(x) - np.asarray(self.point)))

    def line_hits(self, x, theta):
        th = np.asarray(theta, dtype=float)
        d = np.asarray(self.point, dtype=float) - np.asarray(x, dtype=float)
        t = float(th @ d) / float(th @ th)
        if np.linalg.norm(d - t * th) <= 1e-13 * (1.0 + np.linalg.norm(d)):
            return [t]
        return []


# -------------------------------------------------------------- supports


@dataclass(frozen=True)
class BallSupport:
    """Closed ball containing the support."""

    center: tuple
    radius: float

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - np.asarray(self.center)) <= self.radius


@dataclass(frozen=True)
class HalfspaceSupport:
    """{x : x . normal >= offset}."""

    normal: tuple
    offset: float

    def contains(self, x):
        return float(np.dot(self.normal, x)) >= self.offset


@dataclass(frozen=True)
class ExteriorSupport:
    """Complement of the open ball."""

    center: tuple
    radius: float

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - np.asarray(self.center)) >= self.radius


# ----------------------------------------------------------------- field


@dataclass(frozen=True)
class ScalarField:
    """u : R^N -> R with metadata.

    evaluator    maps an (M, N) array to M values
    support      None (global) or one of the *Support classes
    decay_exponent
                 p with |u(x)| <= C (1+|x|)^-p; negative values mean growth
    kinks        loci where u is not smooth, each with an exponent hint
    smoothness   regularity order at generic points
    line_taylor  optional (x, theta, n) -> n+1 Taylor coefficients of
                 r -> u(x + r theta) at r = 0
    scale        length below which u is well resolved by a polynomial
                 (radius of analyticity away from kinks)
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    N: int
    support: object = None
    decay_exponent: float = 0.0
    kinks: tuple = ()
    smoothness: float = math.inf
    line_taylor: Optional[Callable] = None
    scale: float = 1.0
    label: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and self.N > 1 or (self.N == 1 and x.ndim == 0):
            return float(self.evaluator(x.reshape(1, self.N))[0])
        shp = x.shape[:-1] if self.N > 1 or x.ndim > 1 else x.shape
        pts = x.reshape(-1, self.N)
        return np.asarray(self.evaluator(pts), dtype=float).reshape(shp)

    def values(self, pts):
        """Evaluate on an (M, N) array."""
        return np.asarray(self.evaluator(np.asarray(pts, dtype=float).reshape(-1, self.N)), dtype=float)

    @property
    def is_compact(self) -> bool:
        return isinstance(self.support, BallSupport)

    def in_L1s(self, s: float) -> bool:
        """Weighted integrability from the metadata: growth slower than |x|^2s."""
        if not self.decay_exponent > -2.0 * s:
            return False
        for k in self.kinks:
            if k.exponent is None:
                continue
            limit = -self.N if isinstance(k, PointKink) else -1.0
            if not k.exponent > limit:
                return False
        return True

    def kink_distance(self, x) -> float:
        if not self.kinks:
            return math.inf
        return min(k.distance(x) for k in self.kinks)

    def line_breakpoints(self, x, theta, kmax: int):
        """Radii r > 0 at which some x + k r theta (1 <= |k| <= kmax) meets a kink."""
        out = {}
        for kink in self.kinks:
            for t in kink.line_hits(x, theta):
                if t == 0.0:
                    continue
                for k in range(1, kmax + 1):
                    r = abs(t) / k
                    ex = kink.exponent
                    if r not in out:
                        out[r] = ex
                    elif ex is not None and (out[r] is None or ex < out[r]):
                        out[r] = ex
        return sorted(out.items())

    def reach(self, x, theta) -> Optional[float]:
        """Radius beyond which every shifted point x + k r theta (|k| >= 1) leaves the support."""
        if not isinstance(self.support, BallSupport):
            return None
        d = float(np.linalg.norm(np.asarray(x) - np.asarray(self.support.center)))
        return (d + self.support.radius) / float(np.linalg.norm(theta))

    def special_normals(self):
        """Directions n such that rays orthogonal to n need an angular breakpoint."""
        return [np.asarray(k.normal, dtype=float) for k in self.kinks if isinstance(k, Hyperplane)]

    def with_meta(self, **changes) -> "ScalarField":
        return replace(self, **changes)


# --------------------------------------------------------- standard fields


def _binom_taylor(base, a, step, n):
    """Coefficients of (base + step*r)^a in powers of r."""
    out = np.empty(n + 1)
    out[0] = base**a
    ratio = step / base
    for j in range(1, n + 1):
        out[j] = out[j - 1] * (a - j + 1) / j * ratio
    return out


def power_field(a: float, N: int = 1, weight_poly: Sequence[float] | None = None) -> ScalarField:
    """(x_1)_+^a, optionally multiplied by a polynomial q(x_1) = sum c_i x_1^i."""
    poly = np.polynomial.Polynomial(weight_poly if weight_poly is not None else [1.0])

    def ev(pts):
        x1 = pts[:, 0]
        out = np.zeros(len(x1))
        pos = x1 > 0
        out[pos] = x1[pos] ** a * poly(x1[pos])
        return out

    def taylor(x, theta, n):
        x1, t1 = float(x[0]), float(theta[0])
        if x1 <= 0:
            return np.zeros(n + 1)
        base = _binom_taylor(x1, a, t1, n)
        shifted = poly(np.polynomial.Polynomial([x1, t1]))
        qc = np.zeros(n + 1)
        c = shifted.coef[: n + 1]
        qc[: len(c)] = c
        return np.convolve(base, qc)[: n + 1]

    e1 = tuple([1.0] + [0.0] * (N - 1))
    growth = -(a + poly.degree())
    return ScalarField(
        ev,
        N,
        support=HalfspaceSupport(e1, 0.0),
        decay_exponent=growth,
        kinks=(Hyperplane(e1, 0.0, a),),
        line_taylor=taylor,
        label=f"(x1)_+^{a}",
    )


def lorentzian(N: int = 1) -> ScalarField:
    """1/(1+x_1^2), lifted trivially when N > 1."""

    def ev(pts):
        return 1.0 / (1.0 + pts[:, 0] ** 2)

    def taylor(x, theta, n):
        z = complex(float(x[0]), -1.0)
        j = np.arange(n + 1)
        coef = np.array([(-1.0) ** k * z ** (-(k + 1)) for k in j])
        return np.imag(coef) * float(theta[0]) ** j

    return ScalarField(
        ev,
        N,
        decay_exponent=2.0 if N == 1 else 0.0,
        line_taylor=taylor,
        scale=1.0,
        label="1/(1+x1^2)",
    )


def constant_field(value: float, N: int) -> ScalarField:
    def taylor(x, theta, n):
        out = np.zeros(n + 1)
        out[0] = value
        return out

    return ScalarField(lambda p: np.full(len(p), float(value)), N, decay_exponent=0.0, line_taylor=taylor, label="const")


def zero_field(N: int) -> ScalarField:
    f = constant_field(0.0, N)
    return f.with_meta(support=BallSupport(tuple([0.0] * N), 0.0), label="zero")


def lift(v: ScalarField, N: int) -> ScalarField:
    """Cylindrical lift u(x) = v(x_1, ..., x_k) from R^k to R^N."""
    k = v.N
    if N <= k:
        raise ParameterError("lift needs N > k")

    def ev(pts):
        return v.evaluator(np.ascontiguousarray(pts[:, :k]))

    taylor = None
    if v.line_taylor is not None:
        def taylor(x, theta, n):
            return v.line_taylor(np.asarray(x)[:k], np.asarray(theta)[:k], n)

    kinks = []
    for kk in v.kinks:
        if isinstance(kk, Hyperplane):
            kinks.append(Hyperplane(tuple(kk.normal) + (0.0,) * (N - k), kk.offset, kk.exponent))
        elif isinstance(kk, PointKink) and k == 1:
            kinks.append(Hyperplane((1.0,) + (0.0,) * (N - 1), float(kk.point[0]), kk.exponent))
        else:
            raise ParameterError("only hyperplane and 1-D point kinks can be lifted")
    support = None
    if isinstance(v.support, HalfspaceSupport):
        support = HalfspaceSupport(tuple(v.support.normal) + (0.0,) * (N - k), v.support.offset)
    return ScalarField(
        ev,
        N,
        support=support,
        decay_exponent=min(v.decay_exponent, 0.0),
        kinks=tuple(kinks),
        smoothness=v.smoothness,
        line_taylor=taylor,
        scale=v.scale,
        label=f"lift({v.label})",
    )


def affine(u: ScalarField, lam: float, shift=None) -> ScalarField:
    """x -> u(lam*x + shift)."""
    N = u.N
    b = np.zeros(N) if shift is None else np.asarray(shift, dtype=float)

    def ev(pts):
        return u.evaluator(lam * pts + b[None, :])

    taylor = None
    if u.line_taylor is not None:
        def taylor(x, theta, n):
            return u.line_taylor(lam * np.asarray(x) + b, lam * np.asarray(theta), n)

    def pull_point(p):
        return tuple((np.asarray(p) - b) / lam)

    kinks = []
    for k in u.kinks:
        if isinstance(k, Hyperplane):
            kinks.append(Hyperplane(k.normal, (k.offset - float(np.dot(k.normal, b))) / lam, k.exponent))
        elif isinstance(k, Sphere):
            kinks.append(Sphere(pull_point(k.center), k.radius / abs(lam), k.exponent))
        else:
            kinks.append(PointKink(pull_point(k.point), k.exponent))
    support = u.support
    if isinstance(support, BallSupport):
        support = BallSupport(pull_point(support.center), support.radius / abs(lam))
    elif support is not None:
        support = None
    return ScalarField(ev, N, support, u.decay_exponent, tuple(kinks), u.smoothness, taylor, u.scale / abs(lam), f"affine({u.label})")


# ------------------------------------------------------------------ bumps

PROFILES = ("exp", "poly")


@dataclass(frozen=True)
class Bump:
    """weight * phi(|x - center| / radius) with phi the chosen profile."""

    center: tuple
    radius: float
    weight: float = 1.0
    profile: str = "poly"
    q: int = 8

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ParameterError(f"unknown bump profile {self.profile!r}")
        if not self.radius > 0:
            raise ParameterError("bump radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def profile_values(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = t < 1.0
        if self.profile == "poly":
            out[inside] = (1.0 - t[inside] ** 2) ** self.q
        else:
            out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out

    def sup_norm(self):
        return abs(self.weight) * (1.0 if self.profile == "poly" else math.exp(-1.0))

    def evaluate(self, pts, center=None):
        c = np.asarray(self.center if center is None else center)
        r = np.linalg.norm(pts - c[None, :], axis=1) / self.radius
        return self.weight * self.profile_values(r)

    def taylor(self, x, theta, n):
        """Exact line coefficients for the polynomial profile, None otherwise."""
        if self.profile != "poly":
            return None
        d = np.asarray(x, dtype=float) - np.asarray(self.center)
        th = np.asarray(theta, dtype=float)
        A = float(d @ d)
        out = np.zeros(n + 1)
        if A >= self.radius**2:
            return out
        inner = np.polynomial.Polynomial([1.0 - A / self.radius**2, -2.0 * float(th @ d) / self.radius**2, -float(th @ th) / self.radius**2])
        c = (inner**self.q).coef[: n + 1]
        out[: len(c)] = c
        return self.weight * out

    def as_dict(self):
        return {"center": list(self.center), "radius": self.radius, "weight": self.weight, "profile": self.profile, "q": self.q}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["center"]), float(d["radius"]), float(d.get("weight", 1.0)), d.get("profile", "poly"), int(d.get("q", 8)))


def bump_field(bumps: Sequence[Bump], N: int) -> ScalarField:
    """Field whose value is the sum of the bumps."""
    bumps = tuple(bumps)
    for b in bumps:
        if len(b.center) != N:
            raise ParameterError(f"bump center {b.center} is not a point of R^{N}")
    if not bumps:
        return zero_field(N)

    def ev(pts):
        out = np.zeros(len(pts))
        for b in bumps:
            out += b.evaluate(pts)
        return out

    taylor = None
    if all(b.profile == "poly" for b in bumps):
        def taylor(x, theta, n):
            return sum(b.taylor(x, theta, n) for b in bumps)

    centers = np.array([b.center for b in bumps])
    hub = centers.mean(axis=0)
    rad = max(float(np.linalg.norm(np.asarray(b.center) - hub)) + b.radius for b in bumps)
    kinks = tuple(Sphere(b.center, b.radius, float(b.q) if b.profile == "poly" else None) for b in bumps)
    smooth = min((b.q if b.profile == "poly" else math.inf) for b in bumps)
    return ScalarField(ev, N, BallSupport(tuple(hub), rad), math.inf, kinks, smooth, taylor, min(b.radius for b in bumps), "bumps")
