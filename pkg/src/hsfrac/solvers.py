"""Solutions of the half-space problem assembled from bump data.

Every solution is a ScalarField whose evaluator carries out the kernel
integral.  In one dimension (and for boundary data in two) the integrals
use fixed composite Gauss rules whose nodes move smoothly with the
evaluation point.  This matters when a solution is fed back into the
fractional Laplacian or a finite-difference trace: an adaptive mesh that
switches between nearby points would inject noise far above the nominal
tolerance into those differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._rules import legendre_unit
from .errors import ParameterError
from .fields import Bump, HalfspaceSupport, Hyperplane, ScalarField, bump_field
from .kernels import (
    boundary_kernel_coeffs,
    green_halfspace_pairs,
    poisson_nonlocal_batch,
)
from .params import Params, constants
from .quadrature import DEFAULT_CONFIG, Ball, QuadConfig, integrate_nd, richardson
from .transforms import Inversion, _map_sphere, trace_D

DOMAIN_TAGS = ("interior", "exterior", "boundary")


# ------------------------------------------------------------------ data


@dataclass(frozen=True)
class BumpSum:
    """Data given as a finite sum of bumps, tagged with the region it lives in."""

    terms: tuple
    domain_tag: str
    N: int

    def __post_init__(self):
        if self.domain_tag not in DOMAIN_TAGS:
            raise ParameterError(f"domain_tag must be one of {DOMAIN_TAGS}")
        object.__setattr__(self, "terms", tuple(self.terms))
        for b in self.terms:
            if len(b.center) != self.N:
                raise ParameterError(f"bump center {b.center} is not a point of R^{self.N}")
            c1, r = b.center[0], b.radius
            if self.domain_tag == "interior" and not c1 - r > 0:
                raise ParameterError(f"interior bump {b.center}, r={r} must lie in {{x1 > 0}}")
            if self.domain_tag == "exterior" and not c1 + r < 0:
                raise ParameterError(f"exterior bump {b.center}, r={r} must lie in {{x1 < 0}}")
            if self.domain_tag == "boundary" and c1 != 0.0:
                raise ParameterError(f"boundary bump center {b.center} must have x1 = 0")

    @classmethod
    def empty(cls, tag: str, N: int) -> "BumpSum":
        return cls((), tag, N)

    @property
    def is_empty(self) -> bool:
        return all(b.weight == 0 for b in self.terms)

    def validate_for(self, params: Params) -> None:
        """Smoothness requirement tied to the order of the problem."""
        need = 2 * params.m + 3
        for b in self.terms:
            if b.profile == "poly" and b.q < need:
                raise ParameterError(f"polynomial bump exponent q={b.q} below the required {need} for m={params.m}")

    def field(self) -> ScalarField:
        return bump_field(self.terms, self.N)

    def values(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.N)
        out = np.zeros(len(pts))
        for b in self.terms:
            out += b.evaluate(pts)
        return out

    def boundary_values(self, tangential) -> np.ndarray:
        """h(y') for boundary data, tangential points of shape (M, N-1)."""
        t = np.asarray(tangential, dtype=float).reshape(-1, self.N - 1)
        pts = np.concatenate([np.zeros((len(t), 1)), t], axis=1)
        return self.values(pts)

    def sup_norm(self) -> float:
        """Upper bound for the sup norm (exact for a single bump)."""
        return sum(b.sup_norm() for b in self.terms)

    def scaled(self, factor: float) -> "BumpSum":
        terms = tuple(Bump(b.center, b.radius, b.weight * factor, b.profile, b.q) for b in self.terms)
        return BumpSum(terms, self.domain_tag, self.N)

    def __add__(self, other: "BumpSum") -> "BumpSum":
        if (other.domain_tag, other.N) != (self.domain_tag, self.N):
            raise ParameterError("only data of the same kind and dimension can be added")
        return BumpSum(self.terms + other.terms, self.domain_tag, self.N)

    def min_radius(self) -> float:
        return min((b.radius for b in self.terms), default=1.0)

    def as_dict(self) -> dict:
        return {"domain_tag": self.domain_tag, "N": self.N, "terms": [b.as_dict() for b in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "BumpSum":
        return cls(tuple(Bump.from_dict(t) for t in d.get("terms", [])), d["domain_tag"], int(d["N"]))


# ---------------------------------------------------------- fixed rules

_GRADE_RATIO = 0.3
_GRADE_LEVELS = 22
_GRADE_ORDER = 12


def _graded_unit(ratio: float = _GRADE_RATIO, levels: int = _GRADE_LEVELS, n: int = _GRADE_ORDER):
    """Composite Gauss rule on [0, 1] with panels shrinking geometrically toward 0."""
    u, w = legendre_unit(n)
    edges = np.concatenate([[0.0], ratio ** np.arange(levels, -1, -1)])
    lo, width = edges[:-1], np.diff(edges)
    return (lo[:, None] + width[:, None] * u[None, :]).ravel(), (width[:, None] * w[None, :]).ravel()


_GU, _GW = _graded_unit()


def _composite_unit(panels: int, n: int):
    u, w = legendre_unit(n)
    lo = np.arange(panels) / panels
    return (lo[:, None] + u[None, :] / panels).ravel(), np.tile(w / panels, panels)


_CU, _CW = _composite_unit(8, 16)


def _ball_rule(center, radius: float, N: int):
    """Tensor rule over a ball: Gauss in the radius, periodic or Gauss in angles."""
    c = np.asarray(center, dtype=float)
    r = radius * _CU
    wr = radius * _CW
    if N == 1:
        nodes = np.concatenate([c[0] - r[::-1], c[0] + r])
        return nodes[:, None], np.concatenate([wr[::-1], wr])
    if N == 2:
        nt = 96
        th = 2 * np.pi * np.arange(nt) / nt
        R, T = np.meshgrid(r, th, indexing="ij")
        W = (wr * r)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]
        pts = np.stack([c[0] + R * np.cos(T), c[1] + R * np.sin(T)], axis=-1).reshape(-1, 2)
        return pts, W.ravel()
    if N == 3:
        nt = 48
        cz, wz = legendre_unit(24)
        cz, wz = 2 * cz - 1, 2 * wz
        ph = 2 * np.pi * np.arange(nt) / nt
        R, Z, P = np.meshgrid(r, cz, ph, indexing="ij")
        S = np.sqrt(1 - Z**2)
        W = (wr * r * r)[:, None, None] * wz[None, :, None] * np.full(nt, 2 * np.pi / nt)[None, None, :]
        pts = np.stack([c[0] + R * Z, c[1] + R * S * np.cos(P), c[2] + R * S * np.sin(P)], axis=-1).reshape(-1, 3)
        return pts, W.ravel()
    raise ParameterError("ball rule supports N <= 3")


# ------------------------------------------------------------ evaluators


class _GreenEval:
    """x -> int G_s(x, y) f(y) dy over the bump supports."""

    def __init__(self, f: BumpSum, params: Params, cfg: QuadConfig):
        self.f, self.params, self.cfg = f, params, cfg

    def _one_dim(self, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        out = np.zeros(len(x))
        for b in self.f.terms:
            a, bb = b.center[0] - b.radius, b.center[0] + b.radius
            xi = np.clip(x, a, bb)
            for p, q in ((xi, np.full_like(x, a)), (xi, np.full_like(x, bb))):
                # graded toward p = clip(x), running to the interval end q
                Y = p[:, None] + (q - p)[:, None] * _GU[None, :]
                W = np.abs(q - p)[:, None] * _GW[None, :]
                G = green_halfspace_pairs(X[:, None, :], Y[..., None], self.params)
                out += np.sum(W * G * b.evaluate(Y.reshape(-1, 1)).reshape(Y.shape), axis=1)
        return out

    def __call__(self, pts):
        X = np.asarray(pts, dtype=float).reshape(-1, self.params.N)
        out = np.zeros(len(X))
        live = X[:, 0] > 0.0
        if not np.any(live) or not self.f.terms:
            return out
        if self.params.N == 1:
            out[live] = self._one_dim(X[live])
            return out
        hint = 2 * self.params.s - self.params.N
        for idx in np.nonzero(live)[0]:
            x = X[idx]
            total = 0.0
            for b in self.f.terms:
                def integrand(Y, x=x, b=b):
                    return green_halfspace_pairs(x[None, :], Y, self.params) * b.evaluate(Y)

                total += integrate_nd(
                    integrand, Ball(b.center, b.radius), self.params.N, self.cfg,
                    pole=x, pole_exponent=hint if hint < 0 else None,
                )[0]
            out[idx] = total
        return out


class _PoissonEval:
    """x -> int Gamma_s(x, y) g(y) dy for x1 > 0 and g(x) otherwise."""

    def __init__(self, g: BumpSum, params: Params):
        constants(params).gamma_Nsigma  # integer s is rejected here
        self.g, self.params = g, params
        self.rules = [(_ball_rule(b.center, b.radius, params.N), b) for b in g.terms]

    def __call__(self, pts):
        X = np.asarray(pts, dtype=float).reshape(-1, self.params.N)
        out = np.zeros(len(X))
        inside = X[:, 0] > 0.0
        if np.any(~inside):
            out[~inside] = self.g.values(X[~inside])
        for idx in np.nonzero(inside)[0]:
            total = 0.0
            for (Y, W), b in self.rules:
                total += float(W @ (poisson_nonlocal_batch(X[idx], Y, self.params) * b.evaluate(Y)))
            out[idx] = total
        return out


class _PoissonKelvinEval:
    """The same solution built from the ball kernel and pulled back by K_s."""

    def __init__(self, g: BumpSum, params: Params):
        self.g, self.params = g, params
        N, s, m = params.N, params.s, params.m
        e1 = np.zeros(N)
        e1[0] = 1.0
        self.inv = Inversion(2.0, tuple(e1))
        self.gam = constants(params).gamma_Nsigma
        self.rules = []
        for b in g.terms:
            img = _map_sphere(self.inv, b.center, b.radius, None)
            if isinstance(img, Hyperplane) or np.linalg.norm(np.asarray(b.center) + e1) <= b.radius:
                raise ParameterError("Kelvin route needs bumps whose support avoids -e1")
            self.rules.append((_ball_rule(img.center, img.radius, N), b))

    def _Kg(self, Y, b: Bump):
        e1 = np.asarray(self.inv.v)
        w = Y + e1[None, :]
        r2 = np.einsum("ij,ij->i", w, w)
        z = 2.0 * w / r2[:, None] - e1[None, :]
        return r2 ** (self.params.s - 0.5 * self.params.N) * b.evaluate(z)

    def __call__(self, pts):
        N, s, m = self.params.N, self.params.s, self.params.m
        X = np.asarray(pts, dtype=float).reshape(-1, N)
        out = np.zeros(len(X))
        inside = X[:, 0] > 0.0
        if np.any(~inside):
            out[~inside] = self.g.values(X[~inside])
        e1 = np.asarray(self.inv.v)
        for idx in np.nonzero(inside)[0]:
            w = X[idx] + e1
            r2 = float(w @ w)
            xi = 2.0 * w / r2 - e1  # kappa x, inside the unit ball
            a = 1.0 - float(xi @ xi)
            total = 0.0
            for (Y, W), b in self.rules:
                kern = a**s / ((np.einsum("ij,ij->i", Y, Y) - 1.0) ** s * np.linalg.norm(Y - xi[None, :], axis=1) ** N)
                total += float(W @ (kern * self._Kg(Y, b)))
            v = (-1) ** m * self.gam * 2.0 ** (N - 2 * s) * total
            out[idx] = r2 ** (s - 0.5 * N) * v
        return out


class _BoundaryEval:
    """Sum over k of int E_{k,s}(x, y) h_k(y) dy over the boundary.

    With y' = x' + x1*eta the kernel factors into x1^(sigma+k-1) times
    sum_i alpha_i int h_k(y') (1+|eta|^2)^-(N/2+m-k-i) dy' / x1^(N-1).
    The remaining integral is peaked at y' = x' on the scale x1, which a
    rule graded geometrically toward x' resolves for every x1.
    """

    def __init__(self, h: Sequence[BumpSum], params: Params):
        if len(h) != params.m + 1:
            raise ParameterError(f"need m+1 = {params.m + 1} boundary data, got {len(h)}")
        self.h, self.params = tuple(h), params
        self.terms = [boundary_kernel_coeffs(k, params) for k in range(params.m + 1)]
        n_p = 96
        self.phi = 2 * np.pi * np.arange(n_p) / n_p
        self.wphi = 2 * np.pi / n_p

    def _nodes(self, b: Bump, xp: np.ndarray):
        """Tangential nodes and weights covering the support of one bump."""
        c, r = np.asarray(b.center[1:]), b.radius
        if self.params.N == 2:
            lo, hi = c[0] - r, c[0] + r
            xi = min(max(xp[0], lo), hi)
            Y = np.concatenate([xi + (lo - xi) * _GU, xi + (hi - xi) * _GU])
            W = np.concatenate([(xi - lo) * _GW, (hi - xi) * _GW])
            return Y[:, None], W
        # N = 3: polar about x', radius out to the far edge of the support
        R = float(np.linalg.norm(c - xp)) + r
        rho, wr = R * _GU, R * _GW
        Rh, Ph = np.meshgrid(rho, self.phi, indexing="ij")
        Y = np.stack([xp[0] + Rh * np.cos(Ph), xp[1] + Rh * np.sin(Ph)], axis=-1).reshape(-1, 2)
        W = ((wr * rho)[:, None] * np.full(self.phi.size, self.wphi)[None, :]).ravel()
        return Y, W

    def _inner(self, k: int, x1: float, xp: np.ndarray) -> float:
        N = self.params.N
        total = 0.0
        for b in self.h[k].terms:
            Y, W = self._nodes(b, xp)
            hv = b.evaluate(np.concatenate([np.zeros((len(Y), 1)), Y], axis=1))
            live = hv != 0.0
            if not np.any(live):
                continue
            t = 1.0 + np.sum(((Y[live] - xp[None, :]) / x1) ** 2, axis=1)
            wh = W[live] * hv[live]
            for a, _, q in self.terms[k]:
                total += a * float(wh @ t ** (-0.5 * q))
        return total / x1 ** (N - 1)

    def __call__(self, pts):
        N, sigma, m = self.params.N, self.params.sigma, self.params.m
        X = np.asarray(pts, dtype=float).reshape(-1, N)
        out = np.zeros(len(X))
        for idx in np.nonzero(X[:, 0] > 0.0)[0]:
            x1 = X[idx, 0]
            total = 0.0
            for k in range(m + 1):
                if self.h[k].is_empty:
                    continue
                if N == 1:
                    inner = sum(a for a, _, _ in self.terms[k]) * float(self.h[k].values(np.zeros((1, 1)))[0])
                else:
                    inner = self._inner(k, x1, X[idx, 1:])
                total += x1 ** (sigma + k - 1.0) * inner
            out[idx] = total
        return out


class _SumEval:
    def __init__(self, parts):
        self.parts = tuple(parts)

    def __call__(self, pts):
        out = np.zeros(len(np.asarray(pts).reshape(-1, self.parts[0].params.N if self.parts else 1)))
        for p in self.parts:
            out = out + p(pts)
        return out


class _ZeroEval:
    def __call__(self, pts):
        return np.zeros(len(pts))


@dataclass(frozen=True)
class SolutionField(ScalarField):
    """A solution whose evaluator performs the kernel quadrature."""

    kind: str = "superposition"
    params: Optional[Params] = None
    cfg: QuadConfig = DEFAULT_CONFIG
    data: dict = field(default_factory=dict)

    def evaluate(self, pts) -> np.ndarray:
        return self.values(pts)


def _halfspace_plane(exponent) -> Hyperplane:
    return Hyperplane((1.0,), 0.0, exponent)


def _solution(kind, evaluator, params, cfg, data, decay, plane_exponent, scale, support, extra_kinks=()):
    N = params.N
    normal = tuple([1.0] + [0.0] * (N - 1))
    kinks = (Hyperplane(normal, 0.0, plane_exponent),) + tuple(extra_kinks)
    return SolutionField(
        evaluator, N, support, decay, kinks, math.inf, None, scale, f"{kind} solution",
        kind=kind, params=params, cfg=cfg, data=data,
    )


def solve_green(f: BumpSum, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> SolutionField:
    if f.domain_tag != "interior" or f.N != params.N:
        raise ParameterError("solve_green needs interior data in the problem dimension")
    normal = tuple([1.0] + [0.0] * (params.N - 1))
    return _solution(
        "green", _GreenEval(f, params, cfg), params, cfg, {"f": f},
        params.N - params.s, params.s, f.min_radius(), HalfspaceSupport(normal, 0.0),
    )


def solve_poisson(g: BumpSum, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> SolutionField:
    if g.domain_tag != "exterior" or g.N != params.N:
        raise ParameterError("solve_poisson needs exterior data in the problem dimension")
    kinks = g.field().kinks
    return _solution(
        "poisson", _PoissonEval(g, params), params, cfg, {"g": g},
        params.N - params.s, params.s, g.min_radius(), None, kinks,
    )


def solve_poisson_kelvin(g: BumpSum, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> SolutionField:
    """solve_poisson computed through the unit-ball kernel and the Kelvin transform."""
    if g.domain_tag != "exterior" or g.N != params.N:
        raise ParameterError("solve_poisson_kelvin needs exterior data in the problem dimension")
    return _solution(
        "poisson", _PoissonKelvinEval(g, params), params, cfg, {"g": g},
        params.N - params.s, params.s, g.min_radius(), None, g.field().kinks,
    )


def solve_boundary(h: Sequence[BumpSum], params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> SolutionField:
    h = tuple(h)
    for hk in h:
        if hk.domain_tag != "boundary" or hk.N != params.N:
            raise ParameterError("solve_boundary needs boundary data in the problem dimension")
    active = [k for k, hk in enumerate(h) if not hk.is_empty]
    kmin = min(active, default=0)
    kmax = max(active, default=params.m)
    normal = tuple([1.0] + [0.0] * (params.N - 1))
    radius = min((hk.min_radius() for hk in h if hk.terms), default=1.0)
    return _solution(
        "boundary", _BoundaryEval(h, params), params, cfg, {"h": h},
        params.N - params.sigma - kmax, params.sigma + kmin - 1.0, radius, HalfspaceSupport(normal, 0.0),
    )


def solve_full(
    f: Optional[BumpSum],
    g: Optional[BumpSum],
    h: Optional[Sequence[BumpSum]],
    params: Params,
    cfg: QuadConfig = DEFAULT_CONFIG,
) -> SolutionField:
    parts = []
    if f is not None and not f.is_empty:
        parts.append(solve_green(f, params, cfg))
    if g is not None and not g.is_empty:
        parts.append(solve_poisson(g, params, cfg))
    if h is not None and any(not hk.is_empty for hk in h):
        parts.append(solve_boundary(h, params, cfg))
    if len(parts) == 1:
        return parts[0]
    if not parts:
        normal = tuple([1.0] + [0.0] * (params.N - 1))
        return SolutionField(
            _ZeroEval(), params.N, HalfspaceSupport(normal, 0.0), math.inf, (), math.inf, None, 1.0,
            "zero solution", kind="superposition", params=params, cfg=cfg, data={},
        )
    kinks = tuple(k for p in parts for k in p.kinks[1:])
    plane = min(p.kinks[0].exponent for p in parts)
    return _solution(
        "superposition", _SumEval([p.evaluator for p in parts]), params, cfg,
        {"parts": tuple(p.kind for p in parts)},
        min(p.decay_exponent for p in parts), plane, min(p.scale for p in parts),
        None if any(p.support is None for p in parts) else parts[0].support, kinks,
    )


# -------------------------------------------------------------- envelopes


@dataclass(frozen=True)
class EnvelopeStats:
    envelope: str
    count: int
    min: float
    max: float
    mean: float

    def as_dict(self) -> dict:
        return {"envelope": self.envelope, "count": self.count, "min": self.min, "max": self.max, "mean": self.mean}


def _normal_derivative(F, x1: float, order: int, h0: float) -> float:
    """d^order F / dx1^order at x1 by central differences and Richardson in h^2."""
    if order == 0:
        return float(F(np.array([x1]))[0])
    # central weights for the order-th derivative on the stencil -order..order
    k = np.arange(-order, order + 1)
    V = np.vander(k.astype(float), increasing=True).T
    rhs = np.zeros(len(k))
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(V, rhs)
    samples = []
    for i in range(5):
        h = h0 * 0.5**i
        samples.append((h, float(w @ F(x1 + h * k)) / h**order))
    return richardson(samples, 2.0, 2.0)[0]


def envelope_value(name: str, x: np.ndarray, params: Params, k: int | None = None, decay: str = "valid") -> float:
    N, s, sigma, m = params.N, params.s, params.sigma, params.m
    x1 = x[0]
    r = float(np.linalg.norm(x))
    if name in ("bound", "es"):
        return x1**s / (1.0 + r**N)
    if name == "decay_k":
        if k is None:
            raise ParameterError("decay_k needs the kernel index k")
        # "valid": |x|^-(N-1), what a single boundary kernel integral actually
        # achieves; "nominal": the faster |x|^-(N+m-k) rate
        if decay not in ("valid", "nominal"):
            raise ParameterError(f"decay must be 'valid' or 'nominal', got {decay!r}")
        e = N - 1 if decay == "valid" else N + m - k
        return x1 ** (sigma + k - 1.0) / (1.0 + r**e)
    raise ParameterError(f"unknown envelope {name!r}")


def envelope_ratio(
    u: ScalarField,
    envelope: str,
    grid,
    params: Params | None = None,
    *,
    k: int | None = None,
    decay: str = "valid",
    signed: bool = False,
    beta: float = 1.0,
) -> EnvelopeStats:
    """Statistics of |u| / envelope over grid points in the open half-space.

    ``signed=True`` uses (-1)^m u instead of |u| (two-sided bounds).
    ``envelope="es1"`` measures |d^m[x1^(1-sigma) u]/m! - D^(s-1) u(0, x')|
    against x1^beta / (1 + |x'|^N) for grid points with 0 < x1 < 1.
    """
    params = params if params is not None else getattr(u, "params", None)
    if params is None:
        raise ParameterError("envelope_ratio needs params")
    pts = np.asarray(grid, dtype=float).reshape(-1, params.N)
    pts = pts[pts[:, 0] > 0.0]
    if envelope == "es1":
        ratios = _es1_ratios(u, pts[pts[:, 0] < 1.0], params, beta)
    else:
        vals = u.values(pts)
        if signed:
            vals = (-1) ** params.m * vals
        else:
            vals = np.abs(vals)
        env = np.array([envelope_value(envelope, p, params, k, decay) for p in pts])
        ratios = vals / env
    if ratios.size == 0:
        return EnvelopeStats(envelope, 0, 0.0, 0.0, 0.0)
    return EnvelopeStats(envelope, int(ratios.size), float(ratios.min()), float(ratios.max()), float(ratios.mean()))


def _es1_ratios(u: ScalarField, pts: np.ndarray, params: Params, beta: float) -> np.ndarray:
    N, m, sigma = params.N, params.m, params.sigma
    out = []
    traces = {}
    for p in pts:
        xp = tuple(p[1:])
        if xp not in traces:
            traces[xp] = trace_D(u, (0.0,) + xp, m, sigma)

        def F(t, xp=xp):
            t = np.atleast_1d(t)
            q = np.zeros((t.size, N))
            q[:, 0] = t
            q[:, 1:] = xp
            return t ** (1.0 - sigma) * u.values(q)

        d = _normal_derivative(F, p[0], m, 0.25 * p[0] / (m + 1)) / math.factorial(m)
        env = p[0] ** beta / (1.0 + float(np.linalg.norm(p[1:])) ** N)
        out.append(abs(d - traces[xp]) / env)
    return np.array(out)


def log_grid(lo_exp: float, hi_exp: float, n: int, tangential=(0.0,), N: int = 1) -> np.ndarray:
    """Points with x1 = 2^t on n log-spaced t values, times each tangential offset."""
    x1 = np.logspace(lo_exp, hi_exp, n, base=2.0)
    if N == 1:
        return x1[:, None]
    tang = np.atleast_2d(np.asarray(tangential, dtype=float))
    if tang.shape[-1] != N - 1:
        tang = tang.reshape(-1, N - 1)
    return np.array([[a, *t] for t in tang for a in x1])


# --------------------------------------------------------- batch evaluation


def worker_count() -> int:
    """Worker pool size, capped by HSFRAC_WORKERS (1 means serial)."""
    import os

    cap = os.environ.get("HSFRAC_WORKERS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ParameterError(f"HSFRAC_WORKERS must be an integer, got {cap!r}")
    return n


def _eval_chunk(args):
    u, chunk = args
    return u.values(chunk)


def evaluate_grid(u: ScalarField, pts, workers: int | None = None, chunk: int = 16) -> np.ndarray:
    """u at every grid point, split into chunks over a process pool.

    Output order matches input order whatever the worker count.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, u.N)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(pts) <= chunk:
        return u.values(pts)
    from concurrent.futures import ProcessPoolExecutor

    pieces = [pts[i : i + chunk] for i in range(0, len(pts), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_eval_chunk, [(u, p) for p in pieces]))
    return np.concatenate(parts)
