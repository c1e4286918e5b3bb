"""Pointwise (-Delta)^s through the finite-difference singular integral.

For noninteger s = m + sigma the operator is

    (c_{N,s}/2) * int_{R^N} delta_m u(x, y) / |y|^{N+2s} dy,
    delta_m u(x, y) = sum_{k=-m-1}^{m+1} (-1)^k C(2m+2, m+1-k) u(x + k y).

Since delta_m is even in y, the integral is reduced to rays r*theta with
r > 0 over a half sphere of directions.  Each ray integral is split into

* a near part [0, rho] where delta_m = O(r^{2m+2}) and direct evaluation
  cancels catastrophically.  It uses the field's Taylor coefficients when
  available, else a polynomial fit in r^2 on [rho/8, rho] (or [rho/4, rho])
  integrated exactly against the weight;
* a middle part with breakpoints at every kink image;
* a tail, exact for compactly supported fields and otherwise handled by
  the improper-integral engine using the decay metadata.

Integer s (sigma = 1) falls back to the iterated Laplacian by central
differences plus Richardson extrapolation.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb

from ._rules import jacobi_unit
from .errors import NotInL1sError, ParameterError, ProximityError
from .fields import PointKink, ScalarField, Sphere
from .params import Params, constants, fd_coefficient
from .quadrature import (
    DEFAULT_CONFIG,
    Integrand1D,
    QuadConfig,
    integrate_1d,
    integrate_improper,
    richardson,
)


@dataclass(frozen=True)
class FDKernel:
    m: int
    offsets: tuple
    coefficients: tuple

    def moment(self, j: int) -> int:
        """sum_k coeff(k) k^(2j), exact."""
        return sum(c * k ** (2 * j) for k, c in zip(self.offsets, self.coefficients))


@functools.lru_cache(maxsize=32)
def fd_kernel(m: int) -> FDKernel:
    if m < 0:
        raise ParameterError("m must be nonnegative")
    offs = tuple(range(-m - 1, m + 2))
    return FDKernel(m, offs, tuple(fd_coefficient(m, k) for k in offs))


def delta_m(u: ScalarField, x, y, m: int) -> float:
    ker = fd_kernel(m)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    pts = x[None, :] + np.array(ker.offsets, dtype=float)[:, None] * y[None, :]
    return float(np.dot(np.array(ker.coefficients, dtype=float), u.values(pts)))


# ------------------------------------------------------------ ray integral


class _Ray:
    """delta_m along a ray x + r*theta."""

    def __init__(self, u: ScalarField, x: np.ndarray, theta: np.ndarray, m: int):
        self.u, self.x, self.theta = u, x, theta
        ker = fd_kernel(m)
        self.ker = ker
        self.offs = np.array(ker.offsets, dtype=float)
        self.coef = np.array(ker.coefficients, dtype=float)
        self.c0 = float(ker.coefficients[m + 1])
        self.phi0 = float(u.values(x[None, :])[0])

    def phi(self, t):
        return self.u.evaluator(self.x[None, :] + t[:, None] * self.theta[None, :])

    def delta(self, r):
        r = np.asarray(r, dtype=float)
        vals = self.phi(np.outer(self.offs, r).ravel()).reshape(self.offs.size, r.size)
        return self.coef @ vals

    def shifted(self, r):
        """delta minus its k = 0 term."""
        return self.delta(r) - self.c0 * self.phi0


def _near_taylor(ray: _Ray, m: int, s: float, rho: float):
    n_terms = 40
    coeffs = ray.u.line_taylor(ray.x, ray.theta, 2 * (m + 1 + n_terms))
    total = 0.0
    term = 0.0
    for j in range(m + 1, m + 2 + n_terms):
        term = ray.ker.moment(j) * coeffs[2 * j] * rho ** (2 * j - 2 * s) / (2 * j - 2 * s)
        total += term
        if j > m + 3 and abs(term) <= 1e-17 * abs(total):
            break
    return total, abs(term)


def _near_fit(ray: _Ray, m: int, sigma: float, rho: float):
    T = rho * rho
    lo = T / 64.0 if m == 0 else T / 16.0
    n_nodes = 24
    k = np.arange(n_nodes)
    tn = 0.5 * (lo + T) + 0.5 * (T - lo) * np.cos(np.pi * (k + 0.5) / n_nodes)
    g = ray.delta(np.sqrt(tn)) / tn ** (m + 1)
    uq, wq = jacobi_unit(16, -sigma)
    vals = []
    for deg in (10, 8):
        c = cheb.chebfit(2.0 * (tn - lo) / (T - lo) - 1.0, g, deg)
        tq = T * uq
        vals.append(0.5 * T ** (1.0 - sigma) * float(wq @ cheb.chebval(2.0 * (tq - lo) / (T - lo) - 1.0, c)))
    return vals[0], abs(vals[0] - vals[1])


def ray_integral(u: ScalarField, x, theta, params: Params, cfg: QuadConfig = DEFAULT_CONFIG):
    """int_0^inf delta_m u(x, r theta) r^(-1-2s) dr as (value, err_est)."""
    m, s, sigma = params.m, params.s, params.sigma
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ray = _Ray(u, x, theta, m)
    bps = u.line_breakpoints(x, theta, m + 1)
    radii = [r for r, _ in bps]
    tnorm = float(np.linalg.norm(theta))
    rho = 0.5 * min(radii + [u.scale / ((m + 1) * tnorm)])
    if u.line_taylor is not None:
        near, e_near = _near_taylor(ray, m, s, rho)
    else:
        near, e_near = _near_fit(ray, m, sigma, rho)

    reach = u.reach(x, theta)
    if reach is not None:
        r_end = max(reach, rho)
    else:
        r_end = 2.0 * max(radii + [2.0 * rho])
    inside = [(r, e) for r, e in bps if rho < r < r_end]
    mid_f = Integrand1D(
        lambda r: ray.delta(r) * r ** (-1.0 - 2.0 * s),
        tuple(r for r, _ in inside),
        tuple(e for _, e in inside),
    )
    mid, e_mid = integrate_1d(mid_f, rho, r_end, cfg)
    tail = ray.c0 * ray.phi0 * r_end ** (-2.0 * s) / (2.0 * s)
    e_tail = 0.0
    if reach is None:
        dec = u.decay_exponent + 1.0 + 2.0 * s
        tail_f = Integrand1D(lambda r: ray.shifted(r) * r ** (-1.0 - 2.0 * s), decay_exponent=dec)
        tv, e_tail = integrate_improper(tail_f, r_end, cfg)
        tail += tv
    return near + mid + tail, e_near + e_mid + e_tail


# ------------------------------------------------------- angular reductions


def _angle_mod_pi(a: float) -> float:
    return a % math.pi


def _angular_breaks_2d(u: ScalarField, x: np.ndarray):
    out = set()
    for n in u.special_normals():
        out.add(_angle_mod_pi(math.atan2(n[1], n[0]) + 0.5 * math.pi))
    for k in u.kinks:
        if isinstance(k, Sphere):
            off = np.asarray(k.center) - x
            d = float(np.linalg.norm(off))
            if d > k.radius:
                th0 = math.atan2(off[1], off[0])
                beta = math.asin(k.radius / d)
                out.update({_angle_mod_pi(th0 - beta), _angle_mod_pi(th0 + beta)})
        elif isinstance(k, PointKink):
            off = np.asarray(k.point) - x
            out.add(_angle_mod_pi(math.atan2(off[1], off[0])))
    return tuple(sorted(b for b in out if 0.0 < b < math.pi))


def _polar_axis_3d(u: ScalarField, x: np.ndarray):
    normals = u.special_normals()
    if normals:
        return normals[0] / np.linalg.norm(normals[0]), (0.5 * math.pi,)
    for k in u.kinks:
        if isinstance(k, Sphere):
            off = np.asarray(k.center) - x
            d = float(np.linalg.norm(off))
            if d > k.radius:
                beta = math.asin(k.radius / d)
                return off / d, (beta, math.pi - beta)
            if d > 0:
                return off / d, ()
    return np.array([1.0, 0.0, 0.0]), ()


def _batch(fn):
    def run(ts):
        res = [fn(float(t)) for t in np.asarray(ts).ravel()]
        return np.array(res)

    return run


def frac_laplacian_at(
    u: ScalarField,
    x,
    params: Params,
    cfg: QuadConfig = DEFAULT_CONFIG,
    margin: float | None = None,
):
    """(-Delta)^s u(x) as (value, err_est).

    ``margin`` is the clearance required between x and the kink set;
    by default only points lying on a kink are rejected.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    N = params.N
    if u.N != N or x.shape != (N,):
        raise ParameterError(f"field dimension {u.N}, point {x.shape} and N={N} disagree")
    s = params.s
    if not u.in_L1s(s):
        raise NotInL1sError(f"field {u.label!r} with decay exponent {u.decay_exponent} is not in L^1_s for s={s}")
    d = u.kink_distance(x)
    need = 0.0 if margin is None else float(margin)
    if d <= need:
        raise ProximityError(f"point {x.tolist()} lies within {need} of a kink (distance {d})")
    if params.is_integer_order:
        return _polyharmonic(u, x, params.m + 1, d, cfg)
    c = constants(params).c_Ns
    inner = cfg.tightened()
    if N == 1:
        v, e = ray_integral(u, x, np.array([1.0]), params, cfg)
        return c * v, abs(c) * e
    if N == 2:
        def per_angle(th):
            return ray_integral(u, x, np.array([math.cos(th), math.sin(th)]), params, inner)[0]

        f = Integrand1D(_batch(per_angle), _angular_breaks_2d(u, x))
        v, e = integrate_1d(f, 0.0, math.pi, cfg)
        return c * v, abs(c) * e
    if N == 3:
        axis, phi_breaks = _polar_axis_3d(u, x)
        trial = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        b = trial - axis * (trial @ axis)
        b /= np.linalg.norm(b)
        cc = np.cross(axis, b)

        def per_phi(phi):
            sp, cp = math.sin(phi), math.cos(phi)
            if sp == 0.0:
                return 0.0

            def per_psi(psi):
                th = cp * axis + sp * (math.cos(psi) * b + math.sin(psi) * cc)
                return ray_integral(u, x, th, params, inner.tightened())[0]

            return integrate_1d(_batch(per_psi), 0.0, math.pi, inner)[0] * sp

        f = Integrand1D(_batch(per_phi), phi_breaks)
        v, e = integrate_1d(f, 0.0, math.pi, cfg)
        return c * v, abs(c) * e
    raise ParameterError("numerical fractional Laplacian supports N <= 3")


def frac_laplacian_lifted(v: ScalarField, x, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """(-Delta)^s of the cylindrical lift of v, via the lower-dimensional operator."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = v.N
    if params.N <= k:
        raise ParameterError("lifted evaluation needs params.N > v.N")
    return frac_laplacian_at(v, x[:k], params.with_dim(k), cfg)[0]


# -------------------------------------------------------- integer orders


def _axis_stencil(a: int):
    """Central difference weights for d^(2a)/dt^(2a) (times h^(2a))."""
    if a == 0:
        return {0: 1.0}
    sign = -1.0 if a % 2 else 1.0
    return {k: sign * fd_coefficient(a - 1, k) for k in range(-a, a + 1)}


def _multi_indices(n: int, N: int):
    for combo in itertools.combinations_with_replacement(range(N), n):
        alpha = [0] * N
        for i in combo:
            alpha[i] += 1
        yield tuple(alpha)


@functools.lru_cache(maxsize=32)
def _polyharmonic_stencil(n: int, N: int):
    """Weights w(offset) with Delta^n u ~ sum w u(x + h*offset) / h^(2n)."""
    total = {}
    for alpha in set(_multi_indices(n, N)):
        mult = math.factorial(n)
        for a in alpha:
            mult //= math.factorial(a)
        axes = [_axis_stencil(a) for a in alpha]
        for combo in itertools.product(*[list(ax.items()) for ax in axes]):
            off = tuple(k for k, _ in combo)
            w = mult * math.prod(wk for _, wk in combo)
            total[off] = total.get(off, 0.0) + w
    offs = np.array(sorted(total), dtype=float)
    weights = np.array([total[tuple(int(o) for o in off)] for off in offs])
    return offs, weights


def _polyharmonic(u: ScalarField, x: np.ndarray, n: int, d: float, cfg: QuadConfig):
    """(-Delta)^n u(x) by central differences and Richardson in h^2."""
    N = u.N
    if n == 1 and u.line_taylor is not None:
        lap = sum(u.line_taylor(x, np.eye(N)[i], 2)[2] * 2.0 for i in range(N))
        return -float(lap), 0.0
    offs, w = _polyharmonic_stencil(n, N)
    h0 = 0.5 * min(d, u.scale) / n
    samples = []
    levels = max(3, min(cfg.extrapolation_levels, 6))
    for i in range(levels):
        h = h0 * 0.5**i
        vals = u.values(x[None, :] + h * offs)
        samples.append((h, math.fsum(w * vals) / h ** (2 * n)))
    val, err = richardson(samples, 2.0, 2.0)
    sign = -1.0 if n % 2 else 1.0
    return sign * val, err
