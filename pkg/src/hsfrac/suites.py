"""Verification suites behind ``hsfrac verify``.

Each suite returns a list of Check records.  A check stores the computed
value, the reference, the error measure and the tolerance it was held to.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .fields import Bump, power_field
from .identities import alpha_suite, check_beta_integral, exact_suite
from .kernels import (
    boundary_kernel,
    boundary_kernel_coeffs,
    green_halfspace,
    green_halfspace_mapped,
    martin_limit,
    variant_K03,
)
from .params import Params, gamma_fn, omega
from .quadrature import DEFAULT_CONFIG, QuadConfig

SUITES = ("identities", "harmonic", "kelvin", "kernels", "solvers")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    reference: float
    error: float
    tol: float
    measure: str  # "abs", "rel" or "exact"

    @property
    def passed(self) -> bool:
        if self.measure == "exact":
            return self.error == 0
        return bool(self.error <= self.tol)

    def as_dict(self) -> dict:
        d = asdict(self)
        for key in ("value", "reference", "error"):
            if isinstance(d[key], int) and abs(d[key]) > 2**53:
                d[key] = str(d[key])
        d["passed"] = self.passed
        return d


def _check(suite, name, value, reference, tol, measure="rel"):
    value, reference = float(value), float(reference)
    err = abs(value - reference)
    if measure == "rel" and reference != 0.0:
        err /= abs(reference)
    return Check(suite, name, value, reference, err, tol, measure)


# ---------------------------------------------------------------- suites


def identities_suite(fast: bool = False, seed: int = 0, cfg: QuadConfig = DEFAULT_CONFIG):
    out = []
    for r in exact_suite() + alpha_suite():
        measure = "exact" if r.exact else ("rel" if r.relative else "abs")
        err = r.abs_delta if measure != "rel" else r.rel_delta
        out.append(Check("identities", r.name, r.lhs, r.rhs, err, r.tol, measure))
    rng = np.random.default_rng(seed)
    for _ in range(5 if fast else 20):
        x = rng.uniform(-0.9, 4.0)
        y = 0.5 * (x + 1.0) + rng.uniform(0.1, 3.0)
        r = check_beta_integral(float(x), float(y), cfg)
        out.append(Check("identities", r.name, r.lhs, r.rhs, r.rel_delta, r.tol, "rel"))
    return out


def harmonic_suite(fast: bool = False, s_values=None, cfg: QuadConfig = DEFAULT_CONFIG):
    """(-Delta)^s (x)+^(j+sigma-1) = 0 on x > 0 for j = 0..2m+1, N = 1."""
    from .fraclap import frac_laplacian_at

    if s_values is None:
        s_values = (0.5,) if fast else (0.5, 1.5, 2.5)
    out = []
    for s in s_values:
        p = Params.from_s(1, s)
        for j in range(2 * p.m + 2):
            u = power_field(j + p.sigma - 1.0, 1)
            for x in (0.5, 1.0, 2.0):
                v = frac_laplacian_at(u, np.array([x]), p, cfg)[0]
                out.append(_check("harmonic", f"s={s} j={j} x={x}", v, 0.0, 1e-4, "abs"))
    return out


def kelvin_suite(fast: bool = False, cfg: QuadConfig = DEFAULT_CONFIG):
    """Covariance of (-Delta)^s under K_s for a bump on B_(1/2)(3 e1), N = 2."""
    from .fields import bump_field
    from .transforms import Inversion, kelvin_covariance_check

    u = bump_field([Bump((3.0, 0.0), 0.5)], 2)
    inv = Inversion(1.0, (0.0, 0.0))
    cases = [(1.0, 1e-6, [(0.34, 0.01), (0.35, -0.02), (0.33, 0.0)])]
    if not fast:
        cases.append((0.5, 1e-3, [(0.5, 0.0), (0.3, 0.1), (1.0, 1.0)]))
    out = []
    for s, tol, pts in cases:
        p = Params.from_s(2, s)
        for x in pts:
            lhs, rhs = kelvin_covariance_check(u, inv, p, np.array(x), cfg)
            out.append(_check("kelvin", f"s={s} x={x}", lhs, rhs, tol))
    return out


def kernels_suite(fast: bool = False, seed: int = 0, cfg: QuadConfig = DEFAULT_CONFIG):
    out = []
    p = Params(1, 0, 1.0)
    grid = [(a, b) for a in (0.25, 0.5, 1.0, 2.0, 4.0) for b in (0.3, 1.1, 2.5, 5.0)]
    for x, y in grid:
        out.append(_check("kernels", f"min-kernel ({x},{y})", green_halfspace([x], [y], p, cfg), min(x, y), 1e-10, "abs"))
    rng = np.random.default_rng(seed)
    for N, s in ((1, 0.5), (2, 1.5), (3, 2.5)):
        ps = Params.from_s(N, s)
        for i in range(5 if fast else 20):
            x, y = rng.uniform(-1.0, 1.0, (2, N))
            x[0], y[0] = abs(x[0]) + 0.05, abs(y[0]) + 0.05
            out.append(
                _check("kernels", f"green mapping N={N} s={s} #{i}", green_halfspace_mapped(x, y, ps, cfg), green_halfspace(x, y, ps, cfg), 1e-8)
            )
    for N, s, x, z in ((1, 1.5, [0.7], []), (2, 0.5, [0.6, 0.3], [-0.2])):
        ps = Params.from_s(N, s)
        lim = martin_limit(x, z, ps, cfg=cfg)[0]
        zz = [0.0] + list(z)
        ref = boundary_kernel(ps.m, x, zz, ps) / (gamma_fn(s + 1.0) * gamma_fn(s))
        out.append(_check("kernels", f"Martin limit N={N} s={s}", lim, ref, 1e-4))
    # E_{m,s} at N = 2 is (2/omega_2) x1^s / |x-y|^2
    p2 = Params(2, 1, 0.5)
    x, y = np.array([0.7, 0.2]), np.array([0.0, -0.4])
    ref = 2.0 / omega(2) * x[0] ** p2.s / float((x - y) @ (x - y))
    out.append(_check("kernels", "top boundary kernel N=2 s=1.5", boundary_kernel(1, x, y, p2), ref, 1e-14))
    # the N = 2, s = 3 coefficients against the (8/pi, -4/pi) variant
    p3 = Params(2, 2, 1.0)
    coeffs = [a for a, _, _ in boundary_kernel_coeffs(0, p3)]
    out.append(_check("kernels", "K03 coefficient 1", coeffs[0], 4.0 / math.pi, 1e-15))
    out.append(_check("kernels", "K03 coefficient 2", coeffs[1], -1.0 / math.pi, 1e-15))
    x, y = np.array([0.5, 0.3]), np.array([0.0, 0.0])
    diff = abs(boundary_kernel(0, x, y, p3) - variant_K03(x, y))
    out.append(Check("kernels", "K03 differs from the (8/pi, -4/pi) variant", diff, 0.0, float(diff == 0.0), 0.5, "abs"))
    return out


def _ode_oracle(x: float, center: float, radius: float, q: int) -> float:
    """int min(x, y) (1 - ((y-c)/r)^2)^q dy, integrated exactly in t = (y-c)/r."""
    P = np.polynomial.Polynomial
    prof = P([1.0, 0.0, -1.0]) ** q
    left = (P([center, radius]) * prof).integ()
    right = prof.integ()
    tx = min(max((x - center) / radius, -1.0), 1.0)
    return float(radius * (left(tx) - left(-1.0) + x * (right(1.0) - right(tx))))


def solvers_suite(fast: bool = False, cfg: QuadConfig = DEFAULT_CONFIG):
    from .solvers import BumpSum, solve_boundary, solve_green, solve_poisson, solve_poisson_kelvin
    from .transforms import trace_D

    out = []
    # Green solution against the ODE oracle, N = 1, s = 1
    p = Params(1, 0, 1.0)
    f = BumpSum((Bump((1.5,), 0.5),), "interior", 1)
    u = solve_green(f, p, cfg)
    for x in (0.5, 1.2, 1.5, 1.9, 3.0):
        out.append(_check("solvers", f"green ODE oracle x={x}", u([x]), _ode_oracle(x, 1.5, 0.5, 8), 1e-8))
    # N = 1 boundary formula x^(s-m+k-1) h(0)
    p = Params(1, 1, 0.5)
    for k in (0, 1):
        h = [BumpSum.empty("boundary", 1) for _ in range(2)]
        h[k] = BumpSum((Bump((0.0,), 1.0, 0.7),), "boundary", 1)
        u = solve_boundary(h, p, cfg)
        for x in (0.3, 2.0):
            out.append(_check("solvers", f"boundary N=1 k={k} x={x}", u([x]), x ** (p.s - p.m + k - 1) * 0.7, 1e-12))
    # Poisson solution through the ball kernel and K_s, N = 1, s = 0.5
    p = Params(1, 0, 0.5)
    g = BumpSum((Bump((-2.5,), 1.0),), "exterior", 1)
    ud, uk = solve_poisson(g, p, cfg), solve_poisson_kelvin(g, p, cfg)
    for x in (0.1, 0.5, 1.0, 2.0, 5.0):
        out.append(_check("solvers", f"Poisson Kelvin route x={x}", uk([x]), ud([x]), 1e-4))
    # traces of a boundary solution, N = 2, s = 1.5
    p = Params(2, 1, 0.5)
    h = [
        BumpSum((Bump((0.0, 0.3), 1.0),), "boundary", 2),
        BumpSum((Bump((0.0, -0.4), 0.8, 2.0, q=6),), "boundary", 2),
    ]
    u = solve_boundary(h, p, cfg)
    for z in (0.0, 0.5, -0.7):
        for j in (0, 1):
            ref = float(h[j].boundary_values([[z]])[0])
            tol = 1e-3 * h[j].sup_norm()
            out.append(_check("solvers", f"trace j={j} z={z}", trace_D(u, [0.0, z], j, p.sigma, cfg), ref, tol, "abs"))
    if not fast:
        from .fraclap import frac_laplacian_at

        p = Params(1, 0, 0.5)
        f = BumpSum((Bump((2.0,), 1.0),), "interior", 1)
        u = solve_green(f, p, cfg)
        for x in (1.5, 2.0, 2.7):
            v = frac_laplacian_at(u, np.array([x]), p, cfg)[0]
            out.append(_check("solvers", f"residual x={x}", v, f.values([[x]])[0], 1e-2 * f.sup_norm(), "abs"))
    return out


def run_suite(name: str, fast: bool = False, seed: int = 0, cfg: QuadConfig = DEFAULT_CONFIG, s_values=None):
    if name == "all":
        out = []
        for n in SUITES:
            out += run_suite(n, fast, seed, cfg, s_values)
        return out
    if name == "identities":
        return identities_suite(fast, seed, cfg)
    if name == "harmonic":
        return harmonic_suite(fast, s_values, cfg)
    if name == "kelvin":
        return kelvin_suite(fast, cfg)
    if name == "kernels":
        return kernels_suite(fast, seed, cfg)
    if name == "solvers":
        return solvers_suite(fast, cfg)
    raise ValueError(f"unknown suite {name!r}")
