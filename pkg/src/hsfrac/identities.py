"""Exact and numerical checks of the identities behind the kernel formulas.

Each check returns an IdentityReport carrying both sides, so a failing
check shows how far off it is instead of a bare boolean.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import IndexRangeError, ParameterError
from .fraclap import fd_kernel
from .kernels import boundary_kernel, poisson_nonlocal, reflected_P
from .params import Params, alpha_coeff, binomial, constants, gamma_fn, omega
from .quadrature import (
    DEFAULT_CONFIG,
    Integrand1D,
    QuadConfig,
    Whole,
    integrate_improper,
    integrate_nd,
    integrate_real_line,
)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    abs_delta: float
    exact: bool
    tol: float = 0.0
    relative: bool = False

    @property
    def rel_delta(self) -> float:
        return self.abs_delta / abs(self.rhs) if self.rhs else self.abs_delta

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.abs_delta == 0
        return (self.rel_delta if self.relative else self.abs_delta) <= self.tol

    def as_dict(self) -> dict:
        d = asdict(self)
        for key in ("lhs", "rhs", "abs_delta"):
            if isinstance(d[key], int) and abs(d[key]) > 2**53:
                d[key] = str(d[key])
        d["passed"] = self.passed
        return d


def _exact(name, lhs, rhs) -> IdentityReport:
    return IdentityReport(name, lhs, rhs, abs(lhs - rhs), True)


def _num(name, lhs, rhs, tol, relative=True) -> IdentityReport:
    return IdentityReport(name, float(lhs), float(rhs), abs(float(lhs) - float(rhs)), False, tol, relative)


# ---------------------------------------------------------------- integer


def check_gould(l: int, x: int) -> IdentityReport:
    """sum_i (-1)^i C(x,i) C(2x-2i, l-2i) = C(x,l) 2^l, in integers."""
    if l < 0 or x < 0:
        raise ParameterError("Gould identity needs l, x >= 0")
    lhs = sum((-1) ** i * binomial(x, i) * binomial(2 * x - 2 * i, l - 2 * i) for i in range(min(l // 2, x) + 1))
    return _exact(f"gould(l={l},x={x})", lhs, binomial(x, l) * 2**l)


def check_vanishing_moment(m: int) -> IdentityReport:
    """The (2m)-th moment of the order-m difference weights vanishes."""
    if m < 1:
        raise ParameterError("vanishing moment identity needs m >= 1")
    return _exact(f"vanishing_moment(m={m})", fd_kernel(m).moment(m), 0)


# ----------------------------------------------------------- gamma sums


def _alpha_sum_terms(m: int, k: int, j: int, N: int):
    for i in range((m - k) // 2 + 1):
        top = m - i + Fraction(1 - j - k, 2)
        if top.denominator == 1 and top <= 0:
            # unreachable when j - k is even; kept as an explicit guard
            raise IndexRangeError(f"Gamma pole at {top} for (m,k,j,i)=({m},{k},{j},{i})")
        yield alpha_coeff(m - k, i, N) * gamma_fn(float(top)) / gamma_fn(m - i - k + 0.5 * N)


def check_alpha_sum(m: int, k: int, j: int, N: int) -> IdentityReport:
    if not (0 <= k <= j <= m):
        raise IndexRangeError(f"need 0 <= k <= j <= m, got k={k}, j={j}, m={m}")
    if (j - k) % 2:
        raise IndexRangeError("j - k must be even")
    lhs = math.fsum(_alpha_sum_terms(m, k, j, N))
    rhs = math.pi ** (0.5 * (1 - N)) if j == k else 0.0
    return _num(f"alpha_sum(m={m},k={k},j={j},N={N})", lhs, rhs, 1e-11, relative=False)


# ---------------------------------------------------------- integrals


def check_beta_integral(x: float, y: float, cfg: QuadConfig = DEFAULT_CONFIG) -> IdentityReport:
    """int_0^inf t^x (1+t^2)^-y dt = Gamma((x+1)/2) Gamma(y-(x+1)/2) / (2 Gamma(y))."""
    a = 0.5 * (x + 1.0)
    if not (0.0 < a < y):
        raise ParameterError(f"need 0 < (x+1)/2 < y, got x={x}, y={y}")
    f = Integrand1D(lambda t: t**x * (1.0 + t * t) ** (-y), (0.0,), (x,), 2.0 * y - x)
    lhs = integrate_improper(f, 0.0, cfg.tightened())[0]
    rhs = gamma_fn(a) * gamma_fn(y - a) / (2.0 * gamma_fn(y))
    return _num(f"beta_integral(x={x:g},y={y:g})", lhs, rhs, 1e-8)


def _multi(gamma_idx, dim: int):
    g = tuple(int(t) for t in np.atleast_1d(gamma_idx))
    if len(g) != dim or any(t < 0 for t in g):
        raise IndexRangeError(f"multi-index {g} must have {dim} nonnegative entries")
    return g


def moment_integral(N: int, power: float, g: tuple, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """int_{R^(N-1)} y^(2g) (1+|y|^2)^(-power) dy."""
    dim = N - 1
    decay = 2.0 * power - 2 * sum(g)
    if not decay > dim:
        raise ParameterError("moment integral diverges")
    if dim == 1:
        f = Integrand1D(lambda t: t ** (2 * g[0]) * (1.0 + t * t) ** (-power), decay_exponent=decay)
        return integrate_real_line(f, cfg)[0]

    def f(pts):
        r2 = np.einsum("ij,ij->i", pts, pts)
        mono = np.prod(pts ** (2 * np.asarray(g))[None, :], axis=1)
        return mono * (1.0 + r2) ** (-power)

    return integrate_nd(f, Whole(), dim, cfg, decay_exponent=decay)[0]


def check_moment_integral(
    N: int, m: int, k: int, i: int, j: int, gamma_idx, cfg: QuadConfig = DEFAULT_CONFIG
) -> IdentityReport:
    """Even moments of (1+|y|^2)^-(N/2 + m-k-i) against their Gamma closed form."""
    if N not in (2, 3):
        raise ParameterError("moment identity is checked for N in {2, 3}")
    if not (0 <= k <= j <= m and (j - k) % 2 == 0 and 0 <= i <= (m - k) // 2):
        raise IndexRangeError(f"invalid indices m={m}, k={k}, i={i}, j={j}")
    g = _multi(gamma_idx, N - 1)
    if 2 * sum(g) != j - k:
        raise IndexRangeError("|gamma| must equal (j - k)/2")
    power = 0.5 * N + (m - k - i)
    lhs = moment_integral(N, power, g, cfg.tightened())
    fact2 = math.prod(math.factorial(2 * t) for t in g)
    fact1 = math.prod(math.factorial(t) for t in g)
    rhs = (
        math.pi ** (0.5 * (N - 1)) * fact2 / (2 ** (j - k) * fact1)
        * gamma_fn(m - i + 0.5 * (1 - j - k)) / gamma_fn(m - i - k + 0.5 * N)
    )
    return _num(f"moment_integral(N={N},m={m},k={k},i={i},j={j},gamma={g})", lhs, rhs, 1e-6)


def check_odd_moment(N: int, power: float, beta_idx, cfg: QuadConfig = DEFAULT_CONFIG) -> IdentityReport:
    """Moments with an odd exponent vanish by symmetry."""
    b = _multi(beta_idx, N - 1)
    if all(t % 2 == 0 for t in b):
        raise IndexRangeError("at least one exponent must be odd")
    dim = N - 1
    if dim == 1:
        f = Integrand1D(lambda t: t ** b[0] * (1.0 + t * t) ** (-power), decay_exponent=2 * power - b[0])
        lhs = integrate_real_line(f, cfg)[0]
    else:
        def f(pts):
            return np.prod(pts ** np.asarray(b)[None, :], axis=1) * (1.0 + np.einsum("ij,ij->i", pts, pts)) ** (-power)

        lhs = integrate_nd(f, Whole(), dim, cfg, decay_exponent=2 * power - sum(b))[0]
    return _num(f"odd_moment(N={N},beta={b})", lhs, 0.0, 1e-8, relative=False)


def check_trace_collapse(N: int, m: int, k: int, j: int, cfg: QuadConfig = DEFAULT_CONFIG) -> IdentityReport:
    """sum_i alpha_{m-k,i} * (normalized moment_i) = delta_jk.

    Each moment is divided by (2g)!/(2^(j-k) g!) with g = ((j-k)/2, 0, ...),
    which is how the moment and alpha-sum identities combine in the trace
    computation of the boundary kernels.
    """
    if not (0 <= k <= j <= m and (j - k) % 2 == 0):
        raise IndexRangeError(f"invalid indices m={m}, k={k}, j={j}")
    a = (j - k) // 2
    g = (a,) + (0,) * (N - 2)
    norm = 2 ** (j - k) * math.factorial(a) / math.factorial(2 * a)
    total = math.fsum(
        alpha_coeff(m - k, i, N) * moment_integral(N, 0.5 * N + (m - k - i), g, cfg.tightened()) * norm
        for i in range((m - k) // 2 + 1)
    )
    return _num(f"trace_collapse(N={N},m={m},k={k},j={j})", total, 1.0 if j == k else 0.0, 1e-6, relative=False)


def check_power_trace_integral(
    N: int, m: int, j: int, sigma: float, x1: float, cfg: QuadConfig = DEFAULT_CONFIG
) -> IdentityReport:
    """Boundary integral of x1^(j+sigma-1)/|x-z|^(N+2(j-m-1)) against its closed form."""
    if j < m + 1:
        raise IndexRangeError("need j >= m + 1")
    if not (0.0 < sigma < 1.0) or not x1 > 0:
        raise ParameterError("need sigma in (0, 1) and x1 > 0")
    expo = 2 * m - j + sigma
    p = N + 2 * (j - m - 1)
    if N == 1:
        lhs = x1 ** (j + sigma - 1.0) / x1**p
        return _num(f"power_trace(N=1,m={m},j={j})", lhs, x1**expo, 1e-12)
    num = x1 ** (j + sigma - 1.0)
    inner = cfg.tightened()
    if N == 2:
        f = Integrand1D(lambda t: num * (x1 * x1 + t * t) ** (-0.5 * p), decay_exponent=p)
        lhs = integrate_real_line(f, inner)[0]
    elif N == 3:
        def f(pts):
            return num * (x1 * x1 + np.einsum("ij,ij->i", pts, pts)) ** (-0.5 * p)

        lhs = integrate_nd(f, Whole(), 2, inner, decay_exponent=p)[0]
    else:
        raise ParameterError("power trace integral is checked for N <= 3")
    rhs = math.pi ** (0.5 * (N - 1)) * gamma_fn(j - m - 0.5) / gamma_fn(0.5 * N + j - m - 1) * x1**expo
    return _num(f"power_trace(N={N},m={m},j={j},sigma={sigma:g},x1={x1:g})", lhs, rhs, 1e-6)


# ------------------------------------------------------ kernel relations


def check_reflected_bilinear(x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> IdentityReport:
    """P_{s-1}(x,y) = (omega_N/2) int E_{m-1,s-1}(x,z) E_{m,s}(y,z) dz over the boundary."""
    N, m = params.N, params.m
    if N != 2 or m < 1:
        raise ParameterError("the bilinear relation is checked for N = 2 and s > 1")
    lower = Params(N, m - 1, params.sigma)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def f(t):
        return np.array([boundary_kernel(m - 1, x, (tt,), lower) * boundary_kernel(m, y, (tt,), params) for tt in t])

    lhs = 0.5 * omega(N) * integrate_real_line(Integrand1D(f, decay_exponent=2.0 * N), cfg.tightened(), float(x[1]))[0]
    return _num("reflected_bilinear", lhs, reflected_P(x, y, params), 1e-4)


def check_poisson_recurrence(x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> IdentityReport:
    """Gamma_s = Gamma_{s-1} - int E_{m,s}(x,z) D^{s-1} Gamma_{s-1}(z,y) dz.

    The trace of Gamma_{s-1}(., y) factors through a pure power of z1, so
    D^{s-1} Gamma_{s-1}(z, y) = (-1)^(m-1) gamma_{N,sigma} / ((-y1)^(s-1) |z-y|^N).
    """
    N, m, s = params.N, params.m, params.s
    if N != 2 or m < 1:
        raise ParameterError("the recurrence is checked for N = 2 and s > 1")
    lower = Params(N, m - 1, params.sigma)
    gam = constants(params).gamma_Nsigma
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def f(t):
        z = np.stack([np.zeros_like(t), t], axis=1)
        dz = np.linalg.norm(z - y[None, :], axis=1)
        tr = (-1) ** (m - 1) * gam / ((-y[0]) ** (s - 1.0) * dz**N)
        return np.array([boundary_kernel(m, x, (tt,), params) for tt in t]) * tr

    integral = integrate_real_line(Integrand1D(f, decay_exponent=2.0 * N), cfg.tightened(), float(x[1]))[0]
    lhs = poisson_nonlocal(x, y, lower) - integral
    return _num("poisson_recurrence", lhs, poisson_nonlocal(x, y, params), 1e-3)


# --------------------------------------------------------------- suites


def exact_suite(l_max: int = 12, x_max: int = 12, m_max: int = 8):
    reports = [check_gould(l, x) for l in range(l_max + 1) for x in range(x_max + 1)]
    reports += [check_vanishing_moment(m) for m in range(1, m_max + 1)]
    return reports


def alpha_suite(m_max: int = 4, dims=(1, 2, 3)):
    return [
        check_alpha_sum(m, k, j, N)
        for N in dims
        for m in range(m_max + 1)
        for k in range(m + 1)
        for j in range(k, m + 1, 2)
    ]
