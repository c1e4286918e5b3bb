"""Problem parameters, Gamma/binomial helpers and normalization constants.

Everything here is a pure function of immutable inputs.  ``constants`` is
memoized per ``Params`` because the constants sit inside quadrature loops.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import IndexRangeError, IntegerOrderError, ParameterError, PoleError

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _sinpi(x: float) -> float:
    """sin(pi*x) with exact argument reduction, so zeros land on integers."""
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    # now r in [-1, 1]; fold to [-1/2, 1/2] using sin(pi(1-r)) = sin(pi r)
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _gamma_lanczos(x: float) -> float:
    # valid for x >= 0.5
    z = x - 1.0
    a = _LANCZOS_P[0]
    for i in range(1, 9):
        a += _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    half = 0.5 * (z + 0.5)
    p = t**half
    return _SQRT_2PI * p * (p * math.exp(-t)) * a


def gamma_fn(x: float) -> float:
    """Gamma function for real arguments, negative ones via reflection."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x == math.floor(x) and x <= 171.0:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * _gamma_lanczos(1.0 - x))
    return _gamma_lanczos(x)


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient with C(n, k) = 0 for k < 0 or k > n."""
    if n < 0:
        raise ParameterError("binomial: n must be nonnegative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def fd_coefficient(m: int, k: int) -> int:
    """(-1)^k C(2m+2, m+1-k), the finite-difference weight at offset k."""
    c = binomial(2 * m + 2, m + 1 - k)
    return -c if k % 2 else c


@dataclass(frozen=True)
class Params:
    """Dimension N and order s = m + sigma with sigma in (0, 1]."""

    N: int
    m: int
    sigma: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if int(self.m) != self.m or self.m < 0:
            raise ParameterError(f"m must be a nonnegative integer, got {self.m}")
        if not (0.0 < self.sigma <= 1.0):
            raise ParameterError(f"sigma must lie in (0, 1], got {self.sigma}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def s(self) -> float:
        return self.m + self.sigma

    @property
    def is_integer_order(self) -> bool:
        return self.sigma == 1.0

    @classmethod
    def from_s(cls, N: int, s: float) -> "Params":
        """Split s into m + sigma with sigma in (0, 1]."""
        if s <= 0:
            raise ParameterError("s must be positive")
        m = math.ceil(s) - 1
        return cls(N, m, s - m)

    def with_dim(self, N: int) -> "Params":
        return Params(N, self.m, self.sigma)

    def as_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "sigma": self.sigma}


def alpha_coeff(l: int, i: int, N: int) -> float:
    """alpha_{l,i} = (-1)^i 2^(l-2i) Gamma(N/2+l-i) / (pi^(N/2) (l-2i)! i!)."""
    if l < 0 or i < 0 or 2 * i > l:
        raise IndexRangeError(f"alpha_coeff needs 0 <= 2i <= l, got l={l}, i={i}")
    sign = -1.0 if i % 2 else 1.0
    num = 2.0 ** (l - 2 * i) * gamma_fn(0.5 * N + l - i)
    den = math.pi ** (0.5 * N) * math.factorial(l - 2 * i) * math.factorial(i)
    return sign * num / den


def fd_power_sum(m: int, s: float) -> float:
    """P_m = sum_{k=1}^{m+1} (-1)^k C(2m+2, m+1-k) k^(2s)."""
    return math.fsum(fd_coefficient(m, k) * float(k) ** (2.0 * s) for k in range(1, m + 2))


@dataclass(frozen=True)
class ConstantSet:
    params: Params
    k_Ns: float
    omega_N: float
    P_m: float
    _c_Ns: float | None
    _gamma_Nsigma: float | None

    @property
    def c_Ns(self) -> float:
        if self._c_Ns is None:
            raise IntegerOrderError("c_{N,s} is undefined for integer s (sigma = 1)")
        return self._c_Ns

    @property
    def gamma_Nsigma(self) -> float:
        if self._gamma_Nsigma is None:
            raise IntegerOrderError("integer s: gamma_{N,sigma} is undefined for sigma = 1 (no nonlocal Poisson kernel)")
        return self._gamma_Nsigma

    def alpha(self, l: int, i: int) -> float:
        return alpha_coeff(l, i, self.params.N)


@functools.lru_cache(maxsize=256)
def constants(params: Params) -> ConstantSet:
    N, s, sigma = params.N, params.s, params.sigma
    half_n = 0.5 * N
    pi_half_n = math.pi**half_n
    omega = 2.0 * pi_half_n / gamma_fn(half_n)
    k_ns = gamma_fn(half_n) / (pi_half_n * 4.0**s * gamma_fn(s) ** 2)
    p_m = fd_power_sum(params.m, s)
    if params.is_integer_order:
        c_ns = None
        g_ns = None
    else:
        c_ns = 4.0**s * gamma_fn(half_n + s) / (pi_half_n * gamma_fn(-s)) / p_m
        g_ns = gamma_fn(half_n) / (pi_half_n * gamma_fn(sigma) * gamma_fn(1.0 - sigma))
    return ConstantSet(params, k_ns, omega, p_m, c_ns, g_ns)


def omega(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    return 2.0 * math.pi ** (0.5 * N) / gamma_fn(0.5 * N)
