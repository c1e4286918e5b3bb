"""Closed-form kernels of the half-space problem.

Conventions: points are 1-D arrays with the normal coordinate first; every
kernel returns exactly 0 where its (x_1)_+ factor vanishes.  Boundary points
may be passed either as full points with first coordinate 0 or as the
tangential part only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._rules import profile_rules
from .errors import CoincidentPointError, IndexRangeError, ParameterError
from .params import Params, constants
from .quadrature import DEFAULT_CONFIG, Integrand1D, QuadConfig, integrate_1d


def _pt(x, N: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (N,):
        raise ParameterError(f"expected a point of R^{N}, got shape {x.shape}")
    return x


def _boundary_pt(y, N: int) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size == N:
        if y[0] != 0.0:
            raise ParameterError("boundary point must have first coordinate 0")
        return y
    if y.size == N - 1:
        return np.concatenate([[0.0], y])
    raise ParameterError(f"boundary point of size {y.size} for R^{N}")


# ---------------------------------------------------------------- profile


def kernel_profile(psi: float, s: float, N: int, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """int_0^psi v^(s-1) (1+v)^(-N/2) dv by adaptive quadrature.

    [0, min(psi, 1)] is integrated directly with the v^(s-1) endpoint hint;
    the rest uses v = e^w, which turns the slowly varying tail into a
    smooth integrand on [0, ln psi].
    """
    psi = float(psi)
    if psi < 0 or not s > 0:
        raise ParameterError("kernel_profile needs psi >= 0 and s > 0")
    if psi == 0.0:
        return 0.0
    a = min(psi, 1.0)
    head = Integrand1D(lambda v: v ** (s - 1.0) * (1.0 + v) ** (-0.5 * N), (0.0,), (s - 1.0,))
    total = integrate_1d(head, 0.0, a, cfg)[0]
    if psi > 1.0:
        def tail(w):
            return np.exp(s * w - 0.5 * N * (w + np.log1p(np.exp(-w))))

        total += integrate_1d(tail, 0.0, math.log(psi), cfg)[0]
    return total


def kernel_profile_batch(psi, s: float, N: int) -> np.ndarray:
    """Vectorized profile with a fixed Gauss-Jacobi plus log-panel rule."""
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < 0):
        raise ParameterError("psi must be nonnegative")
    tj, wj, tl, wl = profile_rules(float(s))
    return _backend.profile_batch(psi, float(s), int(N), tj, wj, tl, wl)


# ------------------------------------------------------------------ Green


def green_halfspace(x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """k_Ns |x-y|^(2s-N) times the profile up to psi = 4 x1+ y1+ / |x-y|^2."""
    N, s = params.N, params.s
    x, y = _pt(x, N), _pt(y, N)
    d2 = float((x - y) @ (x - y))
    if d2 == 0.0:
        raise CoincidentPointError("Green function evaluated on its diagonal")
    if x[0] <= 0.0 or y[0] <= 0.0:
        return 0.0
    psi = 4.0 * x[0] * y[0] / d2
    return constants(params).k_Ns * d2 ** (s - 0.5 * N) * kernel_profile(psi, s, N, cfg)


def green_halfspace_batch(x, Y, params: Params) -> np.ndarray:
    """G_s(x, y) for every row y of Y (fixed-rule profile)."""
    N, s = params.N, params.s
    x = _pt(x, N)
    Y = np.asarray(Y, dtype=float).reshape(-1, N)
    d2 = np.einsum("ij,ij->i", Y - x[None, :], Y - x[None, :])
    if np.any(d2 == 0.0):
        raise CoincidentPointError("Green function evaluated on its diagonal")
    out = np.zeros(len(Y))
    if x[0] <= 0.0:
        return out
    live = Y[:, 0] > 0.0
    psi = 4.0 * x[0] * Y[live, 0] / d2[live]
    out[live] = constants(params).k_Ns * d2[live] ** (s - 0.5 * N) * kernel_profile_batch(psi, s, N)
    return out


def green_ball(x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """Unit-ball Green function: same profile up to (1-|x|^2)+(1-|y|^2)+/|x-y|^2."""
    N, s = params.N, params.s
    x, y = _pt(x, N), _pt(y, N)
    d2 = float((x - y) @ (x - y))
    if d2 == 0.0:
        raise CoincidentPointError("Green function evaluated on its diagonal")
    a, b = 1.0 - float(x @ x), 1.0 - float(y @ y)
    if a <= 0.0 or b <= 0.0:
        return 0.0
    return constants(params).k_Ns * d2 ** (s - 0.5 * N) * kernel_profile(a * b / d2, s, N, cfg)


# ------------------------------------------------------------ Poisson-type


def poisson_nonlocal(x, y, params: Params) -> float:
    """(-1)^m gamma_{N,sigma} (x1)+^s / ((-y1)^s |x-y|^N) for y1 < 0."""
    N, s, m = params.N, params.s, params.m
    gam = constants(params).gamma_Nsigma  # raises for integer s
    x, y = _pt(x, N), _pt(y, N)
    if not y[0] < 0.0:
        raise ParameterError("nonlocal Poisson kernel needs y1 < 0")
    if x[0] <= 0.0:
        return 0.0
    r = float(np.linalg.norm(x - y))
    return (-1) ** m * gam * x[0] ** s / ((-y[0]) ** s * r**N)


def poisson_nonlocal_batch(x, Y, params: Params) -> np.ndarray:
    N, s, m = params.N, params.s, params.m
    gam = constants(params).gamma_Nsigma
    x = _pt(x, N)
    Y = np.asarray(Y, dtype=float).reshape(-1, N)
    if x[0] <= 0.0:
        return np.zeros(len(Y))
    r = np.linalg.norm(Y - x[None, :], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (-1) ** m * gam * x[0] ** s / ((-Y[:, 0]) ** s * r**N)
    return np.where(Y[:, 0] < 0.0, out, 0.0)


def boundary_kernel_coeffs(k: int, params: Params):
    """Terms (alpha, x1 power, |x-y| power) of E_{k,s}."""
    m, s, N = params.m, params.s, params.N
    if not (isinstance(k, (int, np.integer)) and 0 <= k <= m):
        raise IndexRangeError(f"boundary kernel index k={k} outside 0..{m}")
    cs = constants(params)
    l = m - k
    return [(cs.alpha(l, i), s + l - 2 * i, N + 2 * (l - i)) for i in range(l // 2 + 1)]


def boundary_kernel(k: int, x, y, params: Params) -> float:
    N = params.N
    terms = boundary_kernel_coeffs(k, params)
    x, y = _pt(x, N), _boundary_pt(y, N)
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise CoincidentPointError("boundary kernel evaluated at its pole")
    if x[0] <= 0.0:
        return 0.0
    return math.fsum(a * x[0] ** p / r**q for a, p, q in terms)


def boundary_kernel_batch(k: int, X, y, params: Params) -> np.ndarray:
    """E_{k,s}(x, y) for each row x of X and a fixed boundary point y."""
    N = params.N
    terms = boundary_kernel_coeffs(k, params)
    X = np.asarray(X, dtype=float).reshape(-1, N)
    y = _boundary_pt(y, N)
    r = np.linalg.norm(X - y[None, :], axis=1)
    x1 = np.maximum(X[:, 0], 0.0)
    out = np.zeros(len(X))
    live = X[:, 0] > 0.0
    for a, p, q in terms:
        out[live] += a * x1[live] ** p / r[live] ** q
    return out


def martin_kernel(x, z, params: Params) -> float:
    """(4^s k_Ns / s) x1^s / |x - z|^N."""
    N, s = params.N, params.s
    x, z = _pt(x, N), _boundary_pt(z, N)
    r = float(np.linalg.norm(x - z))
    if r == 0.0:
        raise CoincidentPointError("Martin kernel evaluated at its pole")
    if x[0] <= 0.0:
        return 0.0
    return 4.0**s * constants(params).k_Ns / s * x[0] ** s / r**N


def reflected_P(x, y, params: Params) -> float:
    """(x1)+^(s-2) (y1)+^(s-1) (x1 + y1) / |x - ybar|^N, ybar = (-y1, y')."""
    N, s = params.N, params.s
    if not s > 1.0:
        raise ParameterError("reflected kernel requires s > 1")
    x, y = _pt(x, N), _pt(y, N)
    yb = y.copy()
    yb[0] = -yb[0]
    r = float(np.linalg.norm(x - yb))
    if r == 0.0:
        raise CoincidentPointError("reflected kernel evaluated at x = ybar")
    if x[0] <= 0.0 or y[0] <= 0.0:
        return 0.0
    return x[0] ** (s - 2.0) * y[0] ** (s - 1.0) * (x[0] + y[0]) / r**N


def variant_K03(x, y) -> float:
    """N = 2, s = 3 kernel with coefficients (8/pi, -4/pi), kept for comparison."""
    x, y = _pt(x, 2), _boundary_pt(y, 2)
    r = float(np.linalg.norm(x - y))
    if x[0] <= 0.0:
        return 0.0
    return 8.0 / math.pi * x[0] ** 5 / r**6 - 4.0 / math.pi * x[0] ** 3 / r**4


# ---------------------------------------------------------------- envelope


def green_regime(params: Params) -> str:
    two_s = 2.0 * params.s
    if params.N > two_s:
        return "N>2s"
    if params.N == two_s:
        return "N=2s"
    return "N<2s"


def green_envelope(x, y, params: Params, form: str = "standard"):
    """Comparison quantity for G_s in its dimensional regime.

    ``form="sharp"`` replaces the N < 2s expression by
    (x1 y1)^(s - N/2) min(1, (x1 y1)^(N/2) / |x-y|^N), which stays
    two-sided near the diagonal where the default form blows up.
    """
    N, s = params.N, params.s
    x, y = _pt(x, N), _pt(y, N)
    if form not in ("standard", "sharp"):
        raise ParameterError(f"unknown envelope form {form!r}")
    if not (x[0] > 0 and y[0] > 0):
        raise ParameterError("envelope is defined on the open half-space")
    d2 = float((x - y) @ (x - y))
    if d2 == 0.0:
        raise CoincidentPointError("envelope evaluated on the diagonal")
    yb = y.copy()
    yb[0] = -yb[0]
    db2 = float((x - yb) @ (x - yb))
    p = x[0] * y[0]
    regime = green_regime(params)
    if regime == "N>2s":
        val = p**s / (d2 ** (0.5 * N - s) * db2**s)
    elif regime == "N=2s":
        val = p**s / db2**s * math.log1p(db2 / d2)
    elif form == "sharp":
        val = p ** (s - 0.5 * N) * min(1.0, p ** (0.5 * N) / d2 ** (0.5 * N))
    else:
        val = p**s / d2 ** (0.5 * N)
    return regime, val


# --------------------------------------------------------------- dispatch

KERNEL_TAGS = ("green_halfspace", "green_ball", "poisson_nonlocal", "boundary", "martin", "reflected_P")


@dataclass(frozen=True)
class KernelId:
    tag: str
    k: int | None = None

    def __post_init__(self):
        if self.tag not in KERNEL_TAGS:
            raise ParameterError(f"unknown kernel {self.tag!r}; choose from {', '.join(KERNEL_TAGS)}")
        if (self.tag == "boundary") != (self.k is not None):
            raise ParameterError("the boundary kernel (and only it) takes an index k")

    @classmethod
    def parse(cls, text: str) -> "KernelId":
        """'green_halfspace', 'boundary:1', ..."""
        tag, _, idx = text.partition(":")
        return cls(tag, int(idx) if idx else None)

    def __str__(self):
        return self.tag if self.k is None else f"{self.tag}:{self.k}"

    def validate(self, params: Params) -> None:
        if self.tag == "boundary" and not 0 <= self.k <= params.m:
            raise IndexRangeError(f"boundary kernel index k={self.k} outside 0..{params.m}")
        if self.tag == "poisson_nonlocal":
            constants(params).gamma_Nsigma
        if self.tag == "reflected_P" and not params.s > 1.0:
            raise ParameterError("reflected kernel requires s > 1")

    def evaluate(self, x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
        if self.tag == "green_halfspace":
            return green_halfspace(x, y, params, cfg)
        if self.tag == "green_ball":
            return green_ball(x, y, params, cfg)
        if self.tag == "poisson_nonlocal":
            return poisson_nonlocal(x, y, params)
        if self.tag == "boundary":
            return boundary_kernel(self.k, x, y, params)
        if self.tag == "martin":
            return martin_kernel(x, y, params)
        return reflected_P(x, y, params)


def green_halfspace_pairs(X, Y, params: Params) -> np.ndarray:
    """G_s(X[i], Y[i]) row by row, arrays of shape (..., N); the diagonal must be avoided."""
    N, s = params.N, params.s
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    X, Y = np.broadcast_arrays(X, Y)
    diff = X - Y
    d2 = np.einsum("...i,...i->...", diff, diff)
    out = np.zeros(d2.shape)
    live = (X[..., 0] > 0.0) & (Y[..., 0] > 0.0) & (d2 > 0.0)
    psi = 4.0 * X[..., 0][live] * Y[..., 0][live] / d2[live]
    out[live] = constants(params).k_Ns * d2[live] ** (s - 0.5 * N) * kernel_profile_batch(psi, s, N)
    return out


def martin_limit(x, z, params: Params, h0: float = 0.05, levels: int = 6, cfg: QuadConfig = DEFAULT_CONFIG):
    """Extrapolated lim G_s(x, w)/w1^s as w -> z along the normal, with an error estimate."""
    from .quadrature import richardson

    N, s = params.N, params.s
    x, z = _pt(x, N), _boundary_pt(z, N)
    samples = []
    for i in range(levels):
        w = z.copy()
        w[0] = h0 * 0.5**i
        samples.append((w[0], green_halfspace(x, w, params, cfg.tightened(1e-3)) / w[0] ** s))
    return richardson(samples, 1.0, 1.0)


def green_halfspace_mapped(x, y, params: Params, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """G_s(x, y) rebuilt from the unit-ball Green function.

    kappa x = 2(x+e1)/|x+e1|^2 - e1 sends the half-space onto the unit
    ball and preserves the profile argument, so the two sides differ by
    2^(N-2s) (|x+e1| |y+e1|)^(2s-N).
    """
    N, s = params.N, params.s
    x, y = _pt(x, N), _pt(y, N)
    if x[0] <= 0.0 or y[0] <= 0.0:
        return 0.0
    e1 = np.zeros(N)
    e1[0] = 1.0
    wx, wy = x + e1, y + e1
    rx, ry = float(wx @ wx), float(wy @ wy)
    xi, eta = 2.0 * wx / rx - e1, 2.0 * wy / ry - e1
    return 2.0 ** (N - 2 * s) * math.sqrt(rx * ry) ** (2 * s - N) * green_ball(xi, eta, params, cfg)
