import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsfrac.errors import CoincidentPointError, IndexRangeError, ParameterError
from hsfrac.kernels import (
    KernelId,
    boundary_kernel,
    boundary_kernel_batch,
    boundary_kernel_coeffs,
    green_ball,
    green_envelope,
    green_halfspace,
    green_halfspace_batch,
    green_halfspace_mapped,
    green_halfspace_pairs,
    kernel_profile,
    kernel_profile_batch,
    martin_kernel,
    martin_limit,
    poisson_nonlocal,
    variant_K03,
    reflected_P,
)
from hsfrac.params import Params, gamma_fn, omega
from hsfrac.quadrature import Integrand1D, integrate_1d

# mpmath, 30 digits: psi^s/s 2F1(N/2, s; s+1; -psi)
PROFILE_TABLE = [
    (0.3, 1, 0.7, 2.80490843436183990),
    (0.3, 3, 250.0, 3.09829134087177521),
    (1.5, 2, 1e6, 1996.86040734574354),
    (2.5, 1, 40.0, 781.473418491603634),
    (0.75, 2, 3.9, 1.72476300629275071),
    (1.7, 3, 1e12, 1249.97485606403811),
]

# mpmath, 30 digits: k_Ns |x-y|^(2s-N) times the hypergeometric profile
GREEN_TABLE = [
    (2, 1.5, (0.4, 0.1), (1.3, -0.5), 0.0444999977241142508),
    (3, 0.5, (1.0, 0.0, 0.0), (2.0, 0.0, 0.0), 0.0477632640208963549),
    (3, 2.5, (0.2, 0.3, -0.1), (0.9, 0.0, 0.4), 0.000326710840225563596),
]


def _half_space_pair(rng, N):
    x, y = rng.uniform(-1.5, 1.5, (2, N))
    x[0], y[0] = abs(x[0]) + 0.05, abs(y[0]) + 0.05
    return x, y


def test_profile_examples():
    assert kernel_profile(math.e - 1, 1.0, 2) == pytest.approx(1.0, rel=1e-12)
    assert kernel_profile(0.0, 0.5, 1) == 0.0
    assert kernel_profile(1.0, 0.5, 1) == pytest.approx(2 * math.asinh(1.0), rel=1e-12)
    with pytest.raises(ParameterError):
        kernel_profile(-1.0, 0.5, 1)


@pytest.mark.parametrize("s,N,psi,ref", PROFILE_TABLE)
def test_profile_against_hypergeometric(s, N, psi, ref):
    assert kernel_profile(psi, s, N) == pytest.approx(ref, rel=1e-10)
    assert kernel_profile_batch([psi], s, N)[0] == pytest.approx(ref, rel=1e-12)


def test_green_examples():
    p = Params(1, 0, 1.0)
    assert green_halfspace([1.0], [2.0], p) == pytest.approx(1.0, rel=1e-12)
    assert green_halfspace([-1.0], [2.0], p) == 0.0
    with pytest.raises(CoincidentPointError):
        green_halfspace([1.0], [1.0], p)


def test_green_min_kernel_grid():
    p = Params(1, 0, 1.0)
    for x in (0.1, 0.7, 3.0):
        for y in (0.2, 1.5, 9.0):
            assert green_halfspace([x], [y], p) == pytest.approx(min(x, y), rel=1e-10)


@pytest.mark.parametrize("x,y", [(0.3, 1.1), (2.0, 0.5), (4.0, 4.5)])
def test_green_half_order_closed_form(x, y):
    p = Params(1, 0, 0.5)
    ref = math.asinh(2 * math.sqrt(x * y) / abs(x - y)) / math.pi
    assert green_halfspace([x], [y], p) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("N,s,x,y,ref", GREEN_TABLE)
def test_green_table(N, s, x, y, ref):
    assert green_halfspace(x, y, Params.from_s(N, s)) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("N,s", [(1, 0.5), (1, 2.3), (2, 1.5), (3, 0.7), (3, 2.5)])
def test_green_symmetry_positivity_and_batches(N, s):
    p = Params.from_s(N, s)
    rng = np.random.default_rng(int(10 * s) + N)
    X, Y = [], []
    for _ in range(50):
        x, y = _half_space_pair(rng, N)
        a, b = green_halfspace(x, y, p), green_halfspace(y, x, p)
        assert a > 0
        assert abs(a - b) <= 1e-12 * a
        X.append(x)
        Y.append(y)
    X, Y = np.array(X), np.array(Y)
    ref = np.array([green_halfspace(x, y, p) for x, y in zip(X, Y)])
    assert np.allclose(green_halfspace_pairs(X, Y, p), ref, rtol=1e-11)
    assert np.allclose(green_halfspace_batch(X[0], Y, p), [green_halfspace(X[0], y, p) for y in Y], rtol=1e-11)


@pytest.mark.parametrize("N,s", [(1, 0.5), (2, 1.5), (3, 2.5)])
def test_green_mapping_to_ball(N, s):
    p = Params.from_s(N, s)
    rng = np.random.default_rng(N)
    for _ in range(20):
        x, y = _half_space_pair(rng, N)
        assert green_halfspace_mapped(x, y, p) == pytest.approx(green_halfspace(x, y, p), rel=1e-8)


def test_green_ball_examples():
    p = Params(1, 0, 1.0)
    assert green_ball([1.0], [0.2], p) == 0.0
    assert green_ball([0.0], [0.5], p) == pytest.approx(0.25, rel=1e-12)
    # classical interval Green function (1 - max)(1 + min)/2 on (-1, 1)
    for x, y in [(-0.3, 0.6), (0.1, 0.8), (-0.9, -0.2)]:
        a, b = min(x, y), max(x, y)
        assert green_ball([x], [y], p) == pytest.approx((1 - b) * (1 + a) / 2, rel=1e-10)


def test_green_ball_brute_force():
    # direct quadrature of the defining integral at a 2-d pair
    p = Params(2, 0, 0.5)
    x, y = np.array([0.2, -0.1]), np.array([-0.3, 0.4])
    d2 = float((x - y) @ (x - y))
    upper = (1 - x @ x) * (1 - y @ y) / d2
    f = Integrand1D(lambda v: v**-0.5 / (1 + v), (0.0,), (-0.5,))
    kns = gamma_fn(1.0) / (math.pi * 4**0.5 * gamma_fn(0.5) ** 2)
    ref = kns * d2 ** (0.5 - 1.0) * integrate_1d(f, 0.0, float(upper))[0]
    assert green_ball(x, y, p) == pytest.approx(ref, rel=1e-10)


def test_poisson_examples():
    p = Params(1, 0, 0.5)
    assert poisson_nonlocal([1.0], [-1.0], p) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert poisson_nonlocal([-0.5], [-1.0], p) == 0.0
    with pytest.raises(ParameterError):
        poisson_nonlocal([1.0], [1.0], p)
    with pytest.raises(ParameterError):
        poisson_nonlocal([1.0], [-1.0], Params(1, 0, 1.0))


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_poisson_sign_alternates(m):
    p = Params(2, m, 0.4)
    v = poisson_nonlocal([0.7, 0.1], [-0.5, 0.3], p)
    assert (v > 0) == (m % 2 == 0)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_boundary_kernel_top_orders(N, m):
    p = Params(N, m, 0.6)
    rng = np.random.default_rng(N + 7 * m)
    x = rng.uniform(-1, 1, N)
    x[0] = 0.8
    y = np.zeros(N)
    y[1:] = rng.uniform(-1, 1, N - 1)
    r = float(np.linalg.norm(x - y))
    top = 2 / omega(N) * x[0] ** p.s / r**N
    assert boundary_kernel(m, x, y, p) == pytest.approx(top, rel=1e-13)
    if m >= 1:
        below = 2 * N / omega(N) * x[0] ** (p.s + 1) / r ** (N + 2)
        assert boundary_kernel(m - 1, x, y, p) == pytest.approx(below, rel=1e-13)


def test_boundary_kernel_index_and_zero():
    p = Params(2, 1, 0.5)
    with pytest.raises(IndexRangeError):
        boundary_kernel(2, [0.5, 0.0], [0.0, 0.0], p)
    assert boundary_kernel(0, [-0.5, 0.0], [0.0, 0.3], p) == 0.0
    X = np.array([[0.5, 0.1], [1.0, -2.0], [-1.0, 0.0]])
    batch = boundary_kernel_batch(0, X, [0.0, 0.2], p)
    assert np.allclose(batch, [boundary_kernel(0, x, [0.0, 0.2], p) for x in X], rtol=1e-14)


def test_K03_coefficients_and_variant():
    p = Params(2, 2, 1.0)
    coeffs = boundary_kernel_coeffs(0, p)
    assert [a for a, _, _ in coeffs] == pytest.approx([4 / math.pi, -1 / math.pi], rel=1e-15)
    x, y = np.array([0.5, 0.3]), np.zeros(2)
    r = float(np.linalg.norm(x - y))
    ours = 4 / math.pi * x[0] ** 5 / r**6 - 1 / math.pi * x[0] ** 3 / r**4
    assert boundary_kernel(0, x, y, p) == pytest.approx(ours, rel=1e-14)
    variant = 8 / math.pi * x[0] ** 5 / r**6 - 4 / math.pi * x[0] ** 3 / r**4
    assert variant_K03(x, y) == pytest.approx(variant, rel=1e-14)
    assert variant_K03(x, y) != pytest.approx(ours, rel=1e-3)


@pytest.mark.parametrize("N,s", [(1, 0.5), (2, 1.5), (3, 2.3)])
def test_martin_equals_scaled_boundary_kernel(N, s):
    p = Params.from_s(N, s)
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.uniform(-2, 2, N)
        x[0] = abs(x[0]) + 0.01
        z = np.zeros(N)
        z[1:] = rng.uniform(-2, 2, N - 1)
        ref = boundary_kernel(p.m, x, z, p) / (gamma_fn(s + 1) * gamma_fn(s))
        assert martin_kernel(x, z, p) == pytest.approx(ref, rel=1e-12)
    x[0] = -0.3
    assert martin_kernel(x, z, p) == 0.0


@pytest.mark.parametrize("N,s,x,z", [(1, 1.5, [0.7], []), (2, 0.5, [0.6, 0.3], [-0.2]), (3, 1.2, [0.9, 0.1, 0.0], [0.3, -0.4])])
def test_martin_as_limit(N, s, x, z):
    p = Params.from_s(N, s)
    lim, _ = martin_limit(x, z, p)
    assert lim == pytest.approx(martin_kernel(x, [0.0] + z, p), rel=1e-4)


def test_reflected_examples():
    p = Params.from_s(1, 1.5)
    assert reflected_P([1.0], [1.0], p) == pytest.approx(1.0, rel=1e-15)
    assert reflected_P([-1.0], [2.0], p) == 0.0
    assert reflected_P([1.0], [-2.0], p) == 0.0
    with pytest.raises(ParameterError):
        reflected_P([1.0], [1.0], Params(1, 0, 0.5))


def test_envelope_examples():
    regime, env = green_envelope([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], Params(3, 0, 0.5))
    assert regime == "N>2s" and env == pytest.approx(math.sqrt(2) / 3, rel=1e-15)
    p = Params(1, 0, 1.0)
    regime, env = green_envelope([1.0], [2.0], p)
    assert regime == "N<2s" and env == pytest.approx(2.0, rel=1e-15)
    assert green_halfspace([1.0], [2.0], p) / env == pytest.approx(0.5, rel=1e-12)
    assert green_envelope([1.0, 0.0], [2.0, 0.0], Params(2, 0, 1.0))[0] == "N=2s"
    with pytest.raises(ParameterError):
        green_envelope([-1.0], [2.0], p)


def _ratio_range(N, s, n, form):
    p = Params.from_s(N, s)
    t = np.logspace(-2, 2, n)
    ratios = []
    for i, a in enumerate(t):
        for j, b in enumerate(t):
            x, y = np.zeros(N), np.zeros(N)
            x[0], y[0] = a, b
            if N > 1:
                y[1] = 0.5 * b
            if i == j and N == 1:
                continue
            ratios.append(green_halfspace(x, y, p) / green_envelope(x, y, p, form)[1])
    return min(ratios), max(ratios)


@pytest.mark.parametrize("N,s,form", [(3, 0.5, "standard"), (2, 1.0, "standard"), (1, 1.5, "sharp"), (2, 1.5, "sharp")])
def test_envelope_ratio_bounded_and_stable(N, s, form):
    lo, hi = _ratio_range(N, s, 10, form)
    lo2, hi2 = _ratio_range(N, s, 19, form)
    assert 0 < lo and hi < math.inf
    c, c2 = max(hi, 1 / lo), max(hi2, 1 / lo2)
    assert c2 <= 1.5 * c


def test_kernel_id():
    assert str(KernelId.parse("boundary:1")) == "boundary:1"
    assert KernelId.parse("martin").tag == "martin"
    with pytest.raises(ParameterError):
        KernelId("nope")
    with pytest.raises(ParameterError):
        KernelId("boundary")
    with pytest.raises(IndexRangeError):
        KernelId("boundary", 3).validate(Params(2, 1, 0.5))
    with pytest.raises(ParameterError):
        KernelId("poisson_nonlocal").validate(Params(2, 0, 1.0))
    with pytest.raises(ParameterError):
        KernelId("reflected_P").validate(Params(2, 0, 0.5))
    p = Params(1, 0, 1.0)
    assert KernelId.parse("green_halfspace").evaluate([1.0], [2.0], p) == pytest.approx(1.0)


@given(st.floats(0.05, 1.0), st.floats(-1.0, 1.0), st.floats(0.05, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_green_batch_matches_adaptive(x1, x2, y1, y2):
    p = Params(2, 1, 0.5)
    x, y = np.array([x1, x2]), np.array([y1, y2])
    if np.linalg.norm(x - y) < 1e-3:
        return
    assert green_halfspace_pairs(x, y, p) == pytest.approx(green_halfspace(x, y, p), rel=1e-10)
