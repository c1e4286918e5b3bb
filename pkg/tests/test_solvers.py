import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hsfrac.errors import ParameterError
from hsfrac.fields import Bump
from hsfrac.fraclap import frac_laplacian_at
from hsfrac.params import Params
from hsfrac.solvers import (
    BumpSum,
    envelope_ratio,
    envelope_value,
    evaluate_grid,
    log_grid,
    solve_boundary,
    solve_full,
    solve_green,
    solve_poisson,
    solve_poisson_kelvin,
    worker_count,
)
from hsfrac.suites import _ode_oracle
from hsfrac.transforms import trace_D

# mpmath, 30 digits, nested adaptive quadrature of the kernel integrals
GREEN_FROZEN = [(0.5, 0.211095499631902678), (1.5, 0.531278020411134792), (2.3, 0.688724120240126811), (4.0, 0.337047510961605559)]
POISSON_FROZEN = [(0.5, 0.0287913110932016574), (2.0, 0.0382147017063811800)]
BOUNDARY_H1_FROZEN = 0.156556199628044144
BOUNDARY_H0_FROZEN = 1.28831211984618108


def interior(center, radius, weight=1.0, **kw):
    return BumpSum((Bump(tuple(center), radius, weight, **kw),), "interior", len(center))


def exterior(center, radius, weight=1.0, **kw):
    return BumpSum((Bump(tuple(center), radius, weight, **kw),), "exterior", len(center))


def boundary(center, radius, weight=1.0, **kw):
    return BumpSum((Bump(tuple(center), radius, weight, **kw),), "boundary", len(center))


P_HALF = Params(1, 0, 0.5)
H_2D = [boundary((0.0, 0.3), 1.0), boundary((0.0, -0.4), 0.8, 2.0, q=6)]


# ------------------------------------------------------------------ data


def test_bumpsum_domain_checks():
    with pytest.raises(ParameterError):
        interior((0.5,), 1.0)
    with pytest.raises(ParameterError):
        exterior((-0.5,), 1.0)
    with pytest.raises(ParameterError):
        boundary((0.1, 0.0), 1.0)
    with pytest.raises(ParameterError):
        BumpSum((Bump((1.0, 0.0), 0.5),), "interior", 1)
    with pytest.raises(ParameterError):
        BumpSum((), "elsewhere", 1)


def test_bumpsum_operations():
    a = interior((2.0,), 1.0, 0.5)
    b = interior((4.0,), 0.5, -2.0, profile="exp")
    c = a + b
    assert len(c.terms) == 2 and c.sup_norm() == pytest.approx(0.5 + 2 * math.exp(-1))
    assert c.min_radius() == 0.5
    assert np.allclose(c.scaled(3.0).values([[2.0], [4.0]]), 3 * c.values([[2.0], [4.0]]))
    assert BumpSum.from_dict(c.as_dict()) == c
    assert BumpSum.empty("interior", 1).is_empty and not c.is_empty
    with pytest.raises(ParameterError):
        a + exterior((-2.0,), 1.0)
    with pytest.raises(ParameterError):
        interior((2.0,), 1.0, q=4).validate_for(Params(1, 1, 0.5))
    interior((2.0,), 1.0, q=5).validate_for(Params(1, 1, 0.5))


# -------------------------------------------------------------- oracles


@pytest.mark.parametrize("x,ref", GREEN_FROZEN)
def test_green_frozen(x, ref):
    u = solve_green(interior((2.0,), 1.0), P_HALF)
    assert u([x]) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("x", [0.5, 1.2, 1.5, 1.9, 3.0])
def test_green_classical_ode(x):
    u = solve_green(interior((1.5,), 0.5), Params(1, 0, 1.0))
    assert u([x]) == pytest.approx(_ode_oracle(x, 1.5, 0.5, 8), rel=1e-8)


def test_ode_oracle_against_direct_quadrature():
    f = lambda y: (1 - ((y - 1.5) / 0.5) ** 2) ** 8
    for x in (0.5, 1.7):
        direct = integrate.quad(lambda y: min(x, y) * f(y), 1.0, 2.0, points=[x] if 1 < x < 2 else None, epsabs=1e-14)[0]
        assert _ode_oracle(x, 1.5, 0.5, 8) == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("x,ref", POISSON_FROZEN)
def test_poisson_frozen(x, ref):
    u = solve_poisson(exterior((-2.5,), 1.0), P_HALF)
    assert u([x]) == pytest.approx(ref, rel=1e-8)


def test_boundary_frozen_2d():
    p = Params(2, 1, 0.5)
    empty = BumpSum.empty("boundary", 2)
    u1 = solve_boundary([empty, H_2D[1]], p)
    u0 = solve_boundary([H_2D[0], empty], p)
    assert u1([0.3, 0.2]) == pytest.approx(BOUNDARY_H1_FROZEN, rel=1e-8)
    assert u0([0.3, 0.2]) == pytest.approx(BOUNDARY_H0_FROZEN, rel=1e-8)


@pytest.mark.parametrize("k", [0, 1])
def test_boundary_1d_formula(k):
    p = Params(1, 1, 0.5)
    h = [BumpSum.empty("boundary", 1) for _ in range(2)]
    h[k] = boundary((0.0,), 1.0, 0.7)
    u = solve_boundary(h, p)
    for x in (0.3, 2.0, 7.0):
        assert u([x]) == pytest.approx(x ** (p.s - p.m + k - 1) * 0.7, rel=1e-12)


@pytest.mark.parametrize("z", [0.0, 0.5, -0.7])
@pytest.mark.parametrize("j", [0, 1])
def test_boundary_traces_2d(z, j):
    p = Params(2, 1, 0.5)
    u = solve_boundary(H_2D, p)
    ref = float(H_2D[j].boundary_values([[z]])[0])
    assert abs(trace_D(u, [0.0, z], j, p.sigma) - ref) <= 1e-3 * H_2D[j].sup_norm()


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_poisson_kelvin_route(x):
    g = exterior((-2.5,), 1.0)
    ud, uk = solve_poisson(g, P_HALF), solve_poisson_kelvin(g, P_HALF)
    assert uk([x]) == pytest.approx(ud([x]), rel=1e-4)


def test_poisson_kelvin_route_2d():
    p = Params(2, 1, 0.3)
    g = exterior((-2.0, 0.5), 0.7)
    ud, uk = solve_poisson(g, p), solve_poisson_kelvin(g, p)
    for x in ([0.4, 0.0], [1.5, -1.0]):
        assert uk(x) == pytest.approx(ud(x), rel=1e-4)
    with pytest.raises(ParameterError):
        solve_poisson_kelvin(exterior((-1.5, 0.0), 0.6), p)([0.5, 0.0])


# ------------------------------------------------------------ contracts


def test_support_contract():
    ug = solve_green(interior((1.0, 0.0), 0.5), Params(2, 0, 0.5))
    ub = solve_boundary(H_2D, Params(2, 1, 0.5))
    pts = np.array([[0.0, 0.0], [-0.5, 0.3], [-3.0, -1.0]])
    assert np.all(ug.values(pts) == 0.0)
    assert np.all(ub.values(pts) == 0.0)


def test_poisson_outside_returns_g():
    g = exterior((-2.5,), 1.0, 1.3)
    u = solve_poisson(g, P_HALF)
    pts = np.array([[-2.5], [-2.0], [-0.5], [-5.0]])
    assert np.allclose(u.values(pts), g.values(pts), rtol=0, atol=0)


@pytest.mark.parametrize("s", [0.5, 1.5, 2.5])
def test_poisson_sign_by_parity(s):
    p = Params.from_s(1, s)
    u = solve_poisson(exterior((-2.0,), 0.8, q=2 * p.m + 3), p)
    vals = u.values(log_grid(-3, 4, 8))
    assert np.all((-1) ** p.m * vals > 0)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=10, deadline=None)
def test_green_linearity(a, b):
    f1, f2 = interior((2.0,), 1.0), interior((3.5,), 0.5, profile="exp")
    both = f1.scaled(a) + f2.scaled(b)
    x = [1.7]
    lhs = solve_green(both, P_HALF)(x)
    rhs = a * solve_green(f1, P_HALF)(x) + b * solve_green(f2, P_HALF)(x)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(a) + abs(b)))


def test_solve_full_reduces_to_parts():
    f = interior((2.0,), 1.0)
    ug, uf = solve_green(f, P_HALF), solve_full(f, None, None, P_HALF)
    pts = log_grid(-2, 3, 6)
    assert np.array_equal(uf.values(pts), ug.values(pts))
    zero = solve_full(None, BumpSum.empty("exterior", 1), [BumpSum.empty("boundary", 1)], P_HALF)
    assert np.all(zero.values(pts) == 0.0)
    g = exterior((-2.5,), 1.0)
    h = [boundary((0.0,), 1.0, 0.4)]
    total = solve_full(f, g, h, P_HALF)
    parts = ug.values(pts) + solve_poisson(g, P_HALF).values(pts) + solve_boundary(h, P_HALF).values(pts)
    assert np.allclose(total.values(pts), parts, rtol=1e-14)
    assert total.kind == "superposition"


def test_mismatched_data_rejected():
    with pytest.raises(ParameterError):
        solve_green(exterior((-2.0,), 1.0), P_HALF)
    with pytest.raises(ParameterError):
        solve_poisson(interior((2.0,), 1.0), P_HALF)
    with pytest.raises(ParameterError):
        solve_boundary([boundary((0.0, 0.0), 1.0)], P_HALF)


def test_residual_half_laplacian():
    f = interior((2.0,), 1.0)
    u = solve_green(f, P_HALF)
    for x in (1.5, 2.0, 2.7):
        lap = frac_laplacian_at(u, [x], P_HALF)[0]
        assert abs(lap - f.values([[x]])[0]) <= 1e-2 * f.sup_norm()


@pytest.mark.slow
def test_distributional_identity():
    # int u (-Delta)^s phi = int f phi for a test bump phi in the half-line
    f = interior((2.0,), 1.0)
    u = solve_green(f, P_HALF)
    phi = interior((1.5,), 0.5, profile="exp").field()
    lap_phi = lambda x: frac_laplacian_at(phi, [x], P_HALF)[0]
    g = lambda x: u(x) * lap_phi(x)
    lhs = integrate.quad(g, 0.0, 1.0, epsabs=1e-10)[0] + integrate.quad(g, 1.0, 2.0, epsabs=1e-10)[0]
    lhs += integrate.quad(g, 2.0, 3.0, epsabs=1e-10)[0] + integrate.quad(g, 3.0, np.inf, epsabs=1e-10)[0]
    rhs = integrate.quad(lambda x: f.values([[x]])[0] * phi(x), 1.0, 2.0, epsabs=1e-14)[0]
    assert lhs == pytest.approx(rhs, rel=1e-2)


# ------------------------------------------------------------ envelopes


def test_log_grid_shape():
    g = log_grid(-4, 6, 11)
    assert g.shape == (11, 1) and g[0, 0] == 2.0**-4 and g[-1, 0] == 2.0**6
    g2 = log_grid(0, 1, 3, [[0.0], [1.0]], 2)
    assert g2.shape == (6, 2)


def test_envelope_zero_field():
    zero = solve_full(None, None, None, P_HALF)
    st_ = envelope_ratio(zero, "bound", log_grid(-4, 6, 20))
    assert st_.max == 0.0 and st_.min == 0.0 and st_.count == 20


def test_envelope_values_and_errors():
    p = Params(2, 1, 0.5)
    x = np.array([0.5, 1.0])
    assert envelope_value("bound", x, p) == pytest.approx(0.5**1.5 / (1 + 1.25))
    assert envelope_value("decay_k", x, p, k=0, decay="nominal") == pytest.approx(0.5**-0.5 / (1 + 1.25**1.5))
    with pytest.raises(ParameterError):
        envelope_value("decay_k", x, p)
    with pytest.raises(ParameterError):
        envelope_value("nope", x, p)


def test_poisson_envelope_stable_under_doubling():
    u = solve_poisson(exterior((-2.5,), 1.0), P_HALF)
    coarse = envelope_ratio(u, "bound", log_grid(-4, 6, 21))
    fine = envelope_ratio(u, "bound", log_grid(-4, 6, 41))
    assert 0 < coarse.min and fine.max < math.inf
    assert fine.max == pytest.approx(coarse.max, rel=0.05)
    assert fine.min == pytest.approx(coarse.min, rel=0.05)
    signed = envelope_ratio(u, "bound", log_grid(-4, 6, 21), signed=True)
    assert signed.min > 0


def test_boundary_top_order_near_boundary():
    p = Params(2, 1, 0.5)
    u = solve_boundary([BumpSum.empty("boundary", 2), H_2D[1]], p)
    pts = log_grid(-14, 0, 15, [[-0.4]], 2)
    # a single h_m gives u ~ x1^(s-1) h_m: bounded against that power, no worse trace
    ratios = np.abs(u.values(pts)) / pts[:, 0] ** (p.s - 1)
    assert np.all(np.isfinite(ratios)) and ratios.max() <= 1.01 * H_2D[1].sup_norm()
    assert ratios[0] == pytest.approx(float(H_2D[1].boundary_values([[-0.4]])[0]), rel=1e-2)
    fine = log_grid(-14, 0, 29, [[-0.4]], 2)
    ratios2 = np.abs(u.values(fine)) / fine[:, 0] ** (p.s - 1)
    assert ratios2.max() == pytest.approx(ratios.max(), rel=1e-2)


# ------------------------------------------------------- parallel grids


def test_evaluate_grid_worker_independence(monkeypatch):
    u = solve_green(interior((2.0,), 1.0), P_HALF)
    pts = log_grid(-4, 4, 40)
    serial = evaluate_grid(u, pts, workers=1)
    parallel = evaluate_grid(u, pts, workers=3, chunk=7)
    assert np.array_equal(serial, parallel)
    monkeypatch.setenv("HSFRAC_WORKERS", "2")
    assert worker_count() <= 2
    monkeypatch.setenv("HSFRAC_WORKERS", "two")
    with pytest.raises(ParameterError):
        worker_count()
