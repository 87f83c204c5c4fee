from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fraclimits.core import ConfigError, Field, NumericalAbort, field_from_initial, make_grid
from fraclimits.hamilton_jacobi import (Hamiltonian, HJState, characteristic_solution,
                                        example2_front_bounds, golden_max,
                                        hamiltonian_bound_constants, hamiltonian_derivative,
                                        hamiltonian_eval, hj_solve, hopf_lax_envelope,
                                        zero_set_edge)

CASES = [(1.0, 0.5), (1.5, 1.0), (0.8, 0.4)]


@pytest.fixture(scope="module")
def H1():
    return Hamiltonian(1.0, 0.5)


# Hamiltonian values ---------------------------------------------------------------------

@pytest.mark.parametrize("alpha,p", [(1.0, 0.25), (1.0, 0.45), (1.5, 0.9), (0.8, -0.3),
                                     (0.5, 0.2), (1.9, 1.5)])
def test_hamiltonian_matches_gamma_form(alpha, p):
    want = oracles.hamiltonian(p, alpha)
    assert hamiltonian_eval(p, alpha) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("alpha,p", [(1.0, 0.3), (1.5, 0.7)])
def test_hamiltonian_oracles_agree(alpha, p):
    # two independent reference routes
    assert oracles.hamiltonian_quad(p, alpha) == pytest.approx(oracles.hamiltonian(p, alpha), rel=1e-10)


def test_hamiltonian_zero_and_domain():
    assert hamiltonian_eval(0.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        hamiltonian_eval(1.0, 1.0)
    with pytest.raises(ValueError):
        hamiltonian_derivative(-1.2, 1.0)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(0.3, 1.8), frac=st.floats(0.01, 0.95))
def test_hamiltonian_even_and_positive(alpha, frac):
    p = frac * alpha
    hp, hm = hamiltonian_eval(p, alpha), hamiltonian_eval(-p, alpha)
    assert hp > 0 and hp == pytest.approx(hm, rel=1e-12)


def test_hamiltonian_derivative_finite_difference():
    h = 1e-5
    fd = (hamiltonian_eval(0.3 + h, 1.2) - hamiltonian_eval(0.3 - h, 1.2)) / (2 * h)
    assert hamiltonian_derivative(0.3, 1.2) == pytest.approx(fd, rel=1e-7)


def test_small_p_curvature():
    p = 1e-3
    assert hamiltonian_eval(p, 1.0) / p ** 2 == pytest.approx(oracles.curvature_constant(1.0), rel=1e-5)


@pytest.mark.parametrize("alpha,A", CASES)
def test_bound_constants_match_oracle(alpha, A):
    c = hamiltonian_bound_constants(alpha, A)
    lo, hi = oracles.bound_constants(alpha, A)
    assert c["C_lower"] == pytest.approx(lo, rel=1e-9)
    assert c["C_upper"] == pytest.approx(hi, rel=1e-9)


def test_bound_constants_collapse_as_A_vanishes():
    c = hamiltonian_bound_constants(1.0, 1e-9)
    assert c["C_lower"] == pytest.approx(c["C_upper"], rel=1e-7)
    assert c["C_lower"] == pytest.approx(oracles.curvature_constant(1.0), rel=1e-7)
    with pytest.raises(ValueError):
        hamiltonian_bound_constants(1.0, 1.0)


# table ------------------------------------------------------------------------------------

@pytest.mark.parametrize("alpha,A", CASES)
def test_table_even_convex_sandwiched(alpha, A):
    H = Hamiltonian(alpha, A)
    assert H.p.size == 512
    np.testing.assert_allclose(H.H, H.H[::-1], rtol=1e-12, atol=1e-15)
    assert np.all(np.diff(H.H, 2) >= -1e-14)
    c = hamiltonian_bound_constants(alpha, A)
    p2 = H.p ** 2
    assert np.all(c["C_lower"] * p2 <= H.H * (1 + 1e-10) + 1e-15)
    assert np.all(H.H <= c["C_upper"] * p2 * (1 + 1e-10) + 1e-15)
    # 0 is not a node of an even-sized table; interpolation leaves a tiny residue
    assert abs(float(H(0.0))) <= 1e-10


def test_table_interpolation_error(H1):
    p = np.linspace(-0.49, 0.49, 37)
    exact = np.array([hamiltonian_eval(q, 1.0) for q in p])
    assert np.max(np.abs(H1(p) - exact)) < 1e-8


def test_table_budget_and_arguments(H1):
    with pytest.raises(NumericalAbort):
        H1(0.6)
    with pytest.raises(ConfigError):
        Hamiltonian(1.0, 1.0)


def test_table_csv(tmp_path, H1):
    H1.to_csv(tmp_path / "h.csv")
    data = np.loadtxt(tmp_path / "h.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data, H1.table())


# solver ------------------------------------------------------------------------------------

def test_zero_data_is_steady(H1):
    g = make_grid(64, 2.0)
    s = hj_solve(Field(g, np.zeros(64)), H1, 0.001, 0.1)[-1]
    assert np.max(np.abs(s.u)) <= 1e-11 and s.time == pytest.approx(0.1)


@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9, -0.7])
def test_affine_data_evolve_exactly(H1, frac):
    p = frac * H1.A
    g = make_grid(int(2 * 4 * 64), 4.0, False)
    dt = g.dx / (2 * H1.dH_max)
    s = hj_solve(Field(g, p * g.x), H1, dt, 1.0, boundary_slopes=(p, p))[-1]
    exact = p * g.x + hamiltonian_eval(p, 1.0) * 1.0
    assert np.max(np.abs(s.u - exact)) <= 1e-8


def test_cfl_enforced(H1):
    g = make_grid(64, 2.0)
    with pytest.raises(ConfigError):
        hj_solve(Field(g, np.zeros(64)), H1, g.dx, 0.1)


def test_gradient_budget_enforced(H1):
    g = make_grid(64, 2.0, False)
    with pytest.raises(ConfigError):
        hj_solve(Field(g, 0.8 * g.x), H1, 0.001, 0.1)


def test_smooth_solution_converges(H1):
    a, t = 0.1, 0.5
    errs = []
    for n in (128, 256):
        g = make_grid(n, math.pi)
        s = hj_solve(Field(g, a * np.sin(g.x)), H1, g.dx / (2 * H1.dH_max), t)[-1]
        ref = characteristic_solution(lambda y: a * math.sin(y), lambda y: a * math.cos(y),
                                      lambda p: float(H1(p)), lambda p: float(H1.derivative(p)),
                                      g.x, t, (-2, 2))
        errs.append(np.max(np.abs(s.u - ref)))
    assert errs[1] < 0.55 * errs[0]


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 20), bump=st.floats(0.0, 0.05))
def test_scheme_is_monotone(H1, seed, bump):
    g = make_grid(64, 4.0)
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1, 1, 3)
    k = np.pi / 4
    u = 0.1 * (c[0] * np.sin(k * g.x) + c[1] * np.cos(2 * k * g.x) + c[2] * np.sin(3 * k * g.x)) / 3
    w = u + bump * (1 + np.cos(k * g.x)) / 20
    dt = g.dx / (2 * H1.dH_max)
    su = hj_solve(Field(g, u), H1, dt, 0.2)[-1].u
    sw = hj_solve(Field(g, w), H1, dt, 0.2)[-1].u
    assert np.all(sw >= su - 1e-14)


def test_obstacle_solution_nonpositive(H1):
    g = make_grid(1280, 20.0, False)
    u0 = field_from_initial(g, "log_tail_u", {"A": 0.5})
    s = hj_solve(u0, H1, g.dx / (2 * H1.dH_max), 0.5, obstacle=True)[-1]
    assert np.max(s.u) <= 0.0
    assert np.sum(s.u == 0.0) > 1
    # off the zero set the discrete equation u_t = H(u_x) + 1 holds, so u increased
    assert np.all(s.u >= u0.values - 1e-14)


# envelopes and bounds ----------------------------------------------------------------------------

def test_golden_max():
    y, v = golden_max(lambda z: -(z - 0.3) ** 2, 0, 1)
    assert y == pytest.approx(0.3, abs=1e-6) and v == pytest.approx(0.0, abs=1e-12)


def test_hopf_lax_at_origin_and_small_time():
    assert hopf_lax_envelope(0.0, 1.0, 0.5, 1.0) == 0.0
    x = 3.0
    assert hopf_lax_envelope(x, 1e-6, 0.5, 1.0) == pytest.approx(-0.5 * math.log1p(x), abs=1e-5)


@pytest.mark.parametrize("x,t,C", [(2.0, 1.0, 1.5), (10.0, 0.5, 3.0), (-5.0, 2.0, 0.7), (0.5, 3.0, 2.0)])
def test_hopf_lax_matches_scan(x, t, C):
    assert hopf_lax_envelope(x, t, 0.5, C) == pytest.approx(oracles.hopf_lax_scan(x, t, 0.5, C), abs=1e-6)


def test_hj_solution_between_envelopes(H1):
    # the monotone scheme smears the corner at the origin, so probe away from it
    g = make_grid(10240, 40.0, False)
    u0 = field_from_initial(g, "log_tail_u", {"A": 0.5})
    s = hj_solve(u0, H1, g.dx / (2 * H1.dH_max), 1.0)[-1]
    c = hamiltonian_bound_constants(1.0, 0.5)
    for xi in (1.0, 2.0, 4.0, 8.0):
        i = int(np.argmin(np.abs(g.x - xi)))
        lo = hopf_lax_envelope(g.x[i], 1.0, 0.5, c["C_lower"])
        hi = hopf_lax_envelope(g.x[i], 1.0, 0.5, c["C_upper"])
        assert lo - 0.02 <= s.u[i] <= hi + 0.02


def test_front_bounds_small_time():
    b = example2_front_bounds(1e-6, 0.5, 1.0)
    assert b["x_lower"] == pytest.approx(0.0, abs=1e-4) and b["x_upper"] == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_front_bounds_match_scan(t):
    b = example2_front_bounds(t, 0.5, 1.0)
    assert b["x_lower"] <= b["x_upper"]
    assert b["x_lower"] == pytest.approx(oracles.front_bound_scan(t, 0.5, b["C_lower"]), abs=1e-6)
    assert b["x_upper"] == pytest.approx(oracles.front_bound_scan(t, 0.5, b["C_upper"]), abs=1e-6)
    assert b["x_lower"] >= math.expm1(t / 0.5)


def test_characteristic_solution_affine():
    p = 0.2
    x = np.linspace(-1, 1, 5)
    u = characteristic_solution(lambda y: p * y, lambda y: p, lambda q: 2 * q * q,
                                lambda q: 4 * q, x, 1.0, (-2, 2))
    np.testing.assert_allclose(u, p * x + 2 * p * p, atol=1e-14)


def test_zero_set_edge_linear_extrapolation():
    g = make_grid(21, 10.0, False)       # dx = 1
    u = np.minimum(0.0, -(g.x - 2.5))
    u = np.where(g.x > 2.5, u, 0.0)
    assert zero_set_edge(HJState(g, u, 0.0, True)) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        zero_set_edge(HJState(g, -np.ones(21), 0.0, True))
