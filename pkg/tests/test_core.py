from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclimits.core import (AlgebraicTail, ConfigError, Field, FracOrder, LinearLogTail,
                             NumericalAbort, Reaction, RunConfig, field_from_initial,
                             make_grid, mass, padded_values)

import oracles


# grids ---------------------------------------------------------------------

def test_make_grid_spacing():
    g = make_grid(16, 8, True)
    assert g.dx == 1.0
    assert g.x[0] == -8.0 and g.x[-1] == 7.0


def test_make_grid_nonperiodic_same_lattice():
    a, b = make_grid(16, 8, True), make_grid(16, 8, False)
    assert not b.periodic
    np.testing.assert_array_equal(a.x, b.x)


def test_make_grid_rejects_non_power_of_two_when_periodic():
    with pytest.raises(ConfigError):
        make_grid(17, 8, True)
    make_grid(17, 8, False)


@pytest.mark.parametrize("n, L", [(8, 1.0), (32, 0.0), (32, -1.0)])
def test_make_grid_rejects_bad_sizes(n, L):
    with pytest.raises(ConfigError):
        make_grid(n, L, False)


def test_grid_points_bit_reproducible():
    assert make_grid(1024, 64.0).x.tobytes() == make_grid(1024, 64.0).x.tobytes()


@pytest.mark.parametrize("alpha", [0.0, 2.0, -0.5, 2.5])
def test_frac_order_range(alpha):
    with pytest.raises(ConfigError):
        FracOrder(alpha)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 1.9])
def test_symbol_constant_matches_oracle(alpha):
    assert FracOrder(alpha).symbol_constant == pytest.approx(oracles.symbol_constant(alpha), rel=1e-13)


# initial data --------------------------------------------------------------

def test_constant_initial():
    f = field_from_initial(make_grid(32, 4.0), "constant", {"value": 1.0})
    assert np.all(f.values == 1.0)


def test_log_tail_u_at_origin():
    g = make_grid(32, 4.0, False)
    f = field_from_initial(g, "log_tail_u", {"A": 0.5, "B": 0.0})
    assert f.values[g.index_of(0.0)] == 0.0


def test_algebraic_tail_value():
    g = make_grid(16, 8, True)
    f = field_from_initial(g, "algebraic_tail_n", {"C": 1.0, "alpha": 1.0, "epsilon": 1.0})
    assert f.values[g.index_of(1.0)] == 0.5
    assert np.all((f.values > 0) & (f.values <= 1.0))


def test_initial_rejections():
    g = make_grid(32, 4.0)
    with pytest.raises(ConfigError):
        field_from_initial(g, "algebraic_tail_n", {"C": 0.0, "alpha": 1.0})
    with pytest.raises(ConfigError):
        field_from_initial(g, "log_tail_u", {"A": 1.0, "alpha": 1.0})
    with pytest.raises(ConfigError):
        field_from_initial(g, "nonsense", {})


@settings(max_examples=30, deadline=None)
@given(A=st.floats(0.05, 1.5), B=st.floats(-2, 2))
def test_log_tail_shift_inequality(A, B):
    g = make_grid(257, 16.0, False)
    u = field_from_initial(g, "log_tail_u", {"A": A, "B": B}).values
    for m in (1, 3, 17, 100, 256):
        h = m * g.dx
        assert np.all(u[m:] <= u[:-m] + A * math.log1p(h) + 1e-12)
        assert np.all(u[:-m] <= u[m:] + A * math.log1p(h) + 1e-12)


# fields and mass -------------------------------------------------------------

def test_field_rejects_nonfinite():
    g = make_grid(16, 1.0)
    with pytest.raises(NumericalAbort):
        Field(g, np.full(16, np.nan))


def test_mass_of_box():
    g = make_grid(256, 8.0, False)
    assert abs(mass(Field(g, np.ones(256))) - 16.0) <= g.dx


def test_mass_zero():
    assert mass(Field(make_grid(64, 8.0), np.zeros(64))) == 0.0


def test_mass_lorentzian():
    g = make_grid(2 ** 16, 200.0)
    f = Field(g, 1.0 / (1.0 + g.x ** 2))
    assert abs(mass(f) - math.pi) < 0.02


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2 ** 16))
def test_mass_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(64, 4.0, False)
    f, h = rng.random(64), rng.random(64)
    lhs = mass(Field(g, a * f + b * h))
    rhs = a * mass(Field(g, f)) + b * mass(Field(g, h))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_algebraic_tail_mass_closed_form():
    g = make_grid(2001, 100.0, False)
    alpha = 1.0
    v = 1.0 / (1.0 + g.x ** 2)
    total = mass(Field(g, v), AlgebraicTail(1 + alpha))
    assert total == pytest.approx(math.pi, rel=1e-4)


def test_linear_log_tail_continuation_and_mass():
    g = make_grid(401, 20.0, False)
    A, eps = 0.5, 0.2
    v = np.exp(-A * np.log1p(np.abs(g.x)) / eps)
    ff = LinearLogTail(A, eps)
    ext = padded_values(v, g, ff, 3)
    assert ext[3:-3].tobytes() == v.tobytes()
    assert ext[-1] == pytest.approx(v[-1] * math.exp(-A * 3 * g.dx / eps))
    assert ff.tail_mass(v, g) == pytest.approx((v[0] + v[-1]) * eps / A)


def test_linear_log_tail_jump_sum_matches_generic():
    g = make_grid(101, 5.0, False)
    v = np.exp(-np.abs(g.x))
    ff = LinearLogTail(0.5, 0.3)
    shifts = np.linspace(11.0, 15.0, 37)
    weights = np.linspace(1.0, 2.0, 37)
    generic = super(LinearLogTail, ff).jump_sum(v, g, shifts, weights)
    np.testing.assert_allclose(ff.jump_sum(v, g, shifts, weights), generic, rtol=1e-12)


# reaction and config ---------------------------------------------------------

def test_reaction_zero_and_slope():
    R = Reaction("nonlocal", r=2.0)
    assert R.I_zero == 2.0 and R.slope == 1.0 and float(R.R(2.0)) == 0.0
    assert Reaction("nonlocal", 1.0, 0.5).slope == 2.0


def test_runconfig_requires_A_below_alpha():
    with pytest.raises(ConfigError):
        RunConfig(problem="sme_kpp", alpha=0.5, A=0.6, periodic=False, n_points=33)


def test_runconfig_ini_roundtrip(tmp_path):
    cfg = RunConfig(problem="sme_nonlocal", alpha=1.2, epsilon=0.1, n_points=129, half_width=8.0,
                    periodic=False, dt=1e-3, t_final=0.5, A=0.4, I0=1.5, stride=7)
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    again = RunConfig.from_file(path)
    assert again == cfg


def test_runconfig_overrides_and_errors(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[problem]\nproblem = kpp\nalpha = 1.0\n")
    cfg = RunConfig.from_file(path, ["alpha=1.5", "grid.n_points=64"])
    assert cfg.alpha == 1.5 and cfg.n_points == 64
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nflavour = sweet\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(bad)
    with pytest.raises(ConfigError):
        RunConfig.from_file(path, ["alpha=abc"])
