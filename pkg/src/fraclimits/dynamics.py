"""Time integration of the evolution problems.

Periodic problems (fractional heat, Fisher-KPP, nonlocal competition) are
split: the fractional Laplacian is applied exactly in transform space, then
the reaction is integrated exactly for one step.  The logistic term
``n (1 - n)`` has the flow ``n e^t / (1 - n + n e^t)`` and the competition
term ``n R(I)`` multiplies ``n`` by ``e^{R(I) dt}``.

The small-step equation

    eps d_t n = J_eps n + n R

lives on a non-periodic grid with a far-field continuation and is advanced
with Heun's method (explicit RK2) under the a priori bound
``dt <= eps dx^alpha / (4 kernel_mass)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from .core import (AlgebraicTail, ConfigError, FarField, Field, LinearLogTail, MassState,
                   NumericalAbort, Reaction, RunConfig, as_frac_order, field_from_initial, mass)
from .kernels import KernelQuadrature
from .operators import jump_operator, spectral_plan

BLOW_UP = 2.0


@dataclass
class Stepper:
    """Scheme name, step size and the stability data checked before stepping."""

    scheme: str
    dt: float
    stability: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in ("semi_implicit_spectral", "explicit_rk2_quadrature", "monotone_llf"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")


@dataclass
class Trajectory:
    """Snapshots of one run plus the mass series recorded at every step.

    ``fields`` holds the snapshots taken after every ``stride`` steps (and
    after the last step); the initial state is kept in ``initial``.
    """

    initial: Field
    times: list = dc_field(default_factory=list)
    fields: list = dc_field(default_factory=list)
    mass_times: list = dc_field(default_factory=list)
    mass_values: list = dc_field(default_factory=list)
    record: dict = dc_field(default_factory=dict)

    def append(self, field: Field):
        if self.times and field.time <= self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times.append(field.time)
        self.fields.append(field)

    def record_mass(self, t, I):
        self.mass_times.append(float(t))
        self.mass_values.append(float(I))

    @property
    def final(self) -> Field:
        return self.fields[-1] if self.fields else self.initial

    def mass_series(self):
        return np.array(self.mass_times), np.array(self.mass_values)

    def __len__(self):
        return len(self.fields)


def _count(record, key, amount=1):
    if record is not None:
        record[key] = record.get(key, 0) + amount


# ---------------------------------------------------------------------------
# periodic spectral steppers
# ---------------------------------------------------------------------------

def step_frac_heat(field: Field, dt, frac_order) -> Field:
    """Exact step of ``v_t + (-Delta)^{alpha/2} v = 0`` on a periodic grid."""
    if not field.grid.periodic:
        raise ConfigError("step_frac_heat needs a periodic grid")
    plan = spectral_plan(field.grid, as_frac_order(frac_order).alpha)
    out = np.fft.irfft(plan.heat_multiplier(dt) * np.fft.rfft(field.values), n=field.grid.n_points)
    return field.with_values(out, time=field.time + dt)


def logistic_flow(n, dt):
    """Exact time-``dt`` flow of ``n' = n (1 - n)``."""
    g = math.exp(dt)
    return n * g / (1.0 - n + n * g)


def step_kpp(field: Field, dt, frac_order, record=None) -> Field:
    """One split step of ``n_t + (-Delta)^{alpha/2} n = n (1 - n)``.

    Negative values produced by the transform step are set to zero and
    counted in ``record["clipped"]``.

    Raises
    ------
    NumericalAbort
        If any value exceeds 2 after the step.
    """
    heat = step_frac_heat(field, dt, frac_order).values
    neg = heat < 0
    if neg.any():
        _count(record, "clipped", int(neg.sum()))
        heat = np.where(neg, 0.0, heat)
    out = logistic_flow(heat, dt)
    if np.max(out) > BLOW_UP:
        raise NumericalAbort(f"KPP solution exceeded {BLOW_UP}", field.time + dt)
    return field.with_values(out, time=field.time + dt)


def step_nonlocal(field: Field, mass_state: MassState, dt, frac_order, reaction: Reaction,
                  bounds=None, record=None):
    """One split step of ``n_t + (-Delta)^{alpha/2} n = n R(I)``.

    The transform step conserves mass, so the reaction uses the mass at the
    start of the step; the new mass is recomputed from the updated field.

    Parameters
    ----------
    bounds : (float, float), optional
        ``(I_m, I_M)``; the step aborts if the new mass leaves
        ``[I_m / 2, 2 I_M]``.
    """
    if not mass_state.I > 0:
        raise NumericalAbort("mass must be positive", field.time)
    heat = step_frac_heat(field, dt, frac_order).values
    neg = heat < 0
    if neg.any():
        _count(record, "clipped", int(neg.sum()))
        heat = np.where(neg, 0.0, heat)
    out = heat * math.exp(float(reaction.R(mass_state.I)) * dt)
    new = field.with_values(out, time=field.time + dt)
    I_new = mass(new)
    if bounds is not None and not 0.5 * bounds[0] <= I_new <= 2.0 * bounds[1]:
        raise NumericalAbort(f"mass {I_new:.6g} left [{0.5 * bounds[0]:.6g}, {2 * bounds[1]:.6g}]",
                             new.time)
    new.mass = I_new
    return new, MassState(I_new)


# ---------------------------------------------------------------------------
# small-step equation
# ---------------------------------------------------------------------------

def default_sme_far_field(kernel_quadrature: KernelQuadrature, epsilon) -> FarField:
    """Exponential continuation for ``A > 0``, else the power law."""
    if kernel_quadrature.A > 0:
        return LinearLogTail(kernel_quadrature.A, float(epsilon))
    return AlgebraicTail(1.0 + kernel_quadrature.alpha)


def step_sme(field: Field, mass_state: MassState, dt, epsilon, reaction: Reaction,
             kernel_quadrature: KernelQuadrature, far_field: FarField | None = None,
             record=None):
    """Heun step of ``eps n_t = J_eps n + n R``.

    ``R = 1 - n`` for the ``kpp`` reaction and ``R(I)`` for the ``nonlocal``
    one, with ``I`` the mass including the far-field tail.

    Raises
    ------
    ConfigError
        If ``dt`` exceeds ``eps dx^alpha / (4 kernel_mass)``; checked before
        any work is done.
    """
    if not 0 < epsilon <= 1:
        raise ConfigError(f"epsilon must lie in (0, 1], got {epsilon}")
    op = jump_operator(field.grid, float(epsilon), kernel_quadrature)
    bound = op.max_stable_dt()
    if dt > bound:
        raise ConfigError(f"dt = {dt:.4g} exceeds the stability bound {bound:.4g}")
    ff = far_field if far_field is not None else default_sme_far_field(kernel_quadrature, epsilon)
    grid = field.grid

    def total_mass(v):
        return float(np.trapezoid(v, dx=grid.dx)) + ff.tail_mass(v, grid)

    def rhs(v):
        if reaction.kind == "kpp":
            growth = v * (1.0 - v)
        else:
            growth = v * float(reaction.R(total_mass(v)))
        return (op.apply(v, ff) + growth) / epsilon

    n = field.values
    k1 = rhs(n)
    n1 = n + dt * k1
    out = n + 0.5 * dt * (k1 + rhs(n1))
    neg = out < 0
    if neg.any():
        _count(record, "clipped", int(neg.sum()))
        out = np.where(neg, 0.0, out)
    if reaction.kind == "kpp" and np.max(out) > BLOW_UP:
        raise NumericalAbort(f"solution exceeded {BLOW_UP}", field.time + dt)
    I_new = total_mass(out)
    new = field.with_values(out, time=field.time + dt, mass=I_new)
    return new, MassState(I_new)


# ---------------------------------------------------------------------------
# mass equation
# ---------------------------------------------------------------------------

def mass_ode_solve(I0, reaction: Reaction, epsilon, t_final, t_eval=None, rtol=1e-12):
    """Solve ``eps I' = I R(I)`` with an adaptive eighth-order Runge-Kutta method.

    Returns
    -------
    t, I : ndarray
        Samples at ``t_eval`` (201 uniform points by default).
    """
    if not I0 > 0:
        raise ConfigError("I0 must be positive")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_final, 201)
    t_eval = np.asarray(t_eval, dtype=float)
    # accumulated step times may overshoot t_final by a few ulps
    t_end = max(float(t_final), float(t_eval.max()) if t_eval.size else 0.0)
    sol = solve_ivp(lambda t, y: y * reaction.R(y) / epsilon, (0.0, t_end), [float(I0)],
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=rtol * 1e-3)
    if not sol.success:
        raise NumericalAbort(f"mass ODE failed: {sol.message}")
    return sol.t, sol.y[0]


def logistic_mass(t, I0, reaction: Reaction, epsilon):
    """Closed form of ``eps I' = I r (1 - I / I0)``."""
    K = reaction.I_zero
    e = np.exp(-reaction.r * np.asarray(t, dtype=float) / epsilon)
    return K * I0 / (I0 + (K - I0) * e)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def initial_field(config: RunConfig) -> Field:
    """Initial data for a configuration.

    The default kind depends on the problem: a Gaussian bump for the heat
    equation, power-law tails ``C / (1 + |x/scale|^{1+alpha})`` for the
    periodic reaction problems, ``(1 + |x|)^{-A/eps} e^{B/eps}`` for the
    small-step problems and ``-A log(1 + |x|) + B`` for the limit equations.
    """
    defaults = {"frac_heat": "bump", "kpp": "algebraic_tail_n", "nonlocal": "algebraic_tail_n",
                "sme_kpp": "log_tail_n", "sme_nonlocal": "log_tail_n", "hj": "log_tail_u",
                "hj_obstacle": "log_tail_u"}
    kind = config.initial or defaults[config.problem]
    params = {"alpha": config.alpha, "C": config.C, "scale": config.scale, "A": config.A,
              "B": config.B, "epsilon": config.epsilon, "width": config.scale,
              "amplitude": config.C, "value": config.C}
    if config.problem in ("kpp", "nonlocal"):
        params["epsilon"] = 1.0
    return field_from_initial(config.grid, kind, params)


def run(config: RunConfig) -> Trajectory:
    """Integrate the configured problem up to ``t_final``.

    Snapshots are taken every ``stride`` steps and after the last step; the
    mass is recorded at every step.  Numerical aborts are re-raised with the
    time at which they happened.
    """
    problem = config.problem
    if problem in ("hj", "hj_obstacle"):
        return _run_hj(config)
    f = initial_field(config)
    traj = Trajectory(initial=f)
    record = traj.record
    n_steps = max(1, int(math.ceil(config.t_final / config.dt - 1e-9)))
    dt = config.t_final / n_steps
    reaction = config.reaction
    alpha = config.alpha
    if problem.startswith("sme"):
        if config.periodic:
            raise ConfigError("small-step problems need a non-periodic grid")
        kq = KernelQuadrature(alpha, config.A)
        ff = LinearLogTail(config.A, config.epsilon)
        op = jump_operator(config.grid, config.epsilon, kq)
        record["stepper"] = Stepper("explicit_rk2_quadrature", dt,
                                    {"max_stable_dt": op.max_stable_dt(),
                                     "kernel_mass": op.kernel_mass(), "k_max": kq.k_max,
                                     "tail_bound": kq.tail})
        I = float(np.trapezoid(f.values, dx=f.grid.dx)) + ff.tail_mass(f.values, f.grid)
    else:
        if not config.periodic:
            raise ConfigError(f"problem {problem!r} needs a periodic grid")
        record["stepper"] = Stepper("semi_implicit_spectral", dt,
                                    {"symbol_max": spectral_plan(f.grid, alpha).symbol_max})
        I = mass(f)
    f.mass = I
    traj.record_mass(0.0, I)
    I_bounds = None
    if reaction.kind == "nonlocal":
        I_bounds = (min(I, reaction.I_zero), max(I, reaction.I_zero))
    state = MassState(I) if I > 0 else None
    record.setdefault("clipped", 0)
    try:
        for step in range(1, n_steps + 1):
            if problem == "frac_heat":
                f = step_frac_heat(f, dt, alpha)
                f.mass = mass(f)
            elif problem == "kpp":
                f = step_kpp(f, dt, alpha, record)
                f.mass = mass(f)
            elif problem == "nonlocal":
                f, state = step_nonlocal(f, state, dt, alpha, reaction, I_bounds, record)
            else:
                f, state = step_sme(f, state, dt, config.epsilon, reaction, kq, ff, record)
                if I_bounds is not None and not 0.5 * I_bounds[0] <= state.I <= 2 * I_bounds[1]:
                    raise NumericalAbort(f"mass {state.I:.6g} left its bounds", f.time)
            traj.record_mass(f.time, f.mass)
            if step % config.stride == 0 or step == n_steps:
                traj.append(f)
    except NumericalAbort as exc:
        if exc.time is None:
            raise NumericalAbort(str(exc), f.time + dt) from exc
        raise
    return traj


def _run_hj(config: RunConfig) -> Trajectory:
    from .hamilton_jacobi import Hamiltonian, hj_solve

    if config.periodic:
        raise ConfigError("the limit equations use a non-periodic grid with slope boundaries")
    f = initial_field(config)
    H = Hamiltonian(config.alpha, config.A)
    dt = min(config.dt, f.grid.dx / (2.0 * H.dH_max))
    states = hj_solve(f, H, dt, config.t_final, obstacle=config.problem == "hj_obstacle",
                      stride=config.stride)
    traj = Trajectory(initial=f)
    traj.record["stepper"] = Stepper("monotone_llf", dt, {"max_dH": H.dH_max})
    for s in states[1:]:
        traj.append(Field(f.grid, s.u, s.time))
    return traj
