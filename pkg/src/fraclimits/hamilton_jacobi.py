"""Limit Hamilton-Jacobi problems of the small-step scaling.

The Hamiltonian is

    H(p) = int_0^inf (e^{pk} + e^{-pk} - 2) e^k / (e^k - 1)^(1+alpha) dk,

finite for ``|p| < alpha``.  :class:`Hamiltonian` tabulates it on ``[-A, A]``
and :func:`hj_solve` integrates ``u_t = H(u_x)`` (optionally with the
obstacle ``max(u_t - H(u_x) - 1, u) = 0``) with a monotone local
Lax-Friedrichs scheme.  The quadratic bounds ``C_lower p^2 <= H(p) <=
C_upper p^2`` give Hopf-Lax envelopes and explicit front bounds used as
independent checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import ConfigError, Field, Grid, NumericalAbort, as_frac_order
from .kernels import KernelQuadrature


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def _quadrature_for(alpha, p_abs, kernel_quadrature):
    if kernel_quadrature is not None and p_abs <= kernel_quadrature.A:
        return kernel_quadrature
    return KernelQuadrature(alpha, A=p_abs)


def hamiltonian_eval(p, alpha, kernel_quadrature: KernelQuadrature | None = None) -> float:
    """``H(p)`` by split quadrature.

    Raises
    ------
    ValueError
        If ``|p| >= alpha`` (the integral diverges).
    """
    alpha = as_frac_order(alpha).alpha
    p = float(p)
    if abs(p) >= alpha:
        raise ValueError(f"H(p) diverges for |p| >= alpha; got p = {p}, alpha = {alpha}")
    if p == 0.0:
        return 0.0
    kq = _quadrature_for(alpha, abs(p), kernel_quadrature)
    # e^{pk} + e^{-pk} - 2 = 4 sinh^2(pk/2), free of cancellation at small pk
    return kq.integrate(lambda k: 4.0 * np.sinh(0.5 * p * k) ** 2)


def hamiltonian_derivative(p, alpha, kernel_quadrature: KernelQuadrature | None = None) -> float:
    """``H'(p) = int 2 k sinh(pk) w(k) dk``."""
    alpha = as_frac_order(alpha).alpha
    p = float(p)
    if abs(p) >= alpha:
        raise ValueError(f"H'(p) diverges for |p| >= alpha; got p = {p}")
    kq = _quadrature_for(alpha, abs(p), kernel_quadrature)
    return kq.integrate(lambda k: 2.0 * k * np.sinh(p * k))


def hamiltonian_bound_constants(alpha, A, kernel_quadrature: KernelQuadrature | None = None) -> dict:
    """Constants of the quadratic sandwich ``C_lower p^2 <= H(p) <= C_upper p^2``.

    ``C_lower = int k^2 (e^{-Ak} + 1) w(k) / 2 dk`` and ``C_upper`` uses
    ``e^{+Ak}``; valid for ``|p| <= A < alpha``.
    """
    alpha = as_frac_order(alpha).alpha
    if not 0 <= A < alpha:
        raise ValueError(f"the constants diverge unless 0 <= A < alpha (A = {A}, alpha = {alpha})")
    kq = _quadrature_for(alpha, A, kernel_quadrature)
    lower = kq.integrate(lambda k: 0.5 * k * k * (np.exp(-A * k) + 1.0))
    upper = kq.integrate(lambda k: 0.5 * k * k * (np.exp(A * k) + 1.0))
    return {"C_lower": lower, "C_upper": upper}


class Hamiltonian:
    """``H`` tabulated on ``[-A, A]`` with a cubic Hermite interpolant.

    Parameters
    ----------
    alpha : float
    A : float
        Lipschitz budget, ``0 < A < alpha``.
    n_nodes : int
        Table size (512 by default).
    kernel_quadrature : KernelQuadrature, optional

    Attributes
    ----------
    p, H, dH : ndarray
        Table nodes, values and exact derivatives.
    dH_max : float
        ``max |H'|`` on ``[-A, A]``.
    """

    def __init__(self, alpha, A, n_nodes=512, kernel_quadrature=None):
        self.alpha = as_frac_order(alpha).alpha
        self.A = float(A)
        if not 0 < self.A < self.alpha:
            raise ConfigError(f"need 0 < A < alpha, got A = {A}, alpha = {self.alpha}")
        kq = kernel_quadrature if kernel_quadrature is not None else KernelQuadrature(self.alpha, self.A)
        if kq.A < self.A:
            raise ConfigError("kernel quadrature was built for a smaller A")
        self.kq = kq
        self.p = np.linspace(-self.A, self.A, int(n_nodes))
        pk = np.outer(self.p, kq.nodes)
        self.H = (4.0 * np.sinh(0.5 * pk) ** 2) @ kq.weights
        self.dH = (2.0 * kq.nodes * np.sinh(pk)) @ kq.weights
        self._spline = CubicHermiteSpline(self.p, self.H, self.dH)
        self.dH_max = float(np.max(np.abs(self.dH)))
        self.tolerance = 1e-9 * self.A

    def _check(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(np.abs(p) > self.A + self.tolerance):
            raise NumericalAbort(
                f"|p| = {np.max(np.abs(p)):.6g} exceeds the gradient budget A = {self.A}")
        return np.clip(p, -self.A, self.A)

    def __call__(self, p):
        return self._spline(self._check(p))

    def derivative(self, p):
        return self._spline(self._check(p), 1)

    def table(self):
        """Columns ``p, H(p), H'(p)``."""
        return np.column_stack([self.p, self.H, self.dH])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("p,H,dH\n")
            for row in self.table():
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# monotone solver
# ---------------------------------------------------------------------------

@dataclass
class HJState:
    """Discrete Hamilton-Jacobi solution at one time."""

    grid: Grid
    u: np.ndarray
    time: float
    obstacle: bool = False

    def gradient(self):
        return np.diff(self.u) / self.grid.dx


def _one_sided(u, grid, slopes):
    dx = grid.dx
    if grid.periodic:
        ext = np.concatenate([u[-1:], u, u[:1]])
    else:
        ext = np.concatenate([[u[0] - slopes[0] * dx], u, [u[-1] + slopes[1] * dx]])
    d = np.diff(ext) / dx
    return d[:-1], d[1:]


def hj_solve(u0_field, hamiltonian: Hamiltonian, dt, t_final, obstacle=False,
             boundary_slopes=None, stride=None, grad_tol=1e-6):
    """Local Lax-Friedrichs integration of ``u_t = H(u_x)`` (+1 with obstacle).

    Parameters
    ----------
    u0_field : Field
        Initial data with discrete gradient at most ``A`` in size.
    hamiltonian : Hamiltonian
    dt, t_final : float
        ``dt <= dx / (2 max|H'|)`` is required.
    obstacle : bool
        Solve ``max(u_t - H(u_x) - 1, u) = 0`` by adding the source 1 and
        projecting ``u <- min(u, 0)`` after each step.
    boundary_slopes : (float, float), optional
        ``u_x`` imposed through ghost nodes at the left and right ends of a
        non-periodic grid; defaults to ``(+A, -A)``.
    stride : int, optional
        Keep every ``stride``-th state; by default only the first and last.
    grad_tol : float
        Allowed excess of the discrete gradient over ``A``.

    Returns
    -------
    list of HJState
    """
    grid = u0_field.grid
    H = hamiltonian
    A = H.A
    theta = H.dH_max
    dx = grid.dx
    if dt > dx / (2.0 * theta) * (1 + 1e-12):
        raise ConfigError(f"CFL violated: dt = {dt} > dx/(2 max|H'|) = {dx / (2 * theta)}")
    slopes = (A, -A) if boundary_slopes is None else tuple(boundary_slopes)
    u = np.array(u0_field.values, dtype=float)
    if obstacle:
        u = np.minimum(u, 0.0)
    budget = A + grad_tol
    pm, pp = _one_sided(u, grid, slopes)
    if max(np.max(np.abs(pm)), np.max(np.abs(pp))) > budget:
        raise ConfigError("initial gradient exceeds the budget A")
    n_steps = max(1, int(math.ceil(t_final / dt - 1e-9)))
    t = u0_field.time
    states = [HJState(grid, u.copy(), t, obstacle)]
    for step in range(1, n_steps + 1):
        h = min(dt, u0_field.time + t_final - t)
        pm, pp = _one_sided(u, grid, slopes)
        if max(np.max(np.abs(pm)), np.max(np.abs(pp))) > budget:
            raise NumericalAbort("gradient budget exceeded", t)
        rate = H(0.5 * (pm + pp)) + 0.5 * theta * (pp - pm)
        if obstacle:
            rate = rate + 1.0
        u = u + h * rate
        if obstacle:
            u = np.minimum(u, 0.0)
        t = u0_field.time + min(step * dt, t_final)
        if (stride and step % stride == 0) or step == n_steps:
            states.append(HJState(grid, u.copy(), t, obstacle))
    return states


def characteristic_solution(u0, du0, hamiltonian_fn, dhamiltonian_fn, x, t, y_bracket):
    """Exact smooth solution of ``u_t = H(u_x)`` by characteristics.

    Along ``x = y - t H'(u0'(y))`` the slope is constant and
    ``u = u0(y) + t (H(p) - p H'(p))``.  Valid before characteristics cross.
    """
    from scipy.optimize import brentq

    out = np.empty(len(x))
    for i, xi in enumerate(x):
        def g(y):
            return y - t * dhamiltonian_fn(du0(y)) - xi
        y = brentq(g, xi + y_bracket[0], xi + y_bracket[1], xtol=1e-15, rtol=1e-15)
        p = du0(y)
        out[i] = u0(y) + t * (hamiltonian_fn(p) - p * dhamiltonian_fn(p))
    return out


# ---------------------------------------------------------------------------
# envelopes and explicit bounds
# ---------------------------------------------------------------------------

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a, b, tol=1e-12):
    """Maximise a unimodal ``f`` on ``[a, b]`` by golden-section search."""
    c, d = b - _GOLD * (b - a), a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = f(d)
    y = 0.5 * (a + b)
    return y, f(y)


def hopf_lax_envelope(x, t, A, C_const) -> float:
    """``sup_y { -A log(1+|y|) - (x-y)^2 / (4 C t) }``.

    For ``x >= 0`` the maximiser lies in ``[0, x]``.  The objective is convex
    below ``y* = sqrt(2ACt) - 1`` and concave above it, so the supremum is
    the larger of the value at ``y = 0`` and a golden-section maximum on
    ``[max(0, y*), x]``.
    """
    if not (t > 0 and C_const > 0):
        raise ValueError("need t > 0 and C > 0")
    x = abs(float(x))
    c4t = 4.0 * C_const * t

    def f(y):
        return -A * math.log1p(abs(y)) - (x - y) ** 2 / c4t

    best = f(0.0)
    lo = max(0.0, math.sqrt(2.0 * A * C_const * t) - 1.0)
    if lo < x:
        _, val = golden_max(f, lo, x)
        best = max(best, val, f(x))
    return best


def example2_front_bounds(t, A, alpha, kernel_quadrature=None, n_scan=2001) -> dict:
    """Bounds on the right edge of ``{u = 0}`` for the obstacle problem.

    Both are ``max_{r in [0,1]} [2 sqrt(C) r t + e^{t(1-r^2)/A} - 1]`` with
    ``C = C_lower`` and ``C = C_upper``; the maximum is located on a scan
    and refined by golden-section search on the bracketing cells.
    """
    consts = hamiltonian_bound_constants(alpha, A, kernel_quadrature)
    out = {}
    for name, C in (("x_lower", consts["C_lower"]), ("x_upper", consts["C_upper"])):
        out[name] = _max_over_r(t, A, C, n_scan)
    out.update(consts)
    return out


def _max_over_r(t, A, C, n_scan):
    sq = 2.0 * math.sqrt(C) * t

    def g(r):
        return sq * r + math.expm1(t * (1.0 - r * r) / A)

    r = np.linspace(0.0, 1.0, n_scan)
    vals = sq * r + np.expm1(t * (1.0 - r * r) / A)
    i = int(np.argmax(vals))
    best = float(vals[i])
    a, b = r[max(i - 1, 0)], r[min(i + 1, n_scan - 1)]
    if b > a:
        best = max(best, golden_max(g, a, b, 1e-14)[1])
    return best


def zero_set_edge(state: HJState, tol=1e-12) -> float:
    """Right end of ``{u = 0}`` for an obstacle solution.

    The last node with ``u >= -tol`` only locates the edge to within a cell,
    so the smooth negative profile just outside is extrapolated linearly
    from its first two nodes to ``u = 0``.
    """
    u = state.u
    x = state.grid.x
    idx = np.nonzero(u >= -tol)[0]
    if idx.size == 0:
        raise ValueError("empty zero set")
    j = idx[-1]
    if j + 2 >= u.size:
        raise ValueError("zero set reaches the grid edge")
    u1, u2 = u[j + 1], u[j + 2]
    edge = x[j + 1] - u1 * state.grid.dx / (u2 - u1)
    return float(min(max(edge, x[j]), x[j + 1]))


# ---------------------------------------------------------------------------
# small-step ladder against the limit equation
# ---------------------------------------------------------------------------

SME_LADDER = (0.4, 0.2, 0.1, 0.05)


def hj_reference(grid: Grid, hamiltonian: Hamiltonian, t_final, obstacle=False, refine=8):
    """``hj_solve`` from ``-A log(1+|x|)`` on a grid ``refine`` times finer,
    sampled back at the nodes of ``grid``.

    The monotone scheme smears the corner of the initial datum at ``x = 0``
    by ``O(dx)``; refining only the reference keeps that error below the
    ladder differences while the comparison stays node-by-node.
    """
    from .core import field_from_initial, make_grid

    fine = make_grid(grid.n_points * refine, grid.half_width, False)
    u0 = field_from_initial(fine, "log_tail_u", {"A": hamiltonian.A})
    dt = fine.dx / (2.0 * hamiltonian.dH_max)
    state = hj_solve(u0, hamiltonian, dt, t_final, obstacle=obstacle)[-1]
    return HJState(grid, state.u[::refine].copy(), state.time, obstacle)


def check_theorem_sme(alpha=1.0, epsilon_ladder=SME_LADDER, reaction_kind="nonlocal", windows=None,
                      A=0.5, t_final=1.0, half_width=40.0, cells_per_unit=32, r=1.0, I0=1.0,
                      dt_safety=0.9, refine=8, n_windows=None, snapshot_every=50,
                      grad_tol=0.01, support_radius=0.5) -> dict:
    """Small-step ladder from ``n_eps(x, 0) = (1+|x|)^{-A/eps}`` against the limit equation.

    ``reaction_kind = "nonlocal"`` uses ``R(I) = r (1 - I/I0)`` and compares
    with ``u_t = H(u_x)``; ``"kpp"`` uses ``1 - n`` and compares with the
    obstacle problem.  Reported per window and rung: ``sup |u_eps - u|``
    (ladder verdict: monotone non-increase), the discrete gradient at
    regularly spaced snapshots, ``max_x u_eps(., t_final)`` and, depending on
    the reaction, mass and support diagnostics or the ``n_eps -> 1`` and
    ``n_eps -> 0`` distances on the windows of ``n_windows``.

    Raises
    ------
    ConfigError
        If a window does not fit in the grid.
    """
    from .asymptotics import check_regularity, ladder_verdict
    from .core import LinearLogTail, MassState, Reaction, field_from_initial, make_grid
    from .dynamics import step_sme
    from .operators import jump_operator

    alpha = as_frac_order(alpha).alpha
    obstacle = reaction_kind == "kpp"
    if windows is None:
        windows = {"core": (0.0, 1.0), "near": (1.0, 2.0), "mid": (2.0, 3.0)} if not obstacle else \
            {"zero": (0.0, 2.0), "edge": (2.0, 3.0), "outside": (10.0, 14.0)}
    if n_windows is None and obstacle:
        n_windows = {"one": (0.0, 4.0), "zero": (9.0, 12.0)}
    grid = make_grid(int(round(2 * half_width * cells_per_unit)), half_width, False)
    for lo, hi in list(windows.values()) + list((n_windows or {}).values()):
        if hi > 0.5 * half_width:
            raise ConfigError(f"window up to {hi} does not fit in half the grid ({half_width})")
    kq = KernelQuadrature(alpha, A)
    H = Hamiltonian(alpha, A, kernel_quadrature=kq)
    ref = hj_reference(grid, H, t_final, obstacle, refine)
    reaction = Reaction(reaction_kind, r, I0)
    x = grid.x
    masks = {k: (np.abs(x) >= lo) & (np.abs(x) <= hi) for k, (lo, hi) in windows.items()}
    n_masks = {k: (np.abs(x) >= lo) & (np.abs(x) <= hi) for k, (lo, hi) in (n_windows or {}).items()}
    rungs = []
    for eps in epsilon_ladder:
        op = jump_operator(grid, eps, kq)
        n_steps = int(math.ceil(t_final / (dt_safety * op.max_stable_dt())))
        dt = t_final / n_steps
        ff = LinearLogTail(A, eps)
        f = field_from_initial(grid, "log_tail_n", {"A": A, "epsilon": eps, "alpha": alpha})
        I = float(np.trapezoid(f.values, dx=grid.dx)) + ff.tail_mass(f.values, grid)
        state = MassState(I)
        masses = [I]
        times = [0.0]
        record = {"clipped": 0}
        u_snaps = [Field(grid, eps * np.log(np.maximum(f.values, 1e-300)), 0.0)]
        for step in range(1, n_steps + 1):
            f, state = step_sme(f, state, dt, eps, reaction, kq, ff, record)
            times.append(f.time)
            masses.append(state.I)
            if step % snapshot_every == 0 or step == n_steps:
                u_snaps.append(Field(grid, eps * np.log(np.maximum(f.values, 1e-300)), f.time))
        u = u_snaps[-1].values
        reg = check_regularity(u_snaps, A, eps, min(masses[0], reaction.I_zero), tol=grad_tol,
                               max_tol=math.inf)
        rung = {"epsilon": eps, "dt": dt, "steps": n_steps, "clipped": record["clipped"],
                "sup_error": {k: float(np.max(np.abs(u - ref.u)[m])) for k, m in masks.items()},
                "max_u": float(np.max(u)),
                "max_grad": max(s["grad"] for s in reg["snapshots"]),
                "shift_excess": max(s["shift_excess"] for s in reg["snapshots"]),
                "final_mass": float(state.I)}
        if obstacle:
            rung["one_distance"] = {k: float(np.max(np.abs(f.values[m] - 1.0)))
                                    for k, m in n_masks.items() if k == "one"}
            rung["zero_distance"] = {k: float(np.max(np.abs(f.values[m])))
                                     for k, m in n_masks.items() if k != "one"}
        else:
            inside = np.abs(x) <= support_radius
            rung["mass_outside"] = float(1.0 - float(np.trapezoid(f.values * inside, dx=grid.dx)) / state.I)
            rung["mass_error"] = float(abs(state.I - reaction.I_zero))
        rungs.append(rung)
    report = {"alpha": alpha, "A": A, "t": t_final, "reaction": reaction_kind,
              "ladder": list(epsilon_ladder), "dx": grid.dx, "rungs": rungs, "windows": {}}
    for k in windows:
        v = ladder_verdict([rg["sup_error"][k] for rg in rungs])
        report["windows"][k] = {"range": list(windows[k]), **v}
    grad_ok = all(rg["max_grad"] <= A + grad_tol for rg in rungs)
    report["gradient_ok"] = grad_ok
    ok = all(w["monotone"] for w in report["windows"].values()) and grad_ok
    if obstacle:
        one = ladder_verdict([rg["one_distance"]["one"] for rg in rungs])
        zero = ladder_verdict([rg["zero_distance"]["zero"] for rg in rungs])
        report["n_to_one"] = one
        report["n_to_zero"] = zero
        ok = ok and one["pass"] and zero["pass"]
    else:
        umax = rungs[-1]["max_u"]
        report["max_u_finest"] = umax
        report["max_u_ok"] = bool(-0.05 <= umax <= 0.005)
        outside = [rg["mass_outside"] for rg in rungs]
        report["support_decreasing"] = bool(np.all(np.diff(outside) <= 0))
        ok = ok and report["max_u_ok"]
    report["pass"] = bool(ok)
    return report
