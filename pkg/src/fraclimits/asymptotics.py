"""From trajectories to limit statements.

The long-range scaling ``n_eps(x, t) = n(sgn(x) |x|^{1/eps}, t/eps)`` is
applied to snapshots of the unrescaled problem after the fact, and
``u_eps = eps log n_eps`` is compared with the explicit limits

    u(x, t) = min(0, t - (1+alpha) log|x|)     (logistic growth)
    u(x)    = min(0, -(1+alpha) log|x|)        (mass-regulated growth)

on compact windows kept away from the interface ``t = (1+alpha) log|x|``.
Convergence at desk scale means: errors do not increase along the
``eps`` ladder and the last rung at least halves the first.

Front tracking and the exponential-rate fit live here too, together with
the regularity checks that apply to small-step runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, Field, MassState, Reaction, as_frac_order, field_from_initial, make_grid, mass
from .dynamics import step_kpp, step_nonlocal
from .operators import cubic_weights

LADDER = (0.4, 0.2, 0.1, 0.05)
FLOOR = 1e-300


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def hopf_cole(field: Field, epsilon, floor=FLOOR, record=None) -> Field:
    """``u = eps log max(n, floor)``; values at or below the floor are counted.

    Raises
    ------
    ValueError
        If ``n`` has negative entries.
    """
    n = field.values
    if np.any(n < 0):
        raise ValueError("the Hopf-Cole transform needs a nonnegative field")
    hits = int(np.count_nonzero(n <= floor))
    if record is not None:
        record["floor_hits"] = record.get("floor_hits", 0) + hits
    return field.with_values(epsilon * np.log(np.maximum(n, floor)))


def inverse_hopf_cole(field: Field, epsilon) -> Field:
    return field.with_values(np.exp(field.values / epsilon))


def cubic_sample(field: Field, y):
    """Four-point Lagrange interpolation of a field at arbitrary positions.

    Periodic grids wrap; otherwise ``y`` must lie in ``[x_first, x_last]``
    and the stencil is shifted inward at the ends.
    """
    g = field.grid
    y = np.asarray(y, dtype=float)
    s = (y - g.x_first) / g.dx
    j = np.floor(s).astype(int)
    if g.periodic:
        tau = s - j
        idx = j[None, :] + np.arange(-1, 3)[:, None]
        vals = np.take(field.values, idx, mode="wrap")
    else:
        j = np.clip(j, 1, g.n_points - 3)
        tau = s - j
        idx = j[None, :] + np.arange(-1, 3)[:, None]
        vals = field.values[idx]
    return np.sum(cubic_weights(tau) * vals, axis=0)


def admissible_range(grid, epsilon, reach=1.0):
    """Largest ``|x|`` whose image ``|x|^{1/eps}`` stays within ``reach * L``."""
    return (reach * grid.half_width) ** epsilon


def long_range_rescale(source, epsilon, query_points, t=None, reach=1.0):
    """``n_eps(x, t) = n(sgn(x)|x|^{1/eps}, t/eps)`` by cubic interpolation.

    Parameters
    ----------
    source : Field or Trajectory
        A snapshot of the unrescaled problem, or a trajectory in which the
        snapshot at time ``t / eps`` is looked up.
    epsilon : float
    query_points : array_like
    t : float, optional
        Rescaled time; required when ``source`` is a trajectory.
    reach : float
        Fraction of the half-width the images may use.

    Raises
    ------
    ValueError
        If an image falls outside the admissible range, or no snapshot
        matches ``t / eps``.
    """
    if isinstance(source, Field):
        snap = source
    else:
        if t is None:
            raise ValueError("a rescaled time t is needed to pick a snapshot")
        target = t / epsilon
        times = np.asarray(source.times)
        k = int(np.argmin(np.abs(times - target)))
        if abs(times[k] - target) > 1e-9 * max(1.0, target):
            raise ValueError(f"no snapshot at unrescaled time {target}")
        snap = source.fields[k]
    x = np.asarray(query_points, dtype=float)
    y = np.sign(x) * np.abs(x) ** (1.0 / epsilon)
    limit = reach * snap.grid.half_width
    if np.any(np.abs(y) > limit) or np.any(y > snap.grid.x_last):
        raise ValueError(
            f"query maps outside the grid; admissible |x| <= {admissible_range(snap.grid, epsilon, reach):.6g}")
    return cubic_sample(snap, y)


# ---------------------------------------------------------------------------
# limit profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitProfile:
    """Closed-form limits; ``variant`` is ``kpp_limit`` or ``ri_limit``."""

    variant: str
    alpha: float

    def __post_init__(self):
        if self.variant not in ("kpp_limit", "ri_limit"):
            raise ConfigError(f"unknown limit variant {self.variant!r}")
        as_frac_order(self.alpha)

    def __call__(self, x, t=0.0):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            v = -(1.0 + self.alpha) * np.log(x)
        if self.variant == "kpp_limit":
            v = v + t
        return np.minimum(0.0, v)

    def zero_set_radius(self, t=0.0):
        """``|x|`` below which the limit vanishes."""
        return math.exp(t / (1.0 + self.alpha)) if self.variant == "kpp_limit" else 1.0


def log_bands(x, t, epsilon, alpha, delta, C_m, C_M):
    """Lower and upper bands on ``u_eps`` obtained by taking ``eps log`` of
    the two-sided bound ``C_m e^{-eps t - delta/eps} / D <= n_eps <= C_M e^{eps t} / D``
    with ``D = 1 + e^{-(t+delta)/eps} |x|^{(1+alpha)/eps}``.
    """
    x = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        z = ((1.0 + alpha) * np.log(x) - (t + delta)) / epsilon
    logD = epsilon * np.logaddexp(0.0, z)
    lower = -epsilon ** 2 * t + epsilon * math.log(C_m) - logD - delta
    upper = epsilon ** 2 * t + epsilon * math.log(C_M) - logD
    return lower, upper


# ---------------------------------------------------------------------------
# fronts
# ---------------------------------------------------------------------------

def front_position(field: Field, level=0.5) -> float:
    """Rightmost point where the piecewise-linear interpolant of ``n`` crosses ``level``.

    Raises
    ------
    ValueError
        If ``n`` never reaches ``level`` or is still above it at the right
        end of the grid (the front has left the domain).
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    v = field.values
    above = np.nonzero(v >= level)[0]
    if above.size == 0:
        raise ValueError("no crossing: the field never reaches the level")
    j = above[-1]
    if j == v.size - 1:
        raise ValueError("no crossing: the front has left the grid")
    x = field.grid.x
    return float(x[j] + (v[j] - level) / (v[j] - v[j + 1]) * field.grid.dx)


@dataclass
class FrontTrace:
    """Front positions ``x_f(t)`` at one level."""

    level: float
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if self.times.shape != self.positions.shape:
            raise ValueError("times and positions differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase")


def fit_exponential_rate(trace: FrontTrace, t_window) -> dict:
    """Least-squares slope of ``log x_f`` against ``t`` on ``t_window``.

    Returns
    -------
    dict
        ``sigma_hat``, ``intercept``, ``r_squared``, ``stderr`` and the
        number of points used.
    """
    t0, t1 = t_window
    m = (trace.times >= t0) & (trace.times <= t1)
    t = trace.times[m]
    x = trace.positions[m]
    if t.size < 10:
        raise ValueError(f"need at least 10 points in the window, got {t.size}")
    if np.any(x <= 0):
        raise ValueError("nonpositive front positions in the window")
    y = np.log(x)
    tc = t - t.mean()
    yc = y - y.mean()
    slope = float(np.dot(tc, yc) / np.dot(tc, tc))
    resid = yc - slope * tc
    ss_tot = float(np.dot(yc, yc))
    r2 = 1.0 - float(np.dot(resid, resid)) / ss_tot if ss_tot > 0 else 1.0
    dof = max(t.size - 2, 1)
    stderr = math.sqrt(float(np.dot(resid, resid)) / dof / float(np.dot(tc, tc)))
    return {"sigma_hat": slope, "intercept": float(y.mean() - slope * t.mean()),
            "r_squared": r2, "stderr": stderr, "n_points": int(t.size)}


def front_speed_study(alpha, levels=(0.5,), plateau=1.0e4, half_width=2.0 ** 21,
                      n_points=2 ** 18, dt=0.02, t_start=2.0, reach=0.25, t_max=80.0,
                      rel_tol=0.10):
    """Fisher-KPP front-speed experiment.

    The initial datum ``1 / (1 + |x/plateau|^{1+alpha})`` has the required
    power tail with ``C_M = plateau^{1+alpha}``; a wide plateau shortens the
    transient before the exponential regime.  Each level is traced until its
    front passes ``reach * L``, so periodic images stay negligible, and the
    run ends when every level has stopped.

    Returns
    -------
    dict
        Per level: the fit of :func:`fit_exponential_rate` on
        ``[t_start, T]`` plus ``target = 1/(1+alpha)`` and the relative error;
        a level passes when that error is within ``rel_tol`` and the fit has
        ``r^2 >= 0.99``.
    """
    alpha = as_frac_order(alpha).alpha
    grid = make_grid(n_points, half_width, True)
    f = field_from_initial(grid, "algebraic_tail_n", {"alpha": alpha, "scale": plateau})
    traces = {lv: ([], []) for lv in levels}
    record = {"clipped": 0}
    stop = reach * half_width
    active = set(levels)
    while active and f.time < t_max:
        f = step_kpp(f, dt, alpha, record)
        for lv in sorted(active):
            try:
                xf = front_position(f, lv)
            except ValueError:
                active.discard(lv)
                continue
            if xf > stop:
                active.discard(lv)
                continue
            traces[lv][0].append(f.time)
            traces[lv][1].append(xf)
    target = 1.0 / (1.0 + alpha)
    out = {"alpha": alpha, "target": target, "clipped": record["clipped"], "levels": {}}
    for lv in levels:
        tr = FrontTrace(lv, *traces[lv])
        fit = fit_exponential_rate(tr, (t_start, tr.times[-1]))
        fit["T"] = float(tr.times[-1])
        fit["relative_error"] = (fit["sigma_hat"] - target) / target
        fit["monotone"] = bool(np.all(np.diff(tr.positions) >= 0))
        fit["pass"] = bool(abs(fit["relative_error"]) <= rel_tol and fit["r_squared"] >= 0.99)
        out["levels"][lv] = fit
    out["pass"] = all(fit["pass"] for fit in out["levels"].values())
    return out


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------

def ladder_verdict(errors, rtol=1e-12) -> dict:
    """Monotone non-increase along the ladder and halving from first to last rung."""
    e = np.asarray(errors, dtype=float)
    monotone = bool(np.all(e[1:] <= e[:-1] * (1 + rtol) + 1e-15))
    halved = bool(e[-1] <= 0.5 * e[0])
    return {"errors": e.tolist(), "monotone": monotone, "halved": halved,
            "pass": monotone and halved}


def long_range_snapshots(alpha, t, ladder, problem="kpp", half_width=2.0 ** 18,
                         n_points=2 ** 20, dt=0.01, reaction=None):
    """Run the unrescaled problem once and keep the snapshots at ``t/eps``.

    Returns
    -------
    snaps : dict
        ``eps -> Field``.
    mass_series : (ndarray, ndarray)
        Unrescaled times and masses at every step.
    """
    grid = make_grid(n_points, half_width, True)
    f = field_from_initial(grid, "algebraic_tail_n", {"alpha": alpha})
    marks = {}
    for eps in ladder:
        k = int(round(t / eps / dt))
        if abs(k * dt - t / eps) > 1e-9:
            raise ConfigError(f"t/eps = {t / eps} is not a multiple of dt = {dt}")
        marks[k] = eps
    I = mass(f)
    state = MassState(I)
    times, masses = [0.0], [I]
    snaps = {}
    for step in range(1, max(marks) + 1):
        if problem == "kpp":
            f = step_kpp(f, dt, alpha)
            I = mass(f)
        else:
            f, state = step_nonlocal(f, state, dt, alpha, reaction)
            I = state.I
        times.append(f.time)
        masses.append(I)
        if step in marks:
            snaps[marks[step]] = f
    return snaps, (np.array(times), np.array(masses))


def _window_points(lo, hi, n=64):
    return np.linspace(lo, hi, n)


def _check_reach(grid, ladder, windows, reach):
    worst = max(hi for lo, hi in windows)
    for eps in ladder:
        if worst ** (1.0 / eps) > reach * grid.half_width:
            raise ConfigError(
                f"domain too small: |x| = {worst} maps to {worst ** (1 / eps):.4g} at eps = {eps}; "
                f"admissible |x| <= {admissible_range(grid, eps, reach):.4g}")


def check_theorem_kpp(alpha=1.5, epsilon_ladder=LADDER, t=0.25, margin_A=1.0, margin_B=0.25,
                      width_A=1.02, half_width=2.0 ** 18, n_points=2 ** 20, dt=0.0125, reach=0.25,
                      sandwich_delta=0.25, C_m=0.99, C_M=1.01) -> dict:
    """Ladder check of the long-range limit with logistic growth.

    The B window is ``|x| <= exp((t - margin_B)/(1+alpha))`` and the A window
    ``[a, width_A a]`` with ``a = exp((t + margin_A)/(1+alpha))``.  Reported
    per window: sup of ``|u_eps - u|``, and ``sup |n_eps - 1|`` on B or
    ``sup n_eps`` on A, each with a ladder verdict.  The band check reports,
    per rung, whether ``u_eps`` lies between the bands of :func:`log_bands`
    on both windows.
    """
    alpha = as_frac_order(alpha).alpha
    a1 = 1.0 + alpha
    xb = math.exp((t - margin_B) / a1)
    xa = math.exp((t + margin_A) / a1)
    windows = {"B": (0.0, xb), "A": (xa, width_A * xa)}
    grid = make_grid(n_points, half_width, True)
    _check_reach(grid, epsilon_ladder, windows.values(), reach)
    snaps, _ = long_range_snapshots(alpha, t, epsilon_ladder, "kpp", half_width, n_points, dt)
    limit = LimitProfile("kpp_limit", alpha)
    report = {"alpha": alpha, "t": t, "ladder": list(epsilon_ladder), "windows": {}, "bands": {}}
    for name, (lo, hi) in windows.items():
        z = _window_points(lo, hi)
        u_err, n_err, inside = [], [], []
        for eps in epsilon_ladder:
            n = long_range_rescale(snaps[eps], eps, z, reach=reach)
            u = eps * np.log(np.maximum(n, FLOOR))
            u_err.append(float(np.max(np.abs(u - limit(z, t)))))
            n_err.append(float(np.max(np.abs(n - 1.0)) if name == "B" else np.max(np.abs(n))))
            lower, upper = log_bands(z, t, eps, alpha, sandwich_delta, C_m, C_M)
            inside.append(bool(np.all((u >= lower - 1e-12) & (u <= upper + 1e-12))))
        report["windows"][name] = {"range": [lo, hi], "u": ladder_verdict(u_err),
                                   "n": ladder_verdict(n_err)}
        report["bands"][name] = inside
    # smallest rung from which the bands hold for every smaller rung
    ok = [all(report["bands"][w][i] for w in windows) for i in range(len(epsilon_ladder))]
    eps0 = None
    for i in range(len(ok) - 1, -1, -1):
        if not ok[i]:
            break
        eps0 = epsilon_ladder[i]
    report["band_eps0"] = eps0
    report["pass"] = all(w["u"]["pass"] and w["n"]["pass"] for w in report["windows"].values())
    return report


def ladder_table(report) -> dict:
    """Long-format columns ``epsilon, window, error`` of a ladder report.

    Accepts the reports of :func:`check_theorem_kpp`, :func:`check_theorem_ri`
    and ``check_theorem_sme``; the ``u`` sup-errors are listed per window.
    """
    eps, names, errs = [], [], []
    for name, w in report["windows"].items():
        values = w["u"]["errors"] if "u" in w else w["errors"]
        for e, v in zip(report["ladder"], values):
            eps.append(float(e))
            names.append(name)
            errs.append(float(v))
    return {"epsilon": eps, "window": names, "error": errs}


def mass_decay_check(times, masses, reaction: Reaction, epsilon=1.0, factor=1.1, floor=1e-12):
    """``|I(t) - I_0| <= factor |I(0) - I_0| exp(-C2 I_m t / eps) + floor I_0``.

    ``I_m = min(I(0), I_0)`` and ``C2`` is the slope of ``R``.  The absolute
    floor absorbs roundoff once the deviation reaches machine precision.
    """
    I0 = reaction.I_zero
    Im = min(masses[0], I0)
    bound = factor * abs(masses[0] - I0) * np.exp(-reaction.slope * Im * np.asarray(times) / epsilon)
    dev = np.abs(np.asarray(masses) - I0)
    ratio = dev / (bound + floor * I0)
    return {"max_ratio": float(ratio.max()), "pass": bool(np.all(dev <= bound + floor * I0)),
            "I_m": float(Im), "C2": reaction.slope}


def check_theorem_ri(alpha=1.5, epsilon_ladder=LADDER, t=0.25, windows=None, r=2.0,
                     half_width=2.0 ** 16, n_points=2 ** 18, dt=0.0125, reach=0.25,
                     support_deltas=(0.1, 0.25)) -> dict:
    """Ladder check of the long-range limit with mass-regulated growth.

    ``R(I) = r - I`` (so ``I_0 = r`` and ``C2 = 1``).  Default windows are
    ``|x| <= 0.9`` (where the limit is 0) and ``1.4 <= |x| <= 1.6``.  Also
    reported: the mass-decay inequality on the unrescaled mass series and the
    fraction of rescaled mass outside ``[-1-delta, 1+delta]``.
    """
    alpha = as_frac_order(alpha).alpha
    if windows is None:
        windows = {"inner": (0.0, 0.9), "outer": (1.4, 1.6)}
    reaction = Reaction("nonlocal", r)
    grid = make_grid(n_points, half_width, True)
    _check_reach(grid, epsilon_ladder, windows.values(), reach)
    snaps, (times, masses) = long_range_snapshots(alpha, t, epsilon_ladder, "nonlocal",
                                                   half_width, n_points, dt, reaction)
    limit = LimitProfile("ri_limit", alpha)
    report = {"alpha": alpha, "t": t, "ladder": list(epsilon_ladder), "windows": {}}
    for name, (lo, hi) in windows.items():
        z = _window_points(lo, hi)
        errs = []
        for eps in epsilon_ladder:
            n = long_range_rescale(snaps[eps], eps, z, reach=reach)
            errs.append(float(np.max(np.abs(eps * np.log(np.maximum(n, FLOOR)) - limit(z)))))
        report["windows"][name] = {"range": [lo, hi], "u": ladder_verdict(errs)}
    support = {}
    for delta in support_deltas:
        fractions = []
        for eps in epsilon_ladder:
            zmax = 0.999 * admissible_range(grid, eps, reach)
            z = np.linspace(-zmax, zmax, 20001)
            dens = long_range_rescale(snaps[eps], eps, z, reach=reach)
            total = np.trapezoid(dens, z)
            fractions.append(float(np.trapezoid(dens * (np.abs(z) > 1 + delta), z) / total))
        support[delta] = {"fractions": fractions,
                          "decreasing": bool(np.all(np.diff(fractions) <= 1e-15))}
    report["support"] = support
    report["mass"] = mass_decay_check(times, masses, reaction)
    report["pass"] = (all(w["u"]["pass"] for w in report["windows"].values())
                      and report["mass"]["pass"]
                      and all(s["decreasing"] for s in support.values()))
    return report


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------

def shift_violation(u, dx, A, max_shift=None):
    """Largest ``u(x+h) - u(x) - A log(1+|h|)`` over lattice shifts ``h = m dx``.

    Shifts up to 64 cells are all tested; beyond that a log-spaced subset
    up to ``max_shift`` cells.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    top = n - 1 if max_shift is None else min(int(max_shift), n - 1)
    shifts = np.unique(np.concatenate([np.arange(1, min(64, top) + 1),
                                       np.geomspace(64, max(top, 64), 64).astype(int)]))
    shifts = shifts[(shifts >= 1) & (shifts <= top)]
    worst = -np.inf
    for m in shifts:
        bound = A * math.log1p(m * dx)
        d = u[m:] - u[:-m]
        worst = max(worst, float(np.max(np.abs(d))) - bound)
    return worst


def check_regularity(trajectory_u, A, epsilon=None, I_m=None, tol=1e-9, max_tol=0.005) -> dict:
    """Regularity inequalities on every snapshot of ``u_eps``.

    Parameters
    ----------
    trajectory_u : sequence of Field
        Snapshots of ``u_eps`` (the initial one included if wanted).
    A : float
        Tail constant of the initial data.
    epsilon, I_m : float, optional
        When both are given, the constant ``A_2`` of the lower bound
        ``eps log(I_m / (4 A_2)) <= max u`` is fitted as the smallest value
        that makes the bound hold at every snapshot.
    tol : float
        Slack of the shift and gradient inequalities.
    max_tol : float
        Slack of the upper bound ``max u <= 0``.

    Returns
    -------
    dict
        Per-snapshot diagnostics and the list of failed inequalities.
    """
    rows, failures = [], []
    A2 = 0.0
    for f in trajectory_u:
        u = f.values
        dx = f.grid.dx
        grad = float(np.max(np.abs(np.diff(u))) / dx)
        shift = shift_violation(u, dx, A)
        umax = float(np.max(u))
        rows.append({"t": f.time, "grad": grad, "shift_excess": shift, "max_u": umax})
        if grad > A + tol:
            failures.append(f"gradient {grad:.6g} > A at t = {f.time:.6g}")
        if shift > tol:
            failures.append(f"shift inequality violated by {shift:.3g} at t = {f.time:.6g}")
        if umax > max_tol:
            failures.append(f"max u = {umax:.6g} > 0 at t = {f.time:.6g}")
        if epsilon is not None and I_m is not None:
            A2 = max(A2, I_m / 4.0 * math.exp(-umax / epsilon))
    out = {"snapshots": rows, "failures": failures, "pass": not failures}
    if epsilon is not None and I_m is not None:
        out["A2_fitted"] = A2
    return out


def integrated_growth(times, masses, reaction: Reaction, epsilon):
    """``int_0^t R(I(s)) ds / eps`` along a mass series; its range gives ``C3``, ``C4``."""
    R = reaction.R(np.asarray(masses))
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (R[1:] + R[:-1]) * np.diff(times))])
    return integral / epsilon


__all__ = [
    "LADDER", "hopf_cole", "inverse_hopf_cole", "cubic_sample", "long_range_rescale",
    "LimitProfile", "log_bands", "front_position", "FrontTrace", "fit_exponential_rate",
    "front_speed_study", "ladder_verdict", "long_range_snapshots", "check_theorem_kpp",
    "check_theorem_ri", "mass_decay_check", "shift_violation", "check_regularity",
    "integrated_growth", "admissible_range",
]
