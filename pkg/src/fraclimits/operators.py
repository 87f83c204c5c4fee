"""Nonlocal spatial operators.

Two independent evaluators of the fractional Laplacian

    (-Delta)^{alpha/2} n(x) = -int_0^inf [n(x+h) + n(x-h) - 2 n(x)] h^{-1-alpha} dh

are provided: a Fourier one for periodic grids (:func:`frac_laplacian_spectral`)
and a real-space singular quadrature (:func:`frac_laplacian_quadrature`) that
also works with far-field continuation.  :func:`sme_jump_operator` evaluates
the small-step jump operator

    J_eps n(x) = int_0^inf [n(x + e^{eps k} - 1) + n(x - e^{eps k} + 1) - 2 n(x)] w(k) dk

with ``w(k) = e^k / (e^k - 1)^(1+alpha)`` from a :class:`KernelQuadrature`.

Both quadrature evaluators reduce to fixed convolution stencils because the
grid is uniform; stencils are cached per grid and parameters.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from .core import (AlgebraicTail, ConfigError, FarField, Field, FracOrder, Grid, NumericalAbort,
                   as_frac_order, padded_values)
from .kernels import KernelQuadrature, gauss_legendre_panels, jump_kernel

# centred finite-difference weights (offsets -4..4)
_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
_D4 = np.array([0.0, -1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6, 0.0])
_D6 = np.array([0.0, 1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0, 0.0])


def lagrange_weights(tau, n_nodes):
    """Lagrange weights of the nodes ``-(n/2-1), ..., n/2`` at ``tau`` in ``[0, 1]``.

    ``n_nodes`` is even; returns an array of shape ``(n_nodes,) + tau.shape``.
    """
    t = np.asarray(tau, dtype=float)
    nodes = np.arange(-(n_nodes // 2 - 1), n_nodes // 2 + 1)
    out = []
    for i, xi in enumerate(nodes):
        w = np.ones_like(t)
        for xm in np.delete(nodes, i):
            w = w * (t - xm) / (xi - xm)
        out.append(w)
    return np.stack(out)


def cubic_weights(tau):
    """Lagrange weights of the nodes ``-1, 0, 1, 2`` at ``tau`` in ``[0, 1]``.

    Returns an array of shape ``(4,) + tau.shape``.
    """
    t = np.asarray(tau, dtype=float)
    return np.stack([
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ])


# ---------------------------------------------------------------------------
# spectral evaluator
# ---------------------------------------------------------------------------

class SpectralPlan:
    """Symbol table ``c_alpha |xi_j|^alpha`` on a periodic grid.

    ``c_alpha`` is :attr:`FracOrder.symbol_constant`, the factor relating the
    bare singular integral to the Fourier multiplier ``|xi|^alpha``.
    """

    def __init__(self, grid: Grid, frac_order):
        if not grid.periodic:
            raise ConfigError("the spectral evaluator needs a periodic grid")
        self.grid = grid
        self.frac_order = as_frac_order(frac_order)
        self.xi = 2.0 * math.pi * np.fft.rfftfreq(grid.n_points, d=grid.dx)
        self.symbol = self.frac_order.symbol_constant * np.abs(self.xi) ** self.frac_order.alpha
        self.symbol[0] = 0.0

    def apply(self, values):
        return np.fft.irfft(self.symbol * np.fft.rfft(values), n=self.grid.n_points)

    def heat_multiplier(self, dt):
        return np.exp(-self.symbol * dt)

    @property
    def symbol_max(self) -> float:
        return float(self.symbol.max())


@lru_cache(maxsize=32)
def spectral_plan(grid: Grid, alpha: float) -> SpectralPlan:
    return SpectralPlan(grid, FracOrder(alpha))


def frac_laplacian_spectral(field: Field, frac_order) -> Field:
    """``(-Delta)^{alpha/2} n`` by forward transform, symbol multiply and inverse."""
    if not field.grid.periodic:
        raise ConfigError("frac_laplacian_spectral needs a periodic grid")
    alpha = as_frac_order(frac_order).alpha
    plan = spectral_plan(field.grid, alpha)
    spec = plan.symbol * np.fft.rfft(field.values)
    # the real transform pair leaves no imaginary residue; the full complex
    # inverse is used only to verify that claim
    full = np.fft.ifft(np.concatenate([spec, np.conj(spec[-2:0:-1])]))
    if np.max(np.abs(full.imag)) > 1e-10 * max(1.0, np.max(np.abs(full.real))):
        raise ArithmeticError("imaginary residue in spectral evaluation")
    return field.with_values(np.fft.irfft(spec, n=field.grid.n_points))


# ---------------------------------------------------------------------------
# real-space singular quadrature in h
# ---------------------------------------------------------------------------

def periodic_kernel(h, alpha, period):
    """``sum_m |h + m P|^{-1-alpha}`` for ``0 < h <= P/2`` via Hurwitz zeta."""
    h = np.asarray(h, dtype=float)
    s = 1.0 + alpha
    return h ** -s + period ** -s * (zeta(s, 1.0 + h / period) + zeta(s, 1.0 - h / period))


class SingularQuadrature:
    """Split quadrature of the fractional Laplacian in the jump length ``h``.

    On ``[0, delta]`` the bracket ``n(x+h)+n(x-h)-2n(x)`` is replaced by its
    even Taylor series through sixth order, with derivatives from centred
    differences.  Beyond ``delta`` the field is the piecewise-cubic Lagrange
    interpolant of its samples and is integrated exactly against the kernel
    cell by cell (product integration), which turns the outer integral into a
    fixed stencil.  Non-periodic grids add the integral of the far-field
    continuation beyond the last sample.

    Parameters
    ----------
    grid : Grid
    frac_order : FracOrder or float
    delta_cells : int
        Inner split ``delta = delta_cells * dx``; must be at least 4.
    n_gauss : int
        Gauss-Legendre nodes per cell for the kernel moments.
    """

    def __init__(self, grid: Grid, frac_order, delta_cells=4, n_gauss=16):
        if delta_cells < 4:
            raise ConfigError("the inner split must cover at least 4 grid cells (delta >= 4 dx)")
        self.grid = grid
        self.alpha = as_frac_order(frac_order).alpha
        self.delta_cells = int(delta_cells)
        dx = grid.dx
        a = self.alpha
        self.delta = self.delta_cells * dx
        N = grid.n_points
        m_end = N // 2 if grid.periodic else N
        m = np.arange(self.delta_cells, m_end)
        t, wt = np.polynomial.legendre.leggauss(n_gauss)
        tau = 0.5 * (t + 1.0)
        wt = 0.5 * wt
        h = (m[:, None] + tau[None, :]) * dx
        if grid.periodic:
            K = periodic_kernel(h, a, 2.0 * grid.half_width)
        else:
            K = h ** (-1.0 - a)
        lag = cubic_weights(tau)  # (4, n_gauss)
        # moments[c, a] = int_cell ell_a K dh
        self.moments = np.einsum("cg,ag,g->ca", K, lag, wt) * dx
        self.m_first = self.delta_cells
        # per-offset stencil: offset d = m + a_off, a_off in (-1, 0, 1, 2)
        n_off = m_end + 3
        self.stencil = np.zeros(n_off)
        for col, off in enumerate((-1, 0, 1, 2)):
            np.add.at(self.stencil, m + off, self.moments[:, col])
        # inner Taylor moments int_0^delta h^{2j} K dh
        d = self.delta
        mu = np.array([d ** (2 * j - a) / (2 * j - a) for j in (1, 2, 3)])
        if grid.periodic:
            P = 2.0 * grid.half_width
            tt, ww = np.polynomial.legendre.leggauss(24)
            hh = 0.5 * d * (tt + 1.0)
            corr = periodic_kernel(hh, a, P) - hh ** (-1.0 - a)
            mu = mu + np.array([np.sum(0.5 * d * ww * hh ** (2 * j) * corr) for j in (1, 2, 3)])
        self.mu = mu
        self._taylor = (mu[0] * _D2 / dx ** 2 + mu[1] / 12.0 * _D4 / dx ** 4
                        + mu[2] / 360.0 * _D6 / dx ** 6)

    def bracket_integral(self, values, far_field=None, indices=None):
        """``int_0^inf [n(x+h)+n(x-h)-2n(x)] h^{-1-alpha} dh`` at grid indices."""
        grid = self.grid
        N = grid.n_points
        idx = np.arange(N) if indices is None else np.atleast_1d(np.asarray(indices, dtype=int))
        if np.any(idx < 0) or np.any(idx >= N):
            raise IndexError("x_index outside the grid")
        pad = 4
        ext = padded_values(values, grid, far_field, pad)
        if not np.all(np.isfinite(ext)):
            raise ArithmeticError("non-finite samples in quadrature window")
        out = np.empty(idx.size)
        offs = np.arange(-4, 5)
        for n_out, j in enumerate(idx):
            jj = j + pad
            inner = float(np.dot(self._taylor, ext[jj + offs]))
            if grid.periodic:
                d = np.arange(self.stencil.size)
                right = np.take(values, j + d, mode="wrap")
                left = np.take(values, j - d, mode="wrap")
                outer = float(np.dot(self.stencil, right + left - 2.0 * values[j]))
                out[n_out] = inner + outer
                continue
            outer = 0.0
            for side in (+1, -1):
                # cells fully inside the sampled range on this side
                n_cells = (N - 1 - j) if side > 0 else j
                mm = np.arange(self.m_first, n_cells)
                if mm.size:
                    mom = self.moments[mm - self.m_first]
                    samples = np.stack([ext[jj + side * (mm + off)] for off in (-1, 0, 1, 2)], axis=1)
                    outer += float(np.sum(mom * (samples - values[j])))
                H = max(n_cells, self.m_first) * grid.dx
                outer += self._tail(values, far_field, grid.x[j], side, H)
            out[n_out] = inner + outer
        return out

    def _tail(self, values, far_field, x, side, H):
        a = self.alpha
        grid = self.grid

        def f(v):
            h = H * v ** (-1.0 / a)
            y = np.array([x + side * h])
            return far_field.extend(values, grid, y)[0]

        val, _ = quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
        return (val - values[grid.index_of(x)]) / (a * H ** a)


@lru_cache(maxsize=32)
def singular_quadrature(grid: Grid, alpha: float, delta_cells: int = 4) -> SingularQuadrature:
    return SingularQuadrature(grid, FracOrder(alpha), delta_cells)


def frac_laplacian_quadrature(field: Field, frac_order, x_index, far_field=None,
                              delta_cells=4):
    """``(-Delta)^{alpha/2} n`` at ``x_index`` (int or array) by split quadrature.

    Parameters
    ----------
    field : Field
    frac_order : FracOrder or float
    x_index : int or array of int
    far_field : FarField, optional
        Continuation beyond the grid; required on non-periodic grids and
        defaulting to the ``|x|^{-1-alpha}`` power law.
    delta_cells : int
        Inner split in cells (``delta = delta_cells * dx >= 4 dx``).

    Returns
    -------
    float or ndarray
    """
    alpha = as_frac_order(frac_order).alpha
    if delta_cells < 4:
        raise ConfigError("delta < 4 dx: grid too coarse for the inner Taylor piece")
    if not field.grid.periodic and far_field is None:
        far_field = AlgebraicTail(1.0 + alpha)
    sq = singular_quadrature(field.grid, alpha, int(delta_cells))
    res = -sq.bracket_integral(field.values, far_field, x_index)
    return float(res[0]) if np.ndim(x_index) == 0 else res


# ---------------------------------------------------------------------------
# small-step jump operator in k
# ---------------------------------------------------------------------------

class JumpOperator:
    """Stencil form of the jump operator ``J_eps`` on a non-periodic grid.

    Jumps ``s = e^{eps k} - 1`` that keep ``x +- s`` within reach of the
    padded lattice are sampled by Lagrange interpolation (six nodes by
    default); their weights are aggregated once into a symmetric convolution
    stencil.  In that range the outer ``k`` panels are cut where ``s``
    crosses a lattice cell, so each Gauss-Legendre panel sees a single
    polynomial piece.  Longer jumps land in the far field on both sides and
    are evaluated from the continuation directly.  Jumps with ``k < delta``
    use the second-order Taylor form ``n''(x) int_0^delta s(k)^2 w(k) dk``
    with a fourth-order centred second difference.

    Parameters
    ----------
    grid : Grid
        Non-periodic grid.
    epsilon : float
    kq : KernelQuadrature
        Supplies ``alpha``, ``delta``, ``k_max`` and the inner rule.
    n_gauss : int
        Gauss-Legendre nodes per outer panel.
    interp_nodes : int
        Even number of interpolation nodes (4 gives cubic interpolation).
    """

    def __init__(self, grid: Grid, epsilon: float, kq: KernelQuadrature, n_gauss=6,
                 interp_nodes=6):
        if grid.periodic:
            raise ConfigError("the jump operator works on non-periodic grids with a far field")
        if not epsilon > 0:
            raise ConfigError("epsilon must be positive")
        self.grid = grid
        self.epsilon = float(epsilon)
        self.kq = kq
        a, eps, dx = kq.alpha, self.epsilon, grid.dx
        k_in, w_in = kq.inner
        self.inner_moment = float(np.dot(w_in, np.expm1(eps * k_in) ** 2))
        reach = 2.0 * grid.half_width + 2.0 * dx      # beyond this both ends are exterior
        k_reach = min(kq.k_max, math.log1p(reach) / eps)
        s_delta = math.expm1(eps * kq.delta)
        m_lo = int(math.floor(s_delta / dx)) + 1
        m_hi = int(math.floor(math.expm1(eps * k_reach) / dx))
        cuts = np.log1p(dx * np.arange(m_lo, m_hi + 1)) / eps
        geo = kq.outer_edges[kq.outer_edges < k_reach]
        edges = np.unique(np.concatenate([[kq.delta, k_reach], cuts, geo]))
        edges = edges[(edges >= kq.delta) & (edges <= k_reach)]
        k, g = gauss_legendre_panels(edges, int(n_gauss))
        W = g * jump_kernel(k, a)
        s = np.expm1(eps * k) / dx
        q = np.floor(s).astype(int)
        lag = lagrange_weights(s - q, interp_nodes)
        offsets = np.arange(-(interp_nodes // 2 - 1), interp_nodes // 2 + 1)
        D = (int(q.max()) if q.size else 0) + interp_nodes
        c = np.zeros(2 * D + 1)
        for col, off in enumerate(offsets):
            np.add.at(c, D + q + off, W * lag[col])
            np.add.at(c, D - q - off, W * lag[col])
        c[D] -= c.sum()
        # inner Taylor piece
        c[D - 2:D + 3] += self.inner_moment * np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]) / dx ** 2
        self.stencil = c
        self.reach_cells = D
        # far jumps: both targets are outside the grid
        if k_reach < kq.k_max:
            far_edges = np.append(np.arange(k_reach, kq.k_max, 0.25), kq.k_max)
            kf, gf = gauss_legendre_panels(far_edges, 8)
            self.far_shift = np.expm1(eps * kf)
            self.far_weight = gf * jump_kernel(kf, a)
        else:
            self.far_shift = np.zeros(0)
            self.far_weight = np.zeros(0)
        self.far_mass = float(self.far_weight.sum())
        self.n_nodes = int(k.size + kq.n_inner + self.far_shift.size)

    @property
    def row_bound(self) -> float:
        """Absolute row sum, a bound on the spectral radius of the stencil."""
        return float(np.abs(self.stencil).sum() + 2.0 * self.far_mass)

    def kernel_mass(self) -> float:
        """Dimensionless stencil mass ``dx^alpha * row_bound / 2``."""
        return self.grid.dx ** self.kq.alpha * self.row_bound / 2.0

    def max_stable_dt(self) -> float:
        """``eps dx^alpha / (4 kernel_mass)``."""
        return self.epsilon * self.grid.dx ** self.kq.alpha / (4.0 * self.kernel_mass())

    def apply(self, values, far_field: FarField):
        values = np.asarray(values, dtype=float)
        ext = padded_values(values, self.grid, far_field, self.reach_cells)
        if not np.all(np.isfinite(ext)):
            raise ArithmeticError("NaN or inf in the interpolation window")
        out = np.convolve(ext, self.stencil, mode="valid")
        if self.far_shift.size:
            out += (far_field.jump_sum(values, self.grid, self.far_shift, self.far_weight)
                    - 2.0 * self.far_mass * values)
        return out


_JUMP_CACHE: dict = {}


def jump_operator(grid: Grid, epsilon: float, kq: KernelQuadrature) -> JumpOperator:
    key = (grid, float(epsilon), kq.alpha, kq.A, kq.delta, kq.level, kq.tol)
    op = _JUMP_CACHE.get(key)
    if op is None:
        if len(_JUMP_CACHE) > 16:
            _JUMP_CACHE.clear()
        op = _JUMP_CACHE[key] = JumpOperator(grid, epsilon, kq)
    return op


def sme_jump_operator(field: Field, epsilon: float, kernel_quadrature: KernelQuadrature,
                      far_field: FarField | None = None) -> Field:
    """Apply ``J_eps`` to a field on a non-periodic grid.

    ``far_field`` defaults to the power law ``|x|^{-1-alpha}``.
    """
    if far_field is None:
        far_field = AlgebraicTail(1.0 + kernel_quadrature.alpha)
    op = jump_operator(field.grid, epsilon, kernel_quadrature)
    return field.with_values(op.apply(field.values, far_field))


# ---------------------------------------------------------------------------
# bound |(-Delta)^{alpha/2} g| <= C g for g = 1/(1 + |x|^{1+alpha})
# ---------------------------------------------------------------------------

LEMMA_PROBES = (0.0, 1.0, 10.0, 100.0, 1000.0, 1e4)
LEMMA_PROBES_2D = (0.0, 1.0, 10.0, 100.0, 1000.0)


def lemma_g(x, alpha):
    """The profile ``g(x) = 1 / (1 + |x|^{1+alpha})`` (radial in any dimension)."""
    return 1.0 / (1.0 + np.abs(x) ** (1.0 + alpha))


def _lemma_g_derivatives(r, alpha):
    """First and second radial derivatives of ``g`` at ``r > 0``."""
    beta = 1.0 + alpha
    q = 1.0 + r ** beta
    d1 = -beta * r ** (beta - 1.0) / q ** 2
    d2 = -beta * (beta - 1.0) * r ** (beta - 2.0) / q ** 2 + 2.0 * beta ** 2 * r ** (2 * beta - 2.0) / q ** 3
    return d1, d2


def lemma_g_at_zero(alpha, dim=1):
    """Exact ``(-Delta)^{alpha/2} g(0)`` for the unnormalized operator.

    At the origin the bracket integrates to ``2 int_0^inf dh / (1 + h^beta)``
    with ``beta = 1 + alpha``; the 2-D spherical form multiplies the 1-D
    value by ``pi``.
    """
    beta = 1.0 + alpha
    one_d = 2.0 * (math.pi / beta) / math.sin(math.pi / beta)
    return one_d if dim == 1 else math.pi * one_d


def _g_difference(a, r, alpha):
    """``g(a) - g(r)`` as ``(|r|^beta - |a|^beta) g(a) g(r)``, which avoids
    the cancellation of ``g(a) - 1`` near the origin."""
    beta = 1.0 + alpha
    return (abs(r) ** beta - np.abs(a) ** beta) * lemma_g(a, alpha) * lemma_g(r, alpha)


def _radial_edges(r, h0, h_max, depth=40):
    """Panel edges in ``h`` graded toward 0 and toward the kink at ``h = r``."""
    edges = [h0 * 2.0 ** k for k in range(int(math.log2(h_max / h0)) + 1)]
    if r > 0:
        edges += [r * (1.0 - 2.0 ** -k) for k in range(1, depth)]
        edges += [r * (1.0 + 2.0 ** -k) for k in range(0, depth)]
    edges = np.unique(np.clip(np.asarray(edges + [h0, h_max]), h0, h_max))
    return edges


def _lemma_operator_1d(x, alpha, level):
    r = abs(float(x))
    n_gauss = 8 * level
    if r == 0.0:
        h0 = 0.0
        inner = 0.0
        edges = _radial_edges(0.0, 1e-12, 1e8)
        edges[0] = 0.0
    else:
        h0 = 1e-3 * min(r, 1.0)
        _, d2 = _lemma_g_derivatives(r, alpha)
        # bracket ~ g''(x) h^2 below h0
        inner = d2 * h0 ** (2.0 - alpha) / (2.0 - alpha)
        edges = _radial_edges(r, h0, 1e8 * max(1.0, r))
    h, w = gauss_legendre_panels(edges, n_gauss)
    gx = lemma_g(r, alpha)
    bracket = _g_difference(r + h, r, alpha) + _g_difference(r - h, r, alpha)
    outer = float(np.dot(w, bracket * h ** (-1.0 - alpha)))
    H = edges[-1]
    tail = -2.0 * gx * H ** -alpha / alpha + 2.0 * H ** (-1.0 - 2.0 * alpha) / (1.0 + 2.0 * alpha)
    return -(inner + outer + tail)


def _lemma_operator_2d(x, alpha, level, base_angles=32):
    r = abs(float(x))
    n_gauss = 8 * level
    if r == 0.0:
        inner = 0.0
        edges = _radial_edges(0.0, 1e-12, 1e8)
        edges[0] = 0.0
    else:
        h0 = 1e-3 * min(r, 1.0)
        d1, d2 = _lemma_g_derivatives(r, alpha)
        # circle average of g(x + h nu) - g(x) ~ (h^2 / 4) Laplacian g
        inner = 2.0 * math.pi * 0.25 * (d2 + d1 / r) * h0 ** (2.0 - alpha) / (2.0 - alpha)
        # the circle average is smoother than the 1-D bracket at h = r, so
        # grading toward the kink stops at distance about 1e-3
        depth = int(math.ceil(math.log2(max(r, 1.0) / 1e-3)))
        edges = _radial_edges(r, h0, 1e8 * max(1.0, r), depth=depth)
    h, w = gauss_legendre_panels(edges, n_gauss)
    gx = lemma_g(r, alpha)
    circle = np.empty_like(h)
    for i, hi in enumerate(h):
        # angular scale of g(x + h nu) is about max(1, |h - r|) / h
        m = base_angles * level * max(1, int(math.ceil(2.0 * math.pi * hi / max(1.0, abs(hi - r)))))
        theta = 2.0 * math.pi * np.arange(m) / m
        dist = np.hypot(r + hi * np.cos(theta), hi * np.sin(theta))
        circle[i] = 2.0 * math.pi * float(np.mean(_g_difference(dist, r, alpha)))
    outer = float(np.dot(w, circle * h ** (-1.0 - alpha)))
    H = edges[-1]
    tail = 2.0 * math.pi * (H ** (-1.0 - 2.0 * alpha) / (1.0 + 2.0 * alpha) - gx * H ** -alpha / alpha)
    return -(inner + outer + tail)


def _lemma_report(evaluate, alpha, probe_points, level, stability_tol, trend_tol):
    probes = np.abs(np.asarray(probe_points, dtype=float))
    if probes.size == 0:
        raise ConfigError("lemma check needs at least one probe point")

    def ratios_at(lev):
        out = np.empty(probes.size)
        for i, x in enumerate(probes):
            value = evaluate(x, alpha, lev)
            if not np.isfinite(value):
                raise NumericalAbort(f"lemma quadrature failed at |x| = {x}")
            out[i] = abs(value) / lemma_g(x, alpha)
        return out

    ratios = ratios_at(level)
    refined = ratios_at(2 * level)
    c_hat = float(np.max(refined))
    # ratios may pass through zero, so changes are measured against C_hat
    change = float(np.max(np.abs(refined - ratios)) / c_hat)
    far = probes >= 10.0
    local_slopes = []
    if np.count_nonzero(far) >= 2:
        xs, ys = np.log(probes[far]), np.log(refined[far])
        local_slopes = (np.diff(ys) / np.diff(xs)).tolist()
    # a bounded ratio may still approach its limit from below; growth means
    # the slope over the last decade stays positive
    slope = float(local_slopes[-1]) if local_slopes else 0.0
    stable = change <= stability_tol
    no_growth = slope <= trend_tol
    return {
        "alpha": float(alpha),
        "probes": probes.tolist(),
        "ratios": refined.tolist(),
        "ratios_coarse": ratios.tolist(),
        "C_hat": c_hat,
        "refinement_change": change,
        "local_slopes": local_slopes,
        "trend_slope": slope,
        "stable": bool(stable),
        "no_growth": bool(no_growth),
        "pass": bool(np.isfinite(c_hat) and stable and no_growth),
    }


def lemma_g_bound(frac_order, probe_points=LEMMA_PROBES, level=1, stability_tol=0.05,
                  trend_tol=0.05) -> dict:
    """Estimate ``C`` in ``|(-Delta)^{alpha/2} g(x)| <= C g(x)`` in one dimension.

    The jump integral is evaluated by Gauss-Legendre panels graded toward
    ``h = 0`` and toward the kink ``h = |x|``, a Taylor model below
    ``h0 = 1e-3 min(|x|, 1)`` and a closed-form tail beyond ``1e8 max(1, |x|)``.
    Every ratio is computed at ``level`` and ``2 level`` nodes per panel.

    Parameters
    ----------
    frac_order : FracOrder or float
    probe_points : sequence of float
        Points ``x``; only ``|x|`` matters since ``g`` is even.
    level : int
        Base resolution; the reported ratios come from the doubled level.
    stability_tol : float
        Allowed relative change of any ratio under doubling.
    trend_tol : float
        Largest allowed slope of ``log ratio`` against ``log |x|`` between
        the two outermost probes.

    Returns
    -------
    dict
        ``C_hat`` (max ratio), ``ratios``, ``refinement_change`` (largest
        change of a ratio under doubling, relative to ``C_hat``),
        ``trend_slope`` and the ``pass`` verdict.
    """
    alpha = as_frac_order(frac_order).alpha
    return _lemma_report(_lemma_operator_1d, alpha, probe_points, level, stability_tol, trend_tol)


def lemma_g_bound_2d(frac_order, probe_points=LEMMA_PROBES_2D, level=1, stability_tol=0.05,
                     trend_tol=0.05, angular_tol=0.01) -> dict:
    """Two-dimensional analogue of :func:`lemma_g_bound` for the radial ``g``.

    Uses the spherical form of the operator: radial panels in ``h`` as in
    one dimension times a trapezoid rule on the circle whose node count
    follows the angular scale of ``g(x + h nu)``.  Doubling ``level`` doubles
    both the Gauss nodes per panel and the angular nodes; ``angular_change``
    reports a separate doubling of the angular nodes alone, which must stay
    below ``angular_tol`` relative to ``C_hat``.
    """
    alpha = as_frac_order(frac_order).alpha
    report = _lemma_report(_lemma_operator_2d, alpha, probe_points, level, stability_tol, trend_tol)
    fine = 2 * level
    base = np.array([_lemma_operator_2d(x, alpha, fine) for x in report["probes"]])
    doubled = np.array([_lemma_operator_2d(x, alpha, fine, base_angles=64) for x in report["probes"]])
    g = lemma_g(np.asarray(report["probes"]), alpha)
    report["angular_change"] = float(np.max(np.abs(doubled - base) / g) / report["C_hat"])
    report["pass"] = bool(report["pass"] and report["angular_change"] < angular_tol)
    return report
