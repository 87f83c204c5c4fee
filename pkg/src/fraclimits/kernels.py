"""Quadrature for integrals against the jump kernel ``e^k / (e^k - 1)^(1+alpha)``.

The kernel behaves like ``k^(-1-alpha)`` at the origin and like
``e^(-alpha k)`` at infinity.  All integrands handled here vanish to second
order at ``k = 0``, so the integral is split at a small ``delta``: the inner
piece uses Gauss-Jacobi nodes for the weight ``k^(1-alpha)`` (exact for
integrands ``k^2 * polynomial``), the outer piece uses composite
Gauss-Legendre panels up to a cut-off chosen from a closed-form tail bound.
"""
from __future__ import annotations

import csv
import math

import numpy as np
from scipy.special import roots_jacobi

from .core import ConfigError, as_frac_order


def jump_kernel(k, alpha):
    """``e^k / (e^k - 1)^(1+alpha)`` written to avoid overflow."""
    k = np.asarray(k, dtype=float)
    return np.exp(-alpha * k) / (-np.expm1(-k)) ** (1.0 + alpha)


def tail_bound(k_max, alpha, A, power=0):
    """Upper bound of ``int_{k_max}^inf k^power e^{(A-alpha)k} (1-e^{-k})^{-1-alpha} dk``.

    With ``b = alpha - A`` the polynomial-exponential integral is exact:
    ``e^{-b K} sum_j power!/(power-j)! K^(power-j) / b^(j+1)``.
    """
    b = alpha - A
    if b <= 0:
        return math.inf
    s = sum(math.factorial(power) / math.factorial(power - j) * k_max ** (power - j) / b ** (j + 1)
            for j in range(power + 1))
    return math.exp(-b * k_max) * s / (1.0 - math.exp(-k_max)) ** (1.0 + alpha)


def choose_k_max(alpha, A, tol=1e-10, power=2):
    """Smallest half-integer cut-off meeting the tail budget ``tol``."""
    k = 2.0
    while tail_bound(k, alpha, A, power) > tol:
        k += 0.5
        if k > 1e5:
            raise ConfigError("tail bound cannot be met; is A close to alpha?")
    return k


def gauss_legendre_panels(edges, n):
    """Nodes and weights of an ``n``-point Gauss-Legendre rule on each panel."""
    t, w = np.polynomial.legendre.leggauss(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * t + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


class KernelQuadrature:
    """Nodes and weights for ``int_0^inf phi(k) w(k) dk`` with ``phi = O(k^2)``.

    Parameters
    ----------
    alpha : float or FracOrder
        Kernel exponent.
    A : float, optional
        Largest exponential growth ``e^{A k}`` the integrands may have.
        ``k_max`` is chosen so that the neglected tail of
        ``k^2 e^{A k} w(k)`` is below ``tol``.
    delta : float
        Split point between the inner and outer rules, in ``(0, 1/2)``.
    level : int
        Resolution multiplier; doubling it doubles every node count.
    tol : float
        Tail budget.

    Attributes
    ----------
    nodes, weights : ndarray
        Combined rule; ``weights`` already include the kernel.
    n_inner : int
        The first ``n_inner`` entries belong to the inner rule.
    k_max : float
    tail : float
        Value of the tail bound at ``k_max``.
    """

    def __init__(self, alpha, A=0.0, delta=1e-2, level=1, tol=1e-10):
        self.alpha = as_frac_order(alpha).alpha
        self.A = float(A)
        if not 0 <= self.A < self.alpha:
            raise ConfigError(f"need 0 <= A < alpha, got A = {A}, alpha = {self.alpha}")
        if not 0 < delta < 0.5:
            raise ConfigError("delta must lie in (0, 1/2)")
        self.delta = float(delta)
        self.level = int(level)
        self.tol = float(tol)
        self.k_max = choose_k_max(self.alpha, self.A, tol)
        self.tail = tail_bound(self.k_max, self.alpha, self.A, 2)

        a = self.alpha
        # inner: weight (delta/2)^(2-a) (1+t)^(1-a) on t in [-1, 1]
        t, lam = roots_jacobi(12 * self.level, 0.0, 1.0 - a)
        k_in = 0.5 * self.delta * (1.0 + t)
        w_in = (0.5 * self.delta) ** (2.0 - a) * lam * jump_kernel(k_in, a) * k_in ** (a - 1.0)
        # outer: geometric panels up to 1, then unit panels
        edges = [self.delta]
        while edges[-1] < 1.0:
            edges.append(min(2.0 * edges[-1], 1.0))
        edges.extend(np.arange(2.0, math.ceil(self.k_max) + 1.0))
        edges = np.array(edges)
        edges = edges[edges <= self.k_max]
        if edges[-1] < self.k_max:
            edges = np.append(edges, self.k_max)
        k_out, g_out = gauss_legendre_panels(edges, 12 * self.level)
        self.outer_edges = edges
        self.n_inner = k_in.size
        self.nodes = np.concatenate([k_in, k_out])
        self.weights = np.concatenate([w_in, g_out * jump_kernel(k_out, a)])
        # far nodes whose weights underflow carry nothing and would only
        # overflow integrands such as sinh(pk) for p close to alpha
        keep = np.nonzero(self.weights)[0]
        last = keep[-1] + 1 if keep.size else self.weights.size
        self.nodes = self.nodes[:last]
        self.weights = self.weights[:last]

    def integrate(self, phi):
        """``sum_i W_i phi(k_i)``; ``phi`` is a callable or an array of node values."""
        vals = phi(self.nodes) if callable(phi) else np.asarray(phi)
        return float(np.dot(self.weights, vals))

    @property
    def inner(self):
        n = self.n_inner
        return self.nodes[:n], self.weights[:n]

    def to_csv(self, path):
        """Write ``node, weight`` rows with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["node", "weight"])
            for k, w in zip(self.nodes, self.weights):
                out.writerow([f"{k:.17g}", f"{w:.17g}"])

    def metadata(self) -> dict:
        return {"alpha": self.alpha, "A": self.A, "delta": self.delta, "level": self.level,
                "k_max": self.k_max, "tail_bound": self.tail, "n_nodes": int(self.nodes.size)}
