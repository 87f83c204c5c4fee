"""Independent reference values computed with mpmath.

Nothing here imports the package; each function re-derives its quantity
from a closed form or an arbitrary-precision integral so that tests compare
two separate routes.
"""
from __future__ import annotations

import mpmath as mp

mp.mp.dps = 30


def symbol_constant(alpha):
    """``2 int_0^inf (1 - cos h) h^{-1-alpha} dh``."""
    a = mp.mpf(alpha)
    if a == 1:
        return float(mp.pi)
    return float(-2 * mp.gamma(-a) * mp.cos(mp.pi * a / 2))


def frac_laplacian_gaussian(x, alpha, sigma):
    """Unnormalized ``(-Delta)^{alpha/2} exp(-x^2 / (2 sigma^2))`` on the line."""
    a = mp.mpf(alpha)
    s = mp.mpf(sigma)
    z = mp.mpf(x) / s
    pref = symbol_constant(alpha) * 2 ** (a / 2) * mp.gamma((1 + a) / 2) / mp.sqrt(mp.pi)
    return float(pref * s ** (-a) * mp.hyp1f1((1 + a) / 2, mp.mpf(1) / 2, -z * z / 2))


def hamiltonian(p, alpha):
    """``H(p)`` via ``s = e^{-k}``: a difference of Beta functions in Gamma form."""
    a, p = mp.mpf(alpha), mp.mpf(p)
    if p == 0:
        return 0.0

    def form(b):
        return mp.gamma(-b) * (mp.gamma(b - p) * mp.rgamma(-p) + mp.gamma(b + p) * mp.rgamma(p))

    if a == int(a):
        # removable singularity of the Gamma form at integer alpha
        h = mp.mpf("1e-12")
        return float((form(a + h) + form(a - h)) / 2)
    return float(form(a))


def _kernel_integral(f, alpha):
    a = mp.mpf(alpha)
    return mp.quad(lambda k: f(k) * mp.exp(k) / mp.expm1(k) ** (1 + a),
                   [0, mp.mpf(1) / 1000, mp.mpf(1) / 10, 1, 10, 60, 200, mp.inf])


def hamiltonian_quad(p, alpha):
    """``H(p)`` by direct arbitrary-precision quadrature."""
    p = mp.mpf(p)
    return float(_kernel_integral(lambda k: 4 * mp.sinh(p * k / 2) ** 2, alpha))


def bound_constants(alpha, A):
    A = mp.mpf(A)
    lower = _kernel_integral(lambda k: k * k * (mp.exp(-A * k) + 1) / 2, alpha)
    upper = _kernel_integral(lambda k: k * k * (mp.exp(A * k) + 1) / 2, alpha)
    return float(lower), float(upper)


def curvature_constant(alpha):
    """``lim H(p)/p^2 = int k^2 w(k) dk``."""
    return float(_kernel_integral(lambda k: k * k, alpha))


def logistic(t, I0, r, K, epsilon):
    """Solution of ``eps I' = r I (1 - I / K)``."""
    t = mp.mpf(t)
    return float(K * I0 / (I0 + (K - I0) * mp.exp(-r * t / epsilon)))


def lemma_ratio_at_zero(alpha, dim=1):
    """``(-Delta)^{alpha/2} g(0)`` for ``g = 1/(1+|x|^{1+alpha})``: the 1-D
    spherical measure has two points and the circle has length ``2 pi``."""
    beta = 1 + mp.mpf(alpha)
    one_sided = mp.quad(lambda h: 1 / (1 + h ** beta), [0, 1, mp.inf])
    return float((2 if dim == 1 else 2 * mp.pi) * one_sided)


def hopf_lax_scan(x, t, A, C, n=200001):
    """Brute-force scan for ``sup_y -A log(1+|y|) - (x-y)^2/(4Ct)``."""
    import numpy as np

    span = abs(x) + 10.0
    y = np.linspace(-span, span, n)
    vals = -A * np.log1p(np.abs(y)) - (x - y) ** 2 / (4 * C * t)
    i = int(np.argmax(vals))
    # refine with mpmath on the bracket around the best scan point
    f = lambda z: -A * mp.log(1 + abs(z)) - (x - z) ** 2 / (4 * C * t)
    lo, hi = y[max(i - 1, 0)], y[min(i + 1, n - 1)]
    zs = [lo + (hi - lo) * j / 2000 for j in range(2001)]
    return float(max(f(mp.mpf(z)) for z in zs))


def front_bound_scan(t, A, C, n=400001):
    """Dense scan of ``max_r 2 sqrt(C) r t + e^{t(1-r^2)/A} - 1`` over ``[0, 1]``."""
    import numpy as np

    r = np.linspace(0.0, 1.0, n)
    return float(np.max(2 * np.sqrt(C) * r * t + np.expm1(t * (1 - r * r) / A)))
