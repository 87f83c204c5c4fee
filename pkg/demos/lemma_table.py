"""The ratio ``(-Delta)^{alpha/2} g / g`` for ``g = 1 / (1 + |x|^{1+alpha})``.

The ratio stays bounded on the whole line, which is what makes power-tail
data a sub- and supersolution up to a constant.  The script prints the
ratio at probe points out to ``|x| = 10^4`` together with the estimate of
the bound and its change under doubled quadrature resolution.

Run with ``python3 demos/lemma_table.py``.
"""
from __future__ import annotations

from fraclimits.operators import lemma_g_bound, lemma_g_bound_2d


def show(label, rep):
    print(label)
    for x, r in zip(rep["probes"], rep["ratios"]):
        print(f"  |x| = {x:>8g}   ratio = {r: .8f}")
    print(f"  C_hat = {rep['C_hat']:.6f}, refinement change = {rep['refinement_change']:.1e}, "
          f"last-decade slope = {rep['trend_slope']:.1e}")


def main():
    for alpha in (0.5, 1.0, 1.5):
        show(f"one dimension, alpha = {alpha}", lemma_g_bound(alpha))
    show("two dimensions, alpha = 1.0", lemma_g_bound_2d(1.0))


if __name__ == "__main__":
    main()
