"""Exponential front acceleration for the fractional Fisher-KPP equation.

Starting from data with a power tail, the level sets of the solution move
out like ``exp(t / (1 + alpha))``.  This script runs the spectral solver
for several orders, fits the rate of ``log x_f(t)`` at three levels and
prints the fitted rate next to ``1 / (1 + alpha)``.

Run with ``python3 demos/front_speed.py [--alpha 0.5 1.0 1.5]``.
"""
from __future__ import annotations

import argparse

from fraclimits.asymptotics import front_speed_study


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    args = parser.parse_args()
    levels = (0.1, 0.5, 0.9)
    print(f"{'alpha':>6} {'target':>8} " + " ".join(f"{'sigma@' + str(lv):>10}" for lv in levels)
          + f" {'r^2':>9} {'T':>6}")
    for alpha in args.alpha:
        rep = front_speed_study(alpha, levels=levels)
        fits = rep["levels"]
        print(f"{alpha:6.2f} {rep['target']:8.4f} "
              + " ".join(f"{fits[lv]['sigma_hat']:10.4f}" for lv in levels)
              + f" {fits[0.5]['r_squared']:9.6f} {fits[0.5]['T']:6.2f}")


if __name__ == "__main__":
    main()
