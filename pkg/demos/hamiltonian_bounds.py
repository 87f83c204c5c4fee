"""Quadratic bounds on the limit Hamiltonian and what they imply.

``H`` lies between ``C_lower p^2`` and ``C_upper p^2`` on ``|p| <= A``.
The script tabulates ``H`` against both parabolas, then solves the obstacle
problem from ``-A log(1 + |x|)`` and compares the right edge of its zero
set with the explicit bounds obtained from the two parabolas.

Run with ``python3 demos/hamiltonian_bounds.py``.
"""
from __future__ import annotations

import math

from fraclimits.core import field_from_initial, make_grid
from fraclimits.hamilton_jacobi import (Hamiltonian, example2_front_bounds,
                                        hamiltonian_bound_constants, hamiltonian_eval, hj_solve,
                                        zero_set_edge)


def main():
    alpha, A = 1.0, 0.5
    c = hamiltonian_bound_constants(alpha, A)
    print(f"C_lower = {c['C_lower']:.6f}, C_upper = {c['C_upper']:.6f}")
    print(f"{'p':>6} {'C_lower p^2':>12} {'H(p)':>12} {'C_upper p^2':>12}")
    for frac in (0.1, 0.25, 0.5, 0.75, 0.9):
        p = frac * A
        print(f"{p:6.3f} {c['C_lower'] * p * p:12.6f} {hamiltonian_eval(p, alpha):12.6f} "
              f"{c['C_upper'] * p * p:12.6f}")

    H = Hamiltonian(alpha, A)
    grid = make_grid(2 * 200 * 32, 200.0, False)
    u0 = field_from_initial(grid, "log_tail_u", {"A": A})
    per = int(math.ceil(0.5 / (grid.dx / (2 * H.dH_max))))
    states = hj_solve(u0, H, 0.5 / per, 2.0, obstacle=True, stride=per)
    print(f"\n{'t':>4} {'x_lower':>9} {'edge':>9} {'x_upper':>9}")
    for s in states[1:]:
        b = example2_front_bounds(s.time, A, alpha)
        print(f"{s.time:4.1f} {b['x_lower']:9.3f} {zero_set_edge(s):9.3f} {b['x_upper']:9.3f}")


if __name__ == "__main__":
    main()
