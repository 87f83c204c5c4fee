"""Small-step asymptotics: the epsilon ladder against the limit equation.

For ``n_eps(x, 0) = (1 + |x|)^{-A/eps}`` the Hopf-Cole transform
``u_eps = eps log n_eps`` should approach the solution of ``u_t = H(u_x)``
(mass-regulated growth) or of the obstacle problem (logistic growth) as
``eps`` decreases.  The script prints the sup-error on each window for
every rung of the ladder.

Run with ``python3 demos/epsilon_ladder.py [--reaction nonlocal|kpp]``.
"""
from __future__ import annotations

import argparse

from fraclimits.hamilton_jacobi import check_theorem_sme


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reaction", choices=("nonlocal", "kpp"), default="nonlocal")
    parser.add_argument("--alpha", type=float, default=1.0)
    args = parser.parse_args()
    rep = check_theorem_sme(alpha=args.alpha, reaction_kind=args.reaction)
    names = list(rep["windows"])
    print(f"{'eps':>6} " + " ".join(f"{n:>10}" for n in names) + f" {'max grad':>9} {'max u':>8}")
    for rung in rep["rungs"]:
        errs = " ".join(f"{rung['sup_error'][n]:10.4f}" for n in names)
        print(f"{rung['epsilon']:6.3f} {errs} {rung['max_grad']:9.4f} {rung['max_u']:8.4f}")
    print("verdict:", "PASS" if rep["pass"] else "FAIL")


if __name__ == "__main__":
    main()
