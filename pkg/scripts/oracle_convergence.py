"""Error of the regularized Euler scheme against the characteristics solution of
u_t = u u_x, u0 = sin x, at T = 0.5, as the step size is halved."""
import argparse

import numpy as np

from parahyp.harness import fit_slope
from parahyp.model import get_system
from parahyp.norms import l2_norm
from parahyp.oracle import characteristics_solution
from parahyp.solver import SolveConfig, solve
from parahyp.spectral import Field, GridSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--T", type=float, default=0.5)
    ap.add_argument("--jmax", type=int, default=10)
    args = ap.parse_args()

    grid = GridSpec(1, args.n)
    u0 = Field.from_function(grid, np.sin)
    exact = Field(grid, characteristics_solution(np.sin, np.cos, args.T, grid.coordinates()[0]))
    eps, errs = [], []
    print(f"{'eps':>10} {'L2 error':>12}")
    for j in range(6, args.jmax + 1):
        e = 2.0**-j
        err = l2_norm(solve(get_system("burgers"), u0, SolveConfig(epsilon=e, T=args.T)).final - exact)
        eps.append(e)
        errs.append(err)
        print(f"{'2^-%d' % j:>10} {err:12.4e}")
    print(f"fitted rate {fit_slope(eps, errs):.3f}")


if __name__ == "__main__":
    main()
