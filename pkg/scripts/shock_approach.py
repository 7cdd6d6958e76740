"""Stop times of the Galerkin reference on Burgers as the resolution grows,
with the H^s norm and the running integral of sup|u_x| at the stop."""
import argparse

import numpy as np

from parahyp.model import get_system
from parahyp.solver import SolveConfig, solve
from parahyp.spectral import BlowupDetected, Field, GridSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolutions", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--fraction", type=float, default=0.2, help="gradient-fraction threshold")
    args = ap.parse_args()

    cfg = SolveConfig(scheme="galerkin", T=1.5, gradient_fraction=args.fraction)
    print(f"{'n':>6} {'t_stop':>8} {'H^s':>12} {'int B':>8}")
    for n in args.resolutions:
        u0 = Field.from_function(GridSpec(1, n), np.sin)
        try:
            traj = solve(get_system("burgers"), u0, cfg)
            t = float("nan")
        except BlowupDetected as exc:
            traj, t = exc.trajectory, exc.time
        print(f"{n:6d} {t:8.4f} {traj.diag('hs')[-1]:12.4e} {traj.diag('intB')[-1]:8.4f}")


if __name__ == "__main__":
    main()
