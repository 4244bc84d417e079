"""Survey of the universal constants reachable from this package.

Solves the period-doubling and period-tripling fixed points, the
alternating 2-cycle, and runs the quadratic-family cascade, then prints
everything as one table and writes it to CSV.

    python3 scripts/constants_survey.py --degree 24 --cascade-n 10
"""
import argparse
import time
from pathlib import Path

import numpy as np

from renormlab.families import cascade
from renormlab.maps import QuadraticFamily
from renormlab.renorm import THETA_DOUBLING, THETA_TRIPLING
from renormlab.reporting import write_csv
from renormlab.solver import solve_fixed_point, solve_periodic_orbit, spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=24)
    ap.add_argument("--cascade-n", type=int, default=10)
    ap.add_argument("--output-dir", default=".")
    args = ap.parse_args()
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []

    def note(name, value, detail=""):
        rows.append((name, value, detail.replace(",", ";")))
        print(f"  {name:28s} {value:+.12f}  {detail}")

    print(f"doubling fixed point (degree {args.degree})")
    t0 = time.time()
    fp = solve_fixed_point(theta=THETA_DOUBLING, degree=args.degree)
    rep = spectrum(fp.map)
    note("lambda_star", fp.lambda_star,
         f"residual {fp.residual:.1e}; {fp.newton_iters} Newton steps")
    note("delta", rep.delta, f"gap {rep.gap:.6f}")
    note("lambda_star_squared", fp.lambda_star**2,
         "matches the second eigenvalue")
    lead = ", ".join(f"{v.real:+.6f}" for v in rep.eigenvalues[:6])
    print(f"  leading spectrum: {lead}")
    print(f"  ({time.time() - t0:.1f}s)")

    print("tripling fixed point")
    fp3 = solve_fixed_point(theta=THETA_TRIPLING, degree=args.degree)
    rep3 = spectrum(fp3.map)
    note("lambda_tripling", fp3.lambda_star, f"residual {fp3.residual:.1e}")
    note("delta_tripling", rep3.delta, "unstable eigenvalue, period 3")

    print("doubling/tripling 2-cycle")
    two_cycle = solve_periodic_orbit([THETA_DOUBLING, THETA_TRIPLING],
                                 degree=args.degree)
    note("two_cycle_multiplier", two_cycle.multipliers.delta,
         f"residual {two_cycle.residual:.1e}")

    print(f"cascade through {args.cascade_n} doublings")
    casc = cascade(QuadraticFamily(), args.cascade_n)
    note("delta_cascade", casc.delta_estimate,
         f"vs spectrum: {abs(casc.delta_estimate - rep.delta):.1e}")
    note("c_infinity", casc.c_infinity,
         f"superstable ratios end at {casc.ratios[-1]:.6f}")

    path = out / "constants.csv"
    write_csv(path, ["name", "value", "detail"], rows)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
