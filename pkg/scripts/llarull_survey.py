"""Scalar curvature range and quantitative slack for w = lam * sin(theta).

R = 6 + (2 / lam^2 - 2) csc^2(theta), so for lam > 1 the largest value
4 + 2 / lam^2 sits on the equator and R falls without bound near the poles.
"""

import argparse

from stbands.geometry import make_metric
from stbands.identities import eval_llarull, llarull_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lams", default="1.0,1.05,1.2,1.5,2.0")
    ap.add_argument("--cells", type=int, default=2000)
    args = ap.parse_args()
    print(f"{'lam':>6s} {'sup_R':>14s} {'4+2/lam^2':>14s} {'argmax':>10s} {'min_R':>14s} {'quant slack':>13s}")
    for lam in (float(x) for x in args.lams.split(",")):
        m = make_metric("RicciWarped", {"amp": lam})
        s = llarull_scan(m)
        q, _, _ = eval_llarull(m, "quant", n_cells=args.cells)
        print(f"{lam:6.3f} {s['sup_R']:14.10f} {4 + 2 / lam**2:14.10f} {s['argmax']:10.6f} "
              f"{s['min_R']:14.6g} {q.slack:13.6g}")


if __name__ == "__main__":
    main()
