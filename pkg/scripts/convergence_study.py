"""Refinement study: identity slack and grid-solver error against h.

Prints one row per (problem, cell count) and the least-squares order per
problem. Use --json to emit the table instead.
"""

import argparse
import json
import math

import numpy as np

from stbands.experiments import catalog_problems
from stbands.geometry import make_metric
from stbands.identities import eval_lemma23, eval_lemma33, eval_lemma71
from stbands.potentials import make_potential
from stbands.solver import make_band_problem, solve_band_1d, solve_band_grid

LEMMAS = {"lemma23": eval_lemma23, "lemma33": eval_lemma33, "lemma71": eval_lemma71}


def problems() -> dict:
    cat = catalog_problems()
    q, e = math.pi / 4, 0.05
    gups = make_band_problem(make_metric("GUpsilon", {"upsilon": 0.5}),
                             make_potential("TwoRicciBand", {"H0": 2 * math.tan(2 * (q - e))}), (-q + e, q - e))
    return {
        "torus_equality/lemma23": (cat["torus_equality"], "lemma23"),
        "round_ricci/lemma33": (cat["round_ricci"], "lemma33"),
        "round_zero/lemma23": (cat["round_zero"], "lemma23"),
        "gupsilon_band/lemma71": (gups, "lemma71"),
        "warped_zero/lemma71": (cat["warped_zero"], "lemma71"),
    }


def order(hs, vals) -> float:
    vals = np.abs(np.asarray(vals))
    if np.any(vals == 0):
        return float("nan")
    return float(np.polyfit(np.log(hs), np.log(vals), 1)[0])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", default="250,500,1000,2000")
    ap.add_argument("--tol", type=float, default=1e-10, help="grid solver increment tolerance")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    cells = [int(c) for c in args.cells.split(",")]
    rows, orders = [], {}
    for name, (prob, which) in problems().items():
        hs, slacks, errs = [], [], []
        for n in cells:
            p1 = solve_band_1d(prob, n)
            pg = solve_band_grid(prob, (n,), tol=args.tol, max_iter=2000)
            rep = LEMMAS[which](pg, prob)
            err = float(np.max(np.abs(pg.u - p1.u)))
            hs.append(rep.h)
            slacks.append(rep.slack)
            errs.append(err)
            rows.append({"problem": name, "cells": n, "h": rep.h, "slack": rep.slack,
                         "slack_over_h2": rep.slack / rep.h**2, "grid_error": err})
        orders[name] = {"slack_order": order(hs, slacks), "error_order": order(hs, errs)}
    if args.json:
        print(json.dumps({"rows": rows, "orders": orders}, indent=2))
        return
    print(f"{'problem':26s} {'cells':>6s} {'h':>10s} {'slack':>12s} {'slack/h^2':>11s} {'grid err':>10s}")
    for r in rows:
        print(f"{r['problem']:26s} {r['cells']:6d} {r['h']:10.3e} {r['slack']:12.4e} "
              f"{r['slack_over_h2']:11.4f} {r['grid_error']:10.3e}")
    print()
    for name, o in orders.items():
        print(f"{name:26s} slack order {o['slack_order']:6.3f}   grid error order {o['error_order']:6.3f}")


if __name__ == "__main__":
    main()
