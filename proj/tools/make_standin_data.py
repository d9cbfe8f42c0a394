#!/usr/bin/env python3
"""Writes the synthetic diabetes-style table used by the eval-real tests.

Same column layout as the usual Pima extract (response Glucose plus six
clinical predictors), but every value is simulated; no patient data.
"""
import argparse

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--missing", type=int, default=12, help="rows given an NA cell")
    ap.add_argument("out")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.rows
    # near-Gaussian marginals: the estimator assumes roughly elliptical X
    bmi = rng.normal(32.0, 7.0, n)
    preg = rng.normal(4.0, 2.5, n)
    dpf = rng.normal(0.47, 0.2, n)
    age = rng.normal(33.0, 9.0, n)
    insulin = rng.normal(155.0, 60.0, n)
    bp = rng.normal(70.0, 12.0, n)

    def z(v):
        return (v - v.mean()) / v.std()

    index = 0.45 * z(bmi) + 0.75 * z(insulin) + 0.35 * z(age) + 0.15 * z(bp) + 0.1 * z(dpf)
    glucose = 120 + 22 * index + 4 * index**2 + rng.normal(0, 6.0, n)

    cols = {
        "Glucose": np.round(glucose, 1),
        "BMI": np.round(bmi, 1),
        "Pregnancies": np.round(preg, 1),
        "DPF": np.round(dpf, 3),
        "Age": np.round(age, 0),
        "Insulin": np.round(insulin, 0),
        "BP": np.round(bp, 0),
    }
    names = list(cols)
    table = np.column_stack([cols[c] for c in names]).astype(object)
    for r in rng.choice(n, size=args.missing, replace=False):
        table[r, rng.integers(len(names))] = "NA"

    with open(args.out, "w", newline="\n") as f:
        f.write(",".join(names) + "\n")
        for row in table:
            f.write(",".join(v if isinstance(v, str) else f"{v:g}" for v in row) + "\n")


if __name__ == "__main__":
    main()
