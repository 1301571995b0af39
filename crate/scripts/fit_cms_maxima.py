#!/usr/bin/env python3
"""Independent check of the C_MS normalizing maxima and the gap polynomial.

Fits S_max by least squares against the tabulated C_MS column for B_max = 5,
then fits STR on C_MS (degrees 1-4, AICc) with the maxima fixed at
B_max = 5, S_max = 626 and prints the numbers frozen into the Rust tests.
"""
import csv
import math
import sys

import numpy as np

# Tabulated C_MS and STR, in data/table1.csv row order.
CMS = [0.13, 0.4, 0.49, 0.46, 0.5, 0.54, 0.57, 0.6, 0.61, 0.62, 0.71, 0.75, 0.76, 0.82, 0.9, 0.92]
STR = [0.0, -0.04, 0.19, 0.28, 0.09, 0.52, 0.1, -0.05, 0.07, -0.06, -0.72, -0.22, -0.61, -0.71, -0.6, -0.68]


def load(path):
    rows = []
    with open(path) as f:
        for line in f:
            if line.startswith("#") or line.startswith("@") or line.startswith("label"):
                continue
            label, b, s, ls, lr, _ = next(csv.reader([line]))
            rows.append((label, int(b), float(s), float(ls), float(lr)))
    return rows


def main(path):
    rows = load(path)
    b = np.array([r[1] for r in rows], float)
    s = np.array([r[2] for r in rows], float)
    target = 2 * np.array(CMS) - b / 5.0
    u = float(s @ target / (s @ s))
    print(f"least-squares S_max (B_max = 5): {1 / u:.2f}")
    for s_max in (1 / u, 626.0):
        cms = 0.5 * (b / 5 + s / s_max)
        err = np.abs(cms - CMS)
        worst = np.argsort(err)[::-1][:2]
        print(f"S_max {s_max:.2f}: max |C_MS error| {err.max():.4f} at " + ", ".join(rows[i][0] for i in worst))

    l_max = 13.9
    x = 0.5 * (b / 5 + s / 626.0)
    y = (np.array([r[4] for r in rows]) - np.array([r[3] for r in rows])) / l_max
    print(f"max |STR error| {np.abs(y - STR).max():.4f}")
    n = len(x)
    best = None
    for d in range(1, 5):
        k = d + 1
        coef, *_ = np.linalg.lstsq(np.vander(x, k, increasing=True), y, rcond=None)
        rss = float(np.sum((np.vander(x, k, increasing=True) @ coef - y) ** 2))
        aicc = n * math.log(rss / n) + 2 * k + 2 * k * (k + 1) / (n - k - 1)
        print(f"degree {d}: AICc {aicc:.6f} coefficients {' '.join(f'{c:.12f}' for c in coef)}")
        if best is None or aicc < best[0]:
            best = (aicc, d, coef)
    _, d, c = best
    print(f"selected degree {d}")
    if d == 2:
        a0, a1, a2 = c[0] + 0.2, c[1], c[2]
        disc = math.sqrt(a1 * a1 - 4 * a2 * a0)
        roots = sorted([(-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)])
        print(f"threshold (STR fit = -0.2): {roots[-1]:.12f}")
        f = lambda t: c[0] + c[1] * t + c[2] * t * t
        print(f"fit(0.5) = {f(0.5):.12f}, fit(0.9) = {f(0.9):.12f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/table1.csv")
