"""Reference values for the variant comparison on six_months.csv.

Written against numpy/scipy only, sharing no code with the Rust crates:
the periodic basis is folded from scipy B-splines, the zero-integral
constraint comes from numerically integrated basis functions, and each fit
is a dense solve of its normal equations.

    python3 derive_golden.py six_months.csv

writes six_months.golden.csv and six_months.golden_tables.txt next to it.
"""

import csv
import math
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline

BINS = 36
PSEUDO = 0.5
DEGREE = 3
INNER = 9
PARAMS = {"a": 0.927, "b": 0.99, "c": 0.07, "d": 0.041}
# variant -> (family, derivative or difference order)
VARIANTS = {"a": ("smooth", 1), "b": ("smooth", 2), "c": ("pspline", 1), "d": ("pspline", 2)}
TAU = 2.0 * math.pi


def monthly_directions(path):
    months = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            d = row["wind_dir_deg"].strip()
            if not d:
                continue
            deg = float(d)
            if deg == 360.0:
                deg = 0.0
            months[row["timestamp"][:7]].append(math.radians(deg))
    return dict(sorted(months.items()))


def clr_histogram(dirs):
    counts = np.zeros(BINS)
    for t in dirs:
        counts[min(int(math.floor(t % TAU / TAU * BINS)), BINS - 1)] += 1
    rel = (counts + PSEUDO) / (len(dirs) + BINS * PSEUDO)
    logs = np.log(rel)
    return logs - logs.mean()


class ZeroIntegralBasis:
    """Periodic spline basis with the last periodic coefficient eliminated."""

    def __init__(self, k, g):
        h = TAU / (g + 1)
        lam = [i * h for i in range(-k, g + k + 2)]
        self.k, self.g = k, g
        self.t = np.array(lam)
        n_full = g + k + 1
        self.full = [BSpline.basis_element(self.t[i:i + k + 2], extrapolate=False) for i in range(n_full)]
        nodes, weights = np.polynomial.legendre.leggauss(12)
        self.qx, self.qw = [], []
        for j in range(g + 1):
            lo, hi = j * h, (j + 1) * h
            self.qx.extend(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo))
            self.qw.extend(0.5 * (hi - lo) * weights)
        self.qx, self.qw = np.array(self.qx), np.array(self.qw)
        integrals = self.periodic(self.qx).T @ self.qw
        self.elim = -integrals[:g] / integrals[g]

    def _full(self, x, nu):
        out = np.zeros((len(x), len(self.full)))
        for i, b in enumerate(self.full):
            f = b.derivative(nu) if nu else b
            v = f(x)
            out[:, i] = np.nan_to_num(v)
        return out

    def periodic(self, x, nu=0):
        full = self._full(x, nu)
        per = full[:, : self.g + 1].copy()
        per[:, : self.k] += full[:, self.g + 1:]
        return per

    def reduced(self, x, nu=0):
        per = self.periodic(x, nu)
        return per[:, : self.g] + np.outer(per[:, self.g], self.elim)

    def roughness(self, l):
        d = self.reduced(self.qx, l)
        return d.T @ (self.qw[:, None] * d)


def fit(basis, xs, y, variant, param):
    family, order = VARIANTS[variant]
    phi = basis.reduced(xs)
    n = len(y)
    if family == "smooth":
        a = (1 - param) * basis.roughness(order) + param * phi.T @ phi
        hat = param * phi @ np.linalg.solve(a, phi.T)
    else:
        dm = np.diff(np.eye(basis.g), n=order, axis=0)
        a = phi.T @ phi + param * dm.T @ dm
        hat = phi @ np.linalg.solve(a, phi.T)
    fitted = hat @ y
    sse = float(np.sum((y - fitted) ** 2))
    tr = float(np.trace(hat))
    gcv = (sse / n) / (1 - tr / n) ** 2
    return sse, gcv, tr


def tables(rows):
    out = ["Months with maximum and minimum SSE",
           f"{'variant':<8} {'max month':>10} {'max SSE':>12} {'min month':>10} {'min SSE':>12}"]
    means, params = [], []
    for v in VARIANTS:
        sub = [r for r in rows if r[1] == v]
        hi = max(sub, key=lambda r: r[3])
        lo = min(sub, key=lambda r: r[3])
        out.append(f"({v})      {hi[0]:>10} {hi[3]:>12.4f} {lo[0]:>10} {lo[3]:>12.4f}")
        means.append(sum(r[3] for r in sub) / len(sub))
        params.append(sum(r[2] for r in sub) / len(sub))
    out.append("")
    out.append("Mean SSE over all months")
    out.append(f"{'variant':<14}" + "".join(f"{'(' + v + ')':>10}" for v in VARIANTS))
    out.append(f"{'mean SSE':<14}" + "".join(f"{m:>10.4f}" for m in means))
    out.append(f"{'mean param':<14}" + "".join(f"{p:>10.4f}" for p in params))
    return "\n".join(out) + "\n"


def main():
    src = Path(sys.argv[1])
    basis = ZeroIntegralBasis(DEGREE, INNER)
    xs = (np.arange(BINS) + 0.5) * TAU / BINS
    rows = []
    for month, dirs in monthly_directions(src).items():
        y = clr_histogram(dirs)
        for v, p in PARAMS.items():
            rows.append((month, v, p, *fit(basis, xs, y, v, p)))
    with open(src.with_suffix(".golden.csv"), "w", newline="") as fh:
        fh.write("month,variant,param,sse,gcv,hat_trace\n")
        for r in rows:
            fh.write(",".join([r[0], r[1]] + [repr(float(x)) for x in r[2:]]) + "\n")
    src.with_suffix(".golden_tables.txt").write_text(tables(rows))


if __name__ == "__main__":
    main()
