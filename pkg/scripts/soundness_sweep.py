"""Sweep (t, s, p) and compare the certified bound with the true norm of test functions.

Prints one row per case with the ratio bound / true norm (always >= 1).
"""

import argparse
import itertools

import numpy as np

from lpcrit.criterion import certify_bound, check_quantization
from lpcrit.function_model import Box, PowerProfile


def true_norm(f, p):
    if isinstance(f, Box):
        return (f.hi - f.lo) ** (1 / p)
    return float(f.norm_p(p).mid)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=8, help="grid points per axis for t and s")
    args = ap.parse_args()
    ts = np.linspace(0.2, 6.0, args.points)
    ss = np.linspace(0.3, 3.0, args.points)
    fns = [Box(0, 1), Box(-2, 3), PowerProfile(1.5)]
    worst = np.inf
    print(f"{'function':<22}{'t':>8}{'s':>8}{'p':>5}{'bound':>14}{'ratio':>10}")
    for f, t, s, p in itertools.product(fns, ts, ss, (1.0, 2.0, 4.0)):
        if not check_quantization(float(t), float(s)).assertive:
            continue
        cert = certify_bound(f, float(t), float(s), p)
        ratio = cert.bound / true_norm(f, p)
        worst = min(worst, ratio)
        print(f"{f!r:<22}{t:8.3f}{s:8.3f}{p:5.1f}{cert.bound:14.5g}{ratio:10.3f}")
    print(f"smallest ratio: {worst:.4f}")


if __name__ == "__main__":
    main()
