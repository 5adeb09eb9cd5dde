"""Exploratory: how the criterion constant grows as t s approaches pi Z.

Not a certified computation.  Prints 1/sin(delta) against the distance of
|t s| to pi Z and fits the log-log slope, which should be close to -1.
"""

import argparse
import math

import numpy as np

from lpcrit.criterion import build_decomposition


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--decades", type=int, default=8)
    args = ap.parse_args()
    dist = 10.0 ** -np.arange(1, args.decades + 1)
    consts = []
    print(f"{'distance':>12}{'delta':>14}{'1/sin(delta)':>16}")
    for d in dist:
        cert = build_decomposition(math.pi + d, 1.0, 2.0)
        consts.append(cert.multiplier_norm)
        print(f"{d:12.1e}{cert.delta:14.4e}{cert.multiplier_norm:16.6g}")
    slope = np.polyfit(np.log(dist), np.log(consts), 1)[0]
    print(f"log-log slope: {slope:.4f}")


if __name__ == "__main__":
    main()
