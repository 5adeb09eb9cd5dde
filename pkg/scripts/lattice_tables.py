"""Tables of lattice layer counts and of the lattice counterexample's certified sums."""

import argparse

from lpcrit.counterexamples import verify_lattice_nd
from lpcrit.lattice import count_layer_full, count_layer_nonneg, sandwich_constants


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--max-k", type=int, default=10)
    args = ap.parse_args()

    print("points of Z^n_+ with |v|_1 = k")
    print("n\\k " + "".join(f"{k:>9}" for k in range(args.max_k + 1)))
    for n in range(1, args.max_n + 1):
        print(f"{n:<4}" + "".join(f"{count_layer_nonneg(n, k):>9}" for k in range(args.max_k + 1)))
    print("\npoints of Z^n with |v|_1 = k")
    for n in range(1, args.max_n + 1):
        print(f"{n:<4}" + "".join(f"{count_layer_full(n, k):>9}" for k in range(args.max_k + 1)))
    print("\nsandwich constants (k+1)^(n-1) * [D1, D2]")
    for n in range(1, args.max_n + 1):
        d1, d2 = sandwich_constants(n)
        print(f"n={n}: D1={d1:.6g} D2={d2:.6g}")

    print("\nlattice counterexample, p = 1, M = 5")
    print(f"{'n':>3}{'gamma':>8}{'witness':>10}{'sine upper':>14}{'shift upper':>14}")
    for n, gamma in [(1, 0.6), (2, 0.7), (2, 0.9), (3, 0.8), (3, 1.0)]:
        rep = verify_lattice_nd(n, gamma, 1, M=5)
        print(f"{n:>3}{gamma:>8}{rep.mass[0].witness:>10}{rep.sine_mass.upper:>14.6g}{rep.shift_mass.upper:>14.6g}")


if __name__ == "__main__":
    main()
