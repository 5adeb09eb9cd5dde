"""Lattice layers of Z^n and exact integrals over the standard simplex.

A layer is the set of lattice points with a fixed l1-norm k.  Counting is
exact (binomial closed forms, arbitrary-precision integers); the two-sided
power sandwich for the nonnegative layer is

    (k+1)^(n-1) / (n-1)!  <=  C(k+n-1, n-1)  <=  (k+1)^(n-1),

which replaces the unspecified constants of the usual asymptotic statement.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Callable, Iterator

import numpy as np
from scipy.special import comb, gammaln

from .certified import SUM_SLACK, Enclosure, PowerEnvelope, SeriesSpec, sum_with_tail

MOMENT_REL_ERR = 1e-12


def _check_nk(n: int, k: int) -> None:
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")


def count_layer_nonneg(n: int, k: int) -> int:
    """#{kappa in Z^n_+ : sum kappa_j = k} = C(k+n-1, n-1)."""
    _check_nk(n, k)
    return math.comb(k + n - 1, n - 1)


def count_layer_full(n: int, k: int) -> int:
    """#{kappa in Z^n : sum |kappa_j| = k}.

    Choose the j nonzero coordinates, their signs, and a composition of k
    into j positive parts.
    """
    _check_nk(n, k)
    if k == 0:
        return 1
    return sum(
        2**j * math.comb(n, j) * math.comb(k - 1, j - 1) for j in range(1, min(n, k) + 1)
    )


def count_layer_full_array(n: int, k: np.ndarray) -> np.ndarray:
    """Vectorized float version of :func:`count_layer_full` (n = 0 allowed)."""
    k = np.asarray(k)
    if n == 0:
        return (k == 0).astype(float)
    out = np.zeros(k.shape, dtype=float)
    for j in range(1, n + 1):
        out += 2.0**j * math.comb(n, j) * comb(k - 1, j - 1)
    return np.where(k == 0, 1.0, out)


def sandwich_constants(n: int) -> tuple[float, float]:
    """Explicit (D1, D2) with D1 (k+1)^(n-1) <= C(k+n-1, n-1) <= D2 (k+1)^(n-1)."""
    return 1.0 / math.factorial(n - 1), 1.0


def enumerate_layer(n: int, k: int, orthant: bool = False) -> Iterator[tuple[int, ...]]:
    """Yield every kappa of l1-norm k, in Z^n_+ if ``orthant`` else in Z^n."""
    _check_nk(n, k)

    def compositions(n, k):
        if n == 1:
            yield (k,)
            return
        for first in range(k + 1):
            for rest in compositions(n - 1, k - first):
                yield (first, *rest)

    for c in compositions(n, k):
        if orthant:
            yield c
            continue
        nz = [i for i, v in enumerate(c) if v]
        for signs in product((1, -1), repeat=len(nz)):
            v = list(c)
            for i, sgn in zip(nz, signs):
                v[i] *= sgn
            yield tuple(v)


def lattice_ball(n: int, K: int) -> np.ndarray:
    """All kappa in Z^n with l1-norm <= K, as an (m, n) integer array."""
    axis = np.arange(-K, K + 1)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return grid[np.abs(grid).sum(axis=1) <= K]


def simplex_volume(n: int, a: float) -> float:
    """Volume a^n / n! of {xi >= 0, sum xi <= a}."""
    if a <= 0:
        raise ValueError("simplex size must be positive")
    return a**n / math.factorial(n)


def simplex_moment(n: int, a: float, p: float) -> float:
    """Integral of xi_j**p over the simplex of size a: a^(n+p) Gamma(p+1) / Gamma(n+p+1).

    Integer p uses exact factorials, so p = 1 reproduces a^(n+1)/(n+1)!
    bit for bit; real p goes through log-Gamma.
    """
    if a <= 0:
        raise ValueError("simplex size must be positive")
    if p < 0:
        raise ValueError("moment order must be nonnegative")
    if float(p).is_integer():
        p = int(p)
        return a ** (n + p) * math.factorial(p) / math.factorial(n + p)
    return a ** (n + p) * math.exp(gammaln(p + 1) - gammaln(n + p + 1))


def simplex_moment_enclosure(n: int, a: float, p: float) -> Enclosure:
    v = simplex_moment(n, a, p)
    rel = 8 * np.finfo(float).eps if float(p).is_integer() else MOMENT_REL_ERR
    return Enclosure(v * (1 - rel), v * (1 + rel), "closed-form")


def moment_coefficient(n: int, p: float) -> float:
    """Gamma(p+1)/Gamma(n+p+1), the moment of the unit simplex."""
    return simplex_moment(n, 1.0, p)


def layer_sum(
    n: int,
    weight: Callable[[np.ndarray], np.ndarray],
    K: int,
    envelope: PowerEnvelope | None = None,
) -> Enclosure:
    """Enclose sum over kappa in Z^n of weight(|kappa|_1).

    ``weight`` is vectorized over layer indices; ``envelope`` must dominate
    it (as a function of k) for k > K and be a decreasing power.  The tail
    uses count_full(n, k) <= 2^n (k+1)^(n-1).  With ``envelope=None`` the
    weight must vanish beyond K.
    """
    series = layer_series(n, weight, envelope)
    if envelope is None:
        s = series.partial_sum(K)
        return Enclosure(s * (1 - SUM_SLACK), s * (1 + SUM_SLACK), "series-tail")
    return sum_with_tail(series, K)


def layer_series(
    n: int, weight: Callable[[np.ndarray], np.ndarray], envelope: PowerEnvelope | None = None
) -> SeriesSpec:
    """Per-layer series count_full(n, k) * weight(k), with its envelope lifted by the count bound."""
    up = None
    if envelope is not None:
        if envelope.shift != 1.0:
            raise ValueError("layer envelopes are expressed in powers of (1 + k)")
        up = PowerEnvelope(
            2.0**n * envelope.coef, envelope.exponent + n - 1, 1.0, envelope.valid_from
        )
    return SeriesSpec(
        term=lambda k: count_layer_full_array(n, k) * np.asarray(weight(k), dtype=float),
        upper_envelope=up,
        label=f"layer sum n={n}",
    )
