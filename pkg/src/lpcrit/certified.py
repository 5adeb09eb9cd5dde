"""Certified enclosures for the integrals and series behind the criterion.

Everything here returns an :class:`Enclosure` (a closed real interval plus a
provenance tag) or a :class:`DivergenceCertificate`.  Divergence is never
represented by ``inf``: a divergent series is certified by exhibiting a
partial sum that provably exceeds a requested threshold.

Rounding model
--------------
All summed terms are nonnegative, so per-term relative rounding errors add
up to at most the same relative error on the total.  Partial sums are formed
with :func:`math.fsum` (correctly rounded, hence independent of summation
order) and every certified sum is widened by the relative slack
:data:`SUM_SLACK`, which covers a few dozen ulps of error per term.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

EPS = float(np.finfo(float).eps)
SUM_SLACK = 64 * EPS
CELL_SLACK = 4e-16  # absolute slack per unit length for |sin| evaluation near extrema/zeros

PROVENANCES = (
    "closed-form",
    "quadrature",
    "series-tail",
    "monte-carlo-estimate",
    "grid-bound",
)

THREADS_ENV = "LPCRIT_THREADS"


class NotSummableError(ValueError):
    """The integral-test tail cannot be certified for this series."""


class NotDivergentError(ValueError):
    """Divergence cannot be certified (the series is summable or undeclared)."""


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float
    provenance: str = "closed-form"

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("NaN endpoint")
        if self.lower > self.upper:
            raise ValueError(f"empty enclosure [{self.lower}, {self.upper}]")

    @classmethod
    def point(cls, value: float, provenance: str = "closed-form") -> "Enclosure":
        return cls(value, value, provenance)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.upper)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def scale(self, c: float) -> "Enclosure":
        """Multiply by a nonnegative constant."""
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        return Enclosure(self.lower * c, self.upper * c, self.provenance)

    def root(self, p: float) -> "Enclosure":
        """Enclosure of ``x ** (1/p)``, e.g. a norm from its p-th power."""
        lo = max(self.lower, 0.0) ** (1.0 / p)
        hi = self.upper ** (1.0 / p)
        return Enclosure(lo * (1 - 4 * EPS), hi * (1 + 4 * EPS), self.provenance)

    def __add__(self, other: "Enclosure") -> "Enclosure":
        prov = self.provenance if self.provenance == other.provenance else "series-tail"
        return Enclosure(
            math.nextafter(self.lower + other.lower, -math.inf),
            math.nextafter(self.upper + other.upper, math.inf),
            prov,
        )

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "provenance": self.provenance}


def _widen_sum(s: float, tail: float = 0.0, provenance: str = "series-tail") -> Enclosure:
    return Enclosure(s * (1 - SUM_SLACK), (s + tail) * (1 + SUM_SLACK), provenance)


# ---------------------------------------------------------------------------
# power-law envelopes and series


def _power_integral(lo, hi, e):
    """Integral of x**e over [lo, hi] for 0 < lo <= hi (mpmath-friendly)."""
    if e == -1:
        return mpmath.log(hi) - mpmath.log(lo)
    return (mpmath.mpf(hi) ** (e + 1) - mpmath.mpf(lo) ** (e + 1)) / (e + 1)


@dataclass(frozen=True)
class PowerEnvelope:
    """The sequence ``coef * (k + shift) ** exponent`` for ``k >= valid_from``.

    Used either as a dominating envelope (tails of convergent sums) or as a
    minorant (analytic lower bounds for divergent partial sums).  Both uses
    need the sequence to be monotone, which a pure power is.
    """

    coef: float
    exponent: float
    shift: float = 1.0
    valid_from: int = 0

    def __call__(self, k):
        return self.coef * (np.asarray(k, dtype=float) + self.shift) ** self.exponent

    def scaled(self, c: float) -> "PowerEnvelope":
        return replace(self, coef=self.coef * c)

    def tail_upper(self, K: int) -> float:
        """Bound on sum_{k > K} via the integral over [K, inf)."""
        if self.exponent >= -1:
            raise NotSummableError(
                f"envelope exponent {self.exponent:g} >= -1: integral-test tail diverges"
            )
        base = K + self.shift
        if base <= 0:
            raise NotSummableError("tail start must satisfy K + shift > 0")
        return self.coef * base ** (self.exponent + 1) / (-self.exponent - 1)

    def _bounds(self, k0, K):
        # decreasing: sum_{k0..K} f(k) >= int_{k0}^{K+1}; increasing: >= int_{k0-1}^{K}
        if self.exponent <= 0:
            return k0 + self.shift, K + 1 + self.shift
        return max(k0 - 1 + self.shift, 0), K + self.shift

    def partial_lower(self, k0: int, K: int):
        """Lower bound on sum_{k=k0}^{K} of the envelope (an mpmath number)."""
        if K < k0 or self.coef == 0:
            return mpmath.mpf(0)
        lo, hi = self._bounds(k0, K)
        if lo <= 0 and self.exponent <= -1:
            raise NotDivergentError("envelope singular at the start of the range")
        return self.coef * _power_integral(lo, hi, self.exponent)

    def solve_partial_lower(self, k0: int, target: float) -> int:
        """Smallest K >= k0 (up to a few steps) with partial_lower(k0, K) >= target."""
        if self.exponent < -1:
            raise NotDivergentError("summable envelope cannot reach arbitrary thresholds")
        if self.coef <= 0:
            raise NotDivergentError("envelope has no mass")
        if target <= 0:
            return k0
        e = self.exponent
        with mpmath.workdps(40):
            need = mpmath.mpf(target) / self.coef
            lo, _ = self._bounds(k0, k0)
            lo = mpmath.mpf(lo)
            if e == -1:
                hi = lo * mpmath.exp(need)
            else:
                hi = (lo ** (e + 1) + (e + 1) * need) ** (1 / mpmath.mpf(e + 1))
            offset = 1 + self.shift if e <= 0 else self.shift
            K = max(int(mpmath.ceil(hi - offset)), k0)
            while self.partial_lower(k0, K) < target:
                K += 1
            while K > k0 and self.partial_lower(k0, K - 1) >= target:
                K -= 1
        return K


@dataclass(frozen=True)
class SeriesSpec:
    """A series of nonnegative terms ``term(k)``, ``k >= start``.

    ``term`` must accept an integer numpy array.  ``upper_envelope`` (terms
    are dominated by it from ``valid_from`` on) enables certified tails;
    ``lower_envelope`` (terms dominate it) enables analytic divergence
    certificates without enumeration.
    """

    term: Callable[[np.ndarray], np.ndarray]
    start: int = 0
    upper_envelope: PowerEnvelope | None = None
    lower_envelope: PowerEnvelope | None = None
    label: str = ""

    def terms(self, lo: int, hi: int) -> np.ndarray:
        """Terms for k = lo..hi inclusive."""
        lo = max(lo, self.start)
        if hi < lo:
            return np.zeros(0)
        k = np.arange(lo, hi + 1, dtype=np.int64)
        return np.asarray(self.term(k), dtype=float) * np.ones(k.shape)

    def partial_sum(self, K: int, block: int = 1 << 18) -> float:
        """Correctly rounded sum of terms start..K of the computed terms."""
        parts = []
        for lo in range(self.start, K + 1, block):
            parts.extend(self.terms(lo, min(lo + block - 1, K)).tolist())
        return math.fsum(parts)

    def cumulative(self, K: int) -> np.ndarray:
        return np.cumsum(self.terms(self.start, K))

    def scaled(self, c: float, label: str | None = None) -> "SeriesSpec":
        """The series ``c * term``; use a certified lower/upper value of c as appropriate."""
        if c < 0:
            raise ValueError("scale must be nonnegative")
        term = self.term
        return SeriesSpec(
            term=lambda k: c * np.asarray(term(k), dtype=float),
            start=self.start,
            upper_envelope=self.upper_envelope.scaled(c) if self.upper_envelope else None,
            lower_envelope=self.lower_envelope.scaled(c) if self.lower_envelope else None,
            label=label if label is not None else self.label,
        )


def sum_with_tail(series: SeriesSpec, K: int, check_envelope: bool = True) -> Enclosure:
    """Enclose the full series: exact partial sum to K plus an integral-test tail.

    Refuses (``NotSummableError``) when no envelope is declared, when the
    envelope is not summable, or when it is not valid past K.
    """
    env = series.upper_envelope
    if env is None:
        raise NotSummableError(f"{series.label or 'series'}: no monotone envelope declared")
    if env.exponent >= -1:
        raise NotSummableError(
            f"{series.label or 'series'}: envelope exponent {env.exponent:g} >= -1, "
            "tail test refuses"
        )
    if env.valid_from > K + 1:
        raise NotSummableError(
            f"envelope only valid from k={env.valid_from}, cutoff K={K} too small"
        )
    if check_envelope:
        probe = np.unique(
            np.concatenate(
                [np.arange(K + 1, K + 257), (K + 1) * np.geomspace(1, 1e4, 64).astype(np.int64)]
            )
        )
        t = np.asarray(series.term(probe), dtype=float) * np.ones(probe.shape)
        bad = t > env(probe) * (1 + 1e-9)
        if bad.any():
            k = int(probe[np.argmax(bad)])
            raise NotSummableError(f"declared envelope does not dominate term at k={k}")
    s = series.partial_sum(K)
    tail = env.tail_upper(K) if env.coef else 0.0
    return _widen_sum(s, tail)


@dataclass(frozen=True)
class DivergenceCertificate:
    """Partial sum up to ``witness`` is at least ``lower_bound`` >= ``threshold``."""

    threshold: float
    witness: int
    lower_bound: float
    formula: str
    direct_sum: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lower_bound", float(self.lower_bound))
        object.__setattr__(self, "witness", int(self.witness))
        if self.direct_sum is not None:
            object.__setattr__(self, "direct_sum", float(self.direct_sum))
        if self.lower_bound < self.threshold:
            raise ValueError("certificate lower bound below threshold")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "witness": self.witness,
            "lower_bound": self.lower_bound,
            "formula": self.formula,
            "direct_sum": self.direct_sum,
        }


def _analytic_lower(series: SeriesSpec, K: int):
    env = series.lower_envelope
    k0 = max(series.start, env.valid_from)
    head = series.partial_sum(k0 - 1) if k0 > series.start else 0.0
    return head, k0, head + float(env.partial_lower(k0, K))


def certify_divergence(
    series: SeriesSpec,
    M: float,
    witness: int | None = None,
    max_terms: int = 10**6,
    cross_check_limit: int = 10**6,
) -> DivergenceCertificate:
    """Find (or check) an index K whose certified partial sum is >= M.

    Enumeration is tried first (minimal K, exact partial sums).  When M is
    out of enumeration range, the declared lower envelope gives an analytic
    integral-test bound, so astronomically large K never get enumerated.
    """
    env_up = series.upper_envelope
    if env_up is not None and env_up.exponent < -1:
        raise NotDivergentError(
            f"{series.label or 'series'}: dominating envelope exponent {env_up.exponent:g} < -1, "
            "series is summable"
        )
    keep = 1 - SUM_SLACK
    if witness is not None:
        if witness - series.start < max_terms:
            s = series.partial_sum(witness)
            lower, formula, direct = s * keep, "enumeration", s
        else:
            if series.lower_envelope is None:
                raise NotDivergentError("witness beyond enumeration range and no lower envelope")
            _, k0, val = _analytic_lower(series, witness)
            lower, formula, direct = val * keep, _envelope_formula(series, k0), None
        if lower < M:
            raise ValueError(f"partial sum at K={witness} is {lower:.6g} < {M}")
        return DivergenceCertificate(M, witness, lower, formula, direct)

    if M <= 0:
        s = series.partial_sum(series.start)
        return DivergenceCertificate(M, series.start, max(s * keep, 0.0), "trivial", s)

    block = 1 << 16
    running = 0.0
    for lo in range(series.start, series.start + max_terms, block):
        hi = min(lo + block - 1, series.start + max_terms - 1)
        with np.errstate(over="ignore"):  # fast-growing terms may reach inf past the witness
            cum = running + np.cumsum(series.terms(lo, hi))
        hit = np.nonzero(cum * keep >= M)[0]
        if hit.size:
            K = lo + int(hit[0])
            s = series.partial_sum(K)
            while s * keep < M:  # cumsum vs fsum rounding
                K += 1
                s = series.partial_sum(K)
            return DivergenceCertificate(M, K, s * keep, "enumeration", s)
        running = float(cum[-1]) if cum.size else running

    env = series.lower_envelope
    if env is None or env.exponent < -1:
        raise NotDivergentError(
            f"{series.label or 'series'}: threshold {M} not reached in {max_terms} terms "
            "and no divergent lower envelope declared"
        )
    head, k0, _ = _analytic_lower(series, series.start - 1)
    K = env.solve_partial_lower(k0, M / keep - head)
    _, _, val = _analytic_lower(series, K)
    direct = None
    if K - series.start < cross_check_limit:
        direct = series.partial_sum(K)
        if direct < val * (1 - 1e-12):
            raise AssertionError("analytic lower bound exceeds the direct partial sum")
    return DivergenceCertificate(M, K, val * keep, _envelope_formula(series, k0), direct)


def _envelope_formula(series: SeriesSpec, k0: int) -> str:
    e = series.lower_envelope
    return (
        f"integral-test-lower: S(K) >= S({k0 - 1}) + int_{k0}^{{K+1}} "
        f"{e.coef:.12g}*(x+{e.shift:g})^{e.exponent:g} dx"
    )


# ---------------------------------------------------------------------------
# rigorous integrals of monotone-piecewise integrands


def cell_grid(breaks: Sequence[float], cells) -> tuple[np.ndarray, np.ndarray]:
    """Subdivide each piece [breaks[i], breaks[i+1]] into ``cells`` equal cells.

    ``cells`` is an int or a per-piece integer array.  Returns left and right
    cell endpoints.
    """
    b = np.asarray(breaks, dtype=float)
    a, c = b[:-1], b[1:]
    counts = np.broadcast_to(np.asarray(cells, dtype=np.int64), a.shape)
    if np.all(counts == counts.flat[0]) and counts.size:
        m = int(counts.flat[0])
        t = np.linspace(0.0, 1.0, m + 1)
        left = (a[:, None] + (c - a)[:, None] * t[None, :-1]).ravel()
        right = (a[:, None] + (c - a)[:, None] * t[None, 1:]).ravel()
        right[m - 1 :: m] = c
        return left, right
    lefts, rights = [], []
    for lo, hi, m in zip(a, c, counts):
        t = np.linspace(lo, hi, int(m) + 1)
        t[-1] = hi
        lefts.append(t[:-1])
        rights.append(t[1:])
    return np.concatenate(lefts), np.concatenate(rights)


def monotone_product_bounds(
    factors: Iterable[Callable[[np.ndarray], np.ndarray]],
    breaks: Sequence[float],
    cells=256,
) -> tuple[float, float]:
    """Lower/upper Riemann bounds for a product of nonnegative factors.

    Every factor must be monotone on each piece between consecutive breaks,
    so its extreme values on a cell are attained at the cell endpoints.
    """
    left, right = cell_grid(breaks, cells)
    w = right - left
    lo = np.ones_like(w)
    hi = np.ones_like(w)
    for f in factors:
        fl, fr = f(left), f(right)
        lo *= np.minimum(fl, fr)
        hi *= np.maximum(fl, fr)
    total_w = math.fsum(w.tolist())
    lower = math.fsum((w * lo).tolist()) * (1 - SUM_SLACK) - CELL_SLACK * total_w
    upper = math.fsum((w * hi).tolist()) * (1 + SUM_SLACK) + CELL_SLACK * total_w
    return max(lower, 0.0), upper


def _half_pi_breaks(lo: float, hi: float) -> np.ndarray:
    h = math.pi / 2
    j0, j1 = math.floor(lo / h) + 1, math.ceil(hi / h) - 1
    inner = [j * h for j in range(j0, j1 + 1) if lo < j * h < hi]
    return np.array([lo, *inner, hi])


def _dist_cap_integral(lo: float, hi: float, p: float) -> float:
    """Integral over [lo, hi] of min(1, dist(t, pi Z))**p, which dominates |sin t|**p."""
    pts = {lo, hi}
    for k in range(math.floor(lo / math.pi) - 1, math.ceil(hi / math.pi) + 2):
        for q in (k * math.pi, k * math.pi + 1, k * math.pi - 1, k * math.pi + math.pi / 2):
            if lo < q < hi:
                pts.add(q)
    pts = sorted(pts)
    total = []
    for a, b in zip(pts[:-1], pts[1:]):
        c = round(0.5 * (a + b) / math.pi) * math.pi
        da, db = abs(a - c), abs(b - c)
        if max(da, db) <= 1:
            total.append(abs(db ** (p + 1) - da ** (p + 1)) / (p + 1))
        else:
            total.append(b - a)
    return math.fsum(total) * (1 + SUM_SLACK)


def _adaptive_simpson(f, a, b, tol, depth=50):
    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return rec(a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) + rec(
            m, fm, b, fb, rm, frm, right, tol / 2, depth - 1
        )

    fa, fb = f(a), f(b)
    m, fm, whole = simpson(a, fa, b, fb)
    return rec(a, fa, b, fb, m, fm, whole, tol, depth)


def sin_power_integral(
    lo: float, hi: float, p: float, cells: int = 512, mode: str = "rigorous"
) -> Enclosure:
    """Enclose the integral of |sin t|**p over [lo, hi].

    ``mode="rigorous"`` splits at multiples of pi/2 (where |sin| changes
    monotonicity) and takes endpoint Riemann bounds, then caps the upper
    bound by the integral of min(1, dist(t, pi Z))**p.  ``mode="fast"`` is a
    non-certified adaptive Simpson estimate.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if hi < lo:
        raise ValueError(f"reversed interval [{lo}, {hi}]")
    if hi == lo:
        return Enclosure.point(0.0)
    j = math.floor(lo / math.pi)
    lo, hi = lo - j * math.pi, hi - j * math.pi
    breaks = _half_pi_breaks(lo, hi)
    if mode == "fast":
        f = lambda t: abs(math.sin(t)) ** p  # noqa: E731
        val = math.fsum(
            _adaptive_simpson(f, a, b, 1e-13) for a, b in zip(breaks[:-1], breaks[1:])
        )
        return Enclosure.point(val, "quadrature")
    if mode != "rigorous":
        raise ValueError(f"unknown mode {mode!r}")
    lower, upper = monotone_product_bounds(
        [lambda t: np.abs(np.sin(t)) ** p], breaks, cells
    )
    upper = min(upper, _dist_cap_integral(lo, hi, p))
    return Enclosure(lower, max(upper, lower), "quadrature")


# ---------------------------------------------------------------------------
# Monte Carlo cross-check


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def monte_carlo_mass(
    f: Callable[[np.ndarray], np.ndarray],
    box: Sequence[tuple[float, float]],
    p: float,
    samples: int,
    seed: int,
    block: int = 1 << 15,
) -> Enclosure:
    """Mean +/- 3 standard errors for the integral of |f|**p over ``box``.

    Samples are drawn in fixed blocks, each from its own spawned seed, so the
    result does not depend on the thread count (``LPCRIT_THREADS``).
    ``f`` receives an array of shape (m,) in 1D and (m, n) otherwise.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    widths = box[:, 1] - box[:, 0]
    if np.any(widths <= 0):
        raise ValueError("empty box")
    n = box.shape[0]
    vol = float(np.prod(widths))
    sizes = [block] * (samples // block)
    if samples % block:
        sizes.append(samples % block)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        rng = np.random.default_rng(seqs[i])
        u = rng.random((sizes[i], n))
        x = box[:, 0] + u * widths
        vals = np.abs(np.asarray(f(x[:, 0] if n == 1 else x), dtype=float)) ** p
        return math.fsum(vals.tolist()), math.fsum((vals * vals).tolist())

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        parts = list(pool.map(run, range(len(sizes))))
    s1 = math.fsum(a for a, _ in parts)
    s2 = math.fsum(b for _, b in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    se = math.sqrt(var / samples)
    return Enclosure(vol * (mean - 3 * se), vol * (mean + 3 * se), "monte-carlo-estimate")
