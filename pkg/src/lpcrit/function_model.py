"""Measurable functions used by the criterion and its counterexamples.

All models are immutable and vectorized: calling a model on an array of
points returns an array of values.  1D models take shape (m,), nD models
take shape (m, n).  Indicator models return exactly 0.0 or 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .certified import Enclosure, PowerEnvelope
from .lattice import count_layer_full_array, simplex_volume


class FunctionModel:
    dim: int = 1

    def __call__(self, x):
        raise NotImplementedError

    def dilate(self, a) -> "FunctionModel":
        """Model of x -> f(a x)."""
        _check_dilation(a)
        if np.all(np.asarray(a) == 1):
            return self
        return Dilated(self, a)

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_dilation(a) -> None:
    if np.any(np.asarray(a, dtype=float) == 0):
        raise ValueError("dilation factor must be nonzero")


def evaluate(f: FunctionModel, x) -> float:
    """Pointwise value of ``f`` at a single point."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation point must be finite")
    pts = x.reshape(1) if f.dim == 1 else x.reshape(1, f.dim)
    return float(np.asarray(f(pts)).reshape(-1)[0])


@dataclass(frozen=True)
class Dilated(FunctionModel):
    base: FunctionModel
    factor: float

    @property
    def dim(self):
        return self.base.dim

    def __call__(self, x):
        return self.base(np.asarray(x, dtype=float) * self.factor)

    def mass_scale(self) -> float:
        """Factor by which every p-mass is multiplied: |a|^(-n)."""
        return abs(self.factor) ** (-self.dim)

    def to_dict(self):
        return {"kind": "dilated", "factor": self.factor, "base": self.base.to_dict()}


# ---------------------------------------------------------------------------
# 1D test functions


@dataclass(frozen=True)
class Box(FunctionModel):
    """Indicator of the closed interval [lo, hi]."""

    lo: float
    hi: float
    kind = "box"

    def __post_init__(self):
        if not self.hi >= self.lo:
            raise ValueError(f"box needs hi >= lo, got [{self.lo}, {self.hi}]")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x >= self.lo) & (x <= self.hi)).astype(float)

    def dilate(self, a):
        _check_dilation(a)
        if a == 1:
            return self
        e = sorted((self.lo / a, self.hi / a))
        return Box(e[0], e[1])

    def norm_p(self, p: float) -> Enclosure:
        return Enclosure.point((self.hi - self.lo) ** (1.0 / p))

    def to_dict(self):
        return {"kind": "box", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class PowerProfile(FunctionModel):
    """(1 + |x|)^(-alpha); alpha = 0 is the constant 1."""

    alpha: float
    kind = "power"

    def __call__(self, x):
        return (1.0 + np.abs(np.asarray(x, dtype=float))) ** (-self.alpha)

    def in_lp(self, p: float) -> bool:
        return self.alpha * p > 1

    def norm_p(self, p: float) -> Enclosure:
        if not self.in_lp(p):
            raise ValueError(f"(1+|x|)^-{self.alpha} is not in L^{p}")
        v = (2.0 / (self.alpha * p - 1)) ** (1.0 / p)
        return Enclosure(v * (1 - 1e-15), v * (1 + 1e-15))

    def to_dict(self):
        return {"kind": "power", "alpha": self.alpha}


@dataclass(frozen=True)
class TruncatedReciprocal(FunctionModel):
    """1/x on (0, 1), zero elsewhere; not in any L^p with p >= 1."""

    kind = "reciprocal"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        return np.where(inside, 1.0 / np.where(inside, x, 1.0), 0.0)

    def to_dict(self):
        return {"kind": "reciprocal"}


# ---------------------------------------------------------------------------
# indicator families


def _signed_order(K: int) -> np.ndarray:
    """0, 1, -1, 2, -2, ..., K, -K."""
    k = np.arange(1, K + 1)
    return np.concatenate([[0], np.stack([k, -k], axis=1).ravel()])


@dataclass(frozen=True)
class IntervalFamily1D(FunctionModel):
    """Indicator of the union of scale * (k*period + [lower(k), upper(k)]).

    ``lower``/``upper`` are vectorized over integer arrays and must satisfy
    0 <= lower(k) <= upper(k) <= period, which keeps every interval inside
    its own period cell.  ``length_envelope`` bounds upper(k) - lower(k) by a
    power of |k| and is what lets downstream series certify tails.
    """

    lower: Callable[[np.ndarray], np.ndarray]
    upper: Callable[[np.ndarray], np.ndarray]
    period: float = math.pi
    scale: float = 1.0
    index_range: tuple[int | None, int | None] = (None, None)
    length_envelope: PowerEnvelope | None = None
    name: str = "interval-family"

    def _in_range(self, k):
        lo, hi = self.index_range
        ok = np.ones(np.shape(k), dtype=bool)
        if lo is not None:
            ok &= k >= lo
        if hi is not None:
            ok &= k <= hi
        return ok

    def interval_of(self, k: int) -> tuple[float, float]:
        if not self._in_range(np.asarray(k)):
            raise IndexError(f"index {k} outside {self.index_range}")
        kk = np.asarray([k])
        base = k * self.period
        a = self.scale * (base + float(self.lower(kk)[0]))
        b = self.scale * (base + float(self.upper(kk)[0]))
        return (a, b) if a <= b else (b, a)

    def indices(self, K: int) -> np.ndarray:
        """Indices with |k| <= K in enumeration order (increasing |k|)."""
        ks = _signed_order(K)
        return ks[self._in_range(ks)]

    def lengths(self, K: int) -> np.ndarray:
        ks = self.indices(K)
        return abs(self.scale) * (self.upper(ks) - self.lower(ks))

    def mass_p(self, p: float, K: int) -> float:
        """Integral of |f|^p over the intervals with |k| <= K (p-independent)."""
        return math.fsum(self.lengths(K).tolist())

    def check_disjoint(self, K: int) -> bool:
        ks = self.indices(K)
        lo, hi = self.lower(ks), self.upper(ks)
        if np.any(lo < 0) or np.any(hi < lo) or np.any(hi > self.period):
            return False
        ivs = sorted(self.interval_of(int(k)) for k in ks)
        return all(a[1] <= b[0] for a, b in zip(ivs[:-1], ivs[1:]))

    def __call__(self, x):
        y = np.asarray(x, dtype=float) / self.scale
        k = np.floor(y / self.period).astype(np.int64)
        local = y - k * self.period
        hit = (local >= self.lower(k)) & (local <= self.upper(k)) & self._in_range(k)
        # a point exactly at the right end of the previous cell's interval
        k1 = k - 1
        local1 = y - k1 * self.period
        hit |= (local1 <= self.upper(k1)) & (local1 >= self.lower(k1)) & self._in_range(k1)
        return hit.astype(float)

    def dilate(self, a):
        _check_dilation(a)
        if a == 1:
            return self
        return IntervalFamily1D(
            self.lower, self.upper, self.period, self.scale / a, self.index_range,
            self.length_envelope, self.name,
        )

    def to_dict(self):
        return {"kind": self.name, "scale": self.scale, "period": self.period}


@dataclass(frozen=True)
class SimplexND(FunctionModel):
    """Indicator of {xi >= 0, sum xi <= a} in R^n."""

    n: int
    a: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("simplex size must be positive")

    @property
    def dim(self):
        return self.n

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.n)
        return np.all(x >= 0, axis=1) & (x.sum(axis=1) <= self.a)

    def __call__(self, x):
        return self.contains(x).astype(float)

    @property
    def volume(self) -> float:
        return simplex_volume(self.n, self.a)

    def to_dict(self):
        return {"kind": "simplex", "n": self.n, "a": self.a}


@dataclass(frozen=True)
class SimplexFamilyND(FunctionModel):
    """Indicator of the union over kappa in Z^n of spacing*kappa + simplex(r(kappa)).

    The size depends on kappa through its l1-norm only: r(kappa) =
    radius(|kappa|_1).  Anchors sit on the grid diag(spacing) Z^n; with
    r <= 1 <= min(spacing) each simplex stays in its own grid cell.
    """

    n: int
    radius: Callable[[np.ndarray], np.ndarray]
    spacing: tuple[float, ...] = ()
    name: str = "simplex-family"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.spacing:
            object.__setattr__(self, "spacing", (math.pi,) * self.n)
        if len(self.spacing) != self.n:
            raise ValueError("spacing must have one entry per axis")
        if min(self.spacing) < 1:
            raise ValueError("anchor spacing below 1 would let simplices of size 1 overlap")

    @property
    def dim(self):
        return self.n

    def size(self, kappa) -> float:
        k = int(np.abs(np.asarray(kappa)).sum())
        return float(self.radius(np.asarray([k]))[0])

    def offset(self, kappa) -> np.ndarray:
        return np.asarray(self.spacing) * np.asarray(kappa, dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.n)
        sp = np.asarray(self.spacing)
        kappa = np.floor(x / sp)
        xi = x - kappa * sp
        r = self.radius(np.abs(kappa).sum(axis=1).astype(np.int64))
        return (np.all(xi >= 0, axis=1) & (xi.sum(axis=1) <= r)).astype(float)

    def layer_masses(self, K: int) -> np.ndarray:
        k = np.arange(K + 1)
        return count_layer_full_array(self.n, k) * self.radius(k) ** self.n / math.factorial(self.n)

    def mass_p(self, p: float, K: int) -> float:
        """Integral of |F|^p over the simplices with |kappa|_1 <= K."""
        return math.fsum(self.layer_masses(K).tolist())

    def check_disjoint(self, K: int) -> bool:
        r = self.radius(np.arange(K + 1))
        return bool(np.all(r <= 1.0) and np.all(r > 0) and min(self.spacing) >= 1.0)

    def to_dict(self):
        return {"kind": self.name, "n": self.n, "spacing": list(self.spacing), **self.params}


# ---------------------------------------------------------------------------
# products


def phi_norm_p(d: int, exponent: float, p: float) -> Enclosure:
    """p-th power of the L^p(R^d) norm of (1 + |y|^2)^(-exponent).

    Closed form pi^(d/2) Gamma(e p - d/2) / Gamma(e p); d = 0 gives 1.
    """
    if d == 0:
        return Enclosure.point(1.0)
    s = exponent * p
    if s <= d / 2:
        raise ValueError("profile not in L^p")
    v = math.exp(0.5 * d * math.log(math.pi) + gammaln(s - d / 2) - gammaln(s))
    return Enclosure(v * (1 - 1e-13), v * (1 + 1e-13))


@dataclass(frozen=True)
class ProductFunction(FunctionModel):
    """F(x) = head(y_head) * (1 + |y_tail|^2)^(-tail_exponent), y = C x.

    ``transform`` is the (n x n) matrix C (identity when None); the head
    reads the first ``head.dim`` coordinates of y and the radial tail the rest.
    """

    head: FunctionModel
    tail_dim: int
    tail_exponent: float
    transform: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.head.dim + self.tail_dim

    def tail(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1, self.tail_dim)
        return (1.0 + (y * y).sum(axis=1)) ** (-self.tail_exponent)

    def __call__(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        y = x if self.transform is None else x @ np.asarray(self.transform).T
        h = self.head.dim
        head_in = y[:, 0] if h == 1 else y[:, :h]
        out = np.asarray(self.head(head_in), dtype=float)
        if self.tail_dim:
            out = out * self.tail(y[:, h:])
        return out

    def phi_norm_p(self, p: float) -> Enclosure:
        return phi_norm_p(self.tail_dim, self.tail_exponent, p)

    def to_dict(self):
        return {
            "kind": "product",
            "head": self.head.to_dict(),
            "tail_dim": self.tail_dim,
            "tail_exponent": self.tail_exponent,
            "transform": None if self.transform is None else np.asarray(self.transform).tolist(),
            **self.params,
        }


# ---------------------------------------------------------------------------
# construction from descriptions


def model_from_dict(d: dict) -> FunctionModel:
    """Build a model from its JSON description (``kind`` plus parameters)."""
    from . import counterexamples as cx

    kind = d.get("kind")
    if kind == "box":
        return Box(float(d["lo"]), float(d["hi"]))
    if kind == "power":
        return PowerProfile(float(d["alpha"]))
    if kind in ("reciprocal", "recip"):
        return TruncatedReciprocal()
    if kind == "one_d_pi":
        return cx.make_one_d_pi(float(d.get("p", 2)))
    if kind == "lattice_nd":
        return cx.make_lattice_nd(int(d["n"]), float(d["gamma"]), float(d.get("p", 1)))
    if kind == "simplex":
        return SimplexND(int(d["n"]), float(d["a"]))
    raise ValueError(f"unknown function kind {kind!r}")


def parse_fn_spec(text: str) -> FunctionModel:
    """Short form used on the command line: ``box:0:1``, ``power:2``, ``recip``."""
    head, *args = text.split(":")
    if head == "box" and len(args) == 2:
        return Box(float(args[0]), float(args[1]))
    if head == "power" and len(args) == 1:
        return PowerProfile(float(args[0]))
    if head in ("recip", "reciprocal") and not args:
        return TruncatedReciprocal()
    if head == "one" and not args:
        return PowerProfile(0.0)
    raise ValueError(f"cannot parse function description {text!r}")
