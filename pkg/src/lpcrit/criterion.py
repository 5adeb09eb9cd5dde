"""Quantitative p-integrability criterion from a shift and a sine condition.

If dist(|t s|, pi Z) > 0, then for every measurable f

    ||f||_p <= (1 / sin d) * (2 ||sin(s .) f||_p + ||f(. + t) - f||_p)

with d = min(tau, pi - tau) / 4 and |t s| = m pi + tau.  In the rescaled
variable xi = |s| x (shift T = |t s|) the three steps are: on the complement
of E = {dist(xi, pi Z) <= d} divide by sin xi; on E write F(xi) as the shift
of sin(xi) F(xi + T) = sin(xi) F(xi) + sin(xi) Delta(xi), times 1/sin(xi - T);
both multipliers are bounded by 1/sin d because 2d <= tau <= pi - 2d.  Both
sides scale by |s|^(1/p), so the constant is the same in the original variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import singledispatch

import numpy as np
from scipy.linalg import null_space

from .certified import (
    EPS,
    Enclosure,
    cell_grid,
    monotone_product_bounds,
    sin_power_integral,
    SUM_SLACK,
)
from .function_model import Box, FunctionModel, PowerProfile, TruncatedReciprocal

DEFAULT_EPS_Q = 1e-9


# ---------------------------------------------------------------------------
# reals that may carry an exact factor of pi


@dataclass(frozen=True)
class Real:
    """coef * pi**pi_power with an exact rational coefficient."""

    coef: Fraction
    pi_power: int = 0

    def __float__(self):
        return float(self.coef) * math.pi**self.pi_power

    def __mul__(self, other):
        o = as_real(other)
        if isinstance(o, Real):
            return Real(self.coef * o.coef, self.pi_power + o.pi_power)
        return float(self) * o

    __rmul__ = __mul__

    def __str__(self):
        c = str(self.coef)
        return c if self.pi_power == 0 else f"{c}*pi" if self.pi_power == 1 else f"{c}*pi^{self.pi_power}"


_REAL_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?"
    r"\s*(?P<star>\*)?\s*(?P<pi>pi|π)?\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_real(text: str) -> Real:
    """Parse ``1.5``, ``pi``, ``-pi/2``, ``3pi``, ``3*pi/2``, ``2/3`` exactly."""
    m = _REAL_RE.match(str(text))
    if not m or not (m["num"] or m["pi"]) or (m["star"] and not (m["num"] and m["pi"])):
        raise ValueError(f"cannot parse real number {text!r}")
    coef = Fraction(m["num"]) if m["num"] else Fraction(1)
    if m["den"]:
        den = Fraction(m["den"])
        if den == 0:
            raise ValueError("division by zero")
        coef /= den
    if m["sign"] == "-":
        coef = -coef
    return Real(coef, 1 if m["pi"] else 0)


def as_real(x):
    """Real for exact inputs (Real, int, Fraction, str); float otherwise."""
    if isinstance(x, Real):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Real(Fraction(x))
    if isinstance(x, str):
        return parse_real(x)
    return float(x)


# ---------------------------------------------------------------------------
# quantization


class QuantizationViolated(ValueError):
    def __init__(self, report: "QuantizationReport"):
        super().__init__(
            f"t*s = {report.T:.17g} is within {report.eps:g} of pi*Z "
            f"(distance {report.distance:.3g}); no bound exists"
        )
        self.report = report


@dataclass(frozen=True)
class QuantizationReport:
    t: float
    s: float
    T: float
    m: int
    tau: float
    distance: float
    verdict: str
    eps: float
    exact: bool

    @property
    def assertive(self) -> bool:
        return self.verdict == "assertive"

    def to_dict(self) -> dict:
        return {
            "t": self.t, "s": self.s, "T": self.T, "m": self.m, "tau": self.tau,
            "distance": self.distance, "verdict": self.verdict, "eps": self.eps,
            "exact": self.exact,
        }


def check_quantization(t, s, eps: float = DEFAULT_EPS_Q) -> QuantizationReport:
    """Decompose |t s| = m pi + tau and decide whether t s is eps-close to pi Z.

    Exact inputs (``Real`` with pi factors, ints, strings like ``"3pi/2"``)
    are decided in rational arithmetic, so truncated decimals of pi never
    slip past the check.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    tr, sr = as_real(t), as_real(s)
    prod = tr * sr if isinstance(tr, Real) else sr * tr if isinstance(sr, Real) else tr * sr
    if not math.isfinite(float(prod)):
        raise ValueError("t and s must be finite")
    exact = isinstance(prod, Real) and (prod.pi_power == 1 or prod.coef == 0)
    if exact:
        q = abs(prod.coef)
        m = math.floor(q)
        frac = q - m
        tau = float(frac) * math.pi
        distance = float(min(frac, 1 - frac)) * math.pi
    else:
        T = abs(float(prod))
        m = math.floor(T / math.pi)
        tau = T - m * math.pi
        if tau >= math.pi:
            m, tau = m + 1, tau - math.pi
        elif tau < 0:
            m, tau = m - 1, tau + math.pi
        distance = min(tau, math.pi - tau)
    verdict = "violated" if (distance < eps or distance == 0) else "assertive"
    return QuantizationReport(
        float(tr), float(sr), float(prod), int(m), tau, distance, verdict, eps, exact
    )


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class BoundCertificate:
    t: float
    s: float
    p: float
    m: int
    tau: float
    delta: float
    multiplier_norm: float
    e_set: str
    e_shift_check: bool
    input_norms: dict | None = None
    components: dict | None = None
    bound: float | None = None
    dim: int = 1
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "t": self.t, "s": self.s, "p": self.p, "m": self.m, "tau": self.tau,
            "delta": self.delta, "multiplier_norm": self.multiplier_norm,
            "e_set": self.e_set, "e_shift_check": self.e_shift_check,
            "input_norms": None if self.input_norms is None
            else {k: v.to_dict() for k, v in self.input_norms.items()},
            "components": self.components, "bound": self.bound, "dim": self.dim,
        }
        d.update(self.extra)
        return d


def default_delta(tau: float) -> float:
    return min(tau, math.pi - tau) / 4


def _dist_to_pi_z(x: np.ndarray) -> np.ndarray:
    r = np.mod(x, math.pi)
    return np.minimum(r, math.pi - r)


def e_shift_check(tau: float, delta: float, samples: int = 1025) -> bool:
    """Every sampled point of E = {dist(xi, pi Z) <= delta} lands outside int(E) after + tau."""
    u = np.linspace(-delta, delta, samples)
    shifted = np.concatenate([k * math.pi + u + tau for k in range(-3, 4)])
    return bool(np.all(_dist_to_pi_z(shifted) >= delta * (1 - 1e-9)))


def build_decomposition(
    t, s, p: float, delta: float | None = None, eps: float = DEFAULT_EPS_Q
) -> BoundCertificate:
    """Set E, multiplier norms and delta for an assertive pair; no function yet."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    q = check_quantization(t, s, eps)
    if not q.assertive:
        raise QuantizationViolated(q)
    tau = q.tau
    if delta is None:
        delta = default_delta(tau)
    elif not (0 < delta and 2 * delta <= tau <= math.pi - 2 * delta):
        raise ValueError(f"delta={delta} violates 2 delta <= tau <= pi - 2 delta for tau={tau}")
    mult = (1.0 / math.sin(delta)) * (1 + 8 * EPS)
    return BoundCertificate(
        t=q.t, s=q.s, p=p, m=q.m, tau=tau, delta=delta, multiplier_norm=mult,
        e_set=f"union_k [k*pi - {delta:.17g}, k*pi + {delta:.17g}] in xi = |s| x",
        e_shift_check=e_shift_check(tau, delta),
    )


def _finite_norms(shift: Enclosure, sine: Enclosure) -> None:
    for name, e in (("shift", shift), ("sine", sine)):
        if not isinstance(e, Enclosure) or not e.finite:
            raise ValueError(f"{name} norm must be a finite enclosure")


def _assemble(cert: BoundCertificate, shift: Enclosure, sine: Enclosure, **extra) -> BoundCertificate:
    _finite_norms(shift, sine)
    c = cert.multiplier_norm
    up = 1 + 8 * EPS
    return replace(
        cert,
        input_norms={"shift": shift, "sine": sine},
        components={"off_E": c * sine.upper * up, "on_E": c * (sine.upper + shift.upper) * up},
        bound=c * (2 * sine.upper + shift.upper) * up,
        extra={**cert.extra, **extra},
    )


def certify_bound(
    f: FunctionModel | None = None,
    t=None,
    s=None,
    p: float = 2.0,
    norms: tuple[Enclosure, Enclosure] | None = None,
    delta: float | None = None,
    eps: float = DEFAULT_EPS_Q,
) -> BoundCertificate:
    """Certified bound on ||f||_p from the shift and sine norms.

    Pass either a supported function model ``f`` (its norms are certified
    here) or ``norms=(shift_norm, sine_norm)`` as enclosures of the L^p
    norms themselves.
    """
    cert = build_decomposition(t, s, p, delta, eps)
    if norms is None:
        if f is None:
            raise ValueError("need a function model or input norms")
        shift, sine = input_norms(f, t, s, p)
    else:
        shift, sine = norms
    return _assemble(cert, shift, sine)


# ---------------------------------------------------------------------------
# n-dimensional singleton pairs


def standardizing_map(b, a=None, tau: float | None = None) -> np.ndarray:
    """Invertible C with first row b, so <b, x> = (C x)_1.

    Without ``a`` the other rows are an orthonormal basis of b's orthogonal
    complement.  With ``a`` not parallel to b, row 2 is a multiple of the
    component of a orthogonal to b chosen so that (C a)_2 = tau (default:
    the length of that component), and rows 3.. span the rest, so that
    C a = <a, b> e_1 + tau e_2.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if not np.any(b):
        raise ValueError("b must be nonzero")
    rows = [b]
    if a is not None:
        a = np.asarray(a, dtype=float)
        perp = a - (a @ b) / (b @ b) * b
        norm = float(np.linalg.norm(perp))
        if norm > 1e-12 * max(1.0, float(np.linalg.norm(a))):
            tau = norm if tau is None else tau
            rows.append(perp * (tau / norm**2))
    basis = null_space(np.vstack([r / np.linalg.norm(r) for r in rows]))
    C = np.vstack([*rows, *basis.T]) if basis.size else np.vstack(rows)
    assert C.shape == (n, n)
    return C


def _dot(a, b):
    terms = [as_real(x) * as_real(y) for x, y in zip(a, b)]
    if all(isinstance(v, Real) for v in terms) and len({v.pi_power for v in terms if v.coef}) <= 1:
        power = next((v.pi_power for v in terms if v.coef), 0)
        return Real(sum((v.coef for v in terms), Fraction(0)), power)
    return math.fsum(float(v) for v in terms)


def certify_bound_nd(
    norms: tuple[Enclosure, Enclosure],
    a,
    b,
    p: float,
    delta: float | None = None,
    eps: float = DEFAULT_EPS_Q,
) -> BoundCertificate:
    """Singleton pair A = {a}, B = {b} in R^n.

    In y = C x (first row b) the sine condition is sin(y_1) and the shift is
    t e_1 + a' with t = <a, b>; E = {dist(y_1, pi Z) <= d}, which is the strip
    {|sin<b, x>| <= sin d}, and the 1D constant carries over unchanged.
    """
    if len(a) != len(b):
        raise ValueError("a and b must have the same dimension")
    bf = np.asarray([float(as_real(v)) for v in b])
    if not np.any(bf):
        raise ValueError("b must be nonzero")
    af = np.asarray([float(as_real(v)) for v in a])
    t = _dot(a, b)
    cert = build_decomposition(t, 1, p, delta, eps)
    C = standardizing_map(bf)
    a_std = C @ af
    extra = {
        "a": af.tolist(), "b": bf.tolist(),
        "a_prime_norm": float(np.linalg.norm(a_std[1:])),
    }
    base = replace(
        cert, dim=len(bf), e_set=f"strip {{x : |sin<b,x>| <= sin({cert.delta:.17g})}}"
    )
    return _assemble(base, *norms, **extra)


# ---------------------------------------------------------------------------
# certified input norms for the supported test functions

INNER_WINDOW = 40.0
OUTER_WINDOW = 4000.0


def input_norms(f: FunctionModel, t, s, p: float) -> tuple[Enclosure, Enclosure]:
    """Enclosures of ||f(. + t) - f||_p and ||sin(s .) f||_p."""
    t, s = float(as_real(t)), float(as_real(s))
    return shift_mass(f, t, p).root(p), sine_mass(f, s, p).root(p)


@singledispatch
def sine_mass(f, s: float, p: float) -> Enclosure:
    """Enclosure of the integral of |sin(s x) f(x)|^p."""
    raise TypeError(f"no certified sine norm for {type(f).__name__}")


@singledispatch
def shift_mass(f, t: float, p: float) -> Enclosure:
    """Enclosure of the integral of |f(x + t) - f(x)|^p."""
    raise TypeError(f"no certified shift norm for {type(f).__name__}")


@sine_mass.register
def _(f: Box, s, p):
    if s == 0 or f.hi == f.lo:
        return Enclosure.point(0.0)
    a = abs(s)
    return sin_power_integral(a * f.lo, a * f.hi, p, cells=2048).scale(1 / a)


@shift_mass.register
def _(f: Box, t, p):
    return Enclosure.point(2 * min(abs(t), f.hi - f.lo))


def _sine_breaks(s: float, lo: float, hi: float, extra=()) -> np.ndarray:
    h = math.pi / (2 * abs(s))
    ks = np.arange(math.ceil(lo / h), math.floor(hi / h) + 1)
    pts = np.concatenate([[lo, hi], ks * h, np.asarray(extra, dtype=float)])
    return np.unique(pts[(pts >= lo) & (pts <= hi)])


def _cells_for(breaks: np.ndarray, inner: int, outer: int) -> np.ndarray:
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    return np.where(np.abs(mid) <= INNER_WINDOW, inner, outer)


@sine_mass.register
def _(f: PowerProfile, s, p):
    if s == 0:
        return Enclosure.point(0.0)
    ap = f.alpha * p
    if ap <= 1:
        raise ValueError("sin(s x)(1+|x|)^-alpha is not in L^p for alpha p <= 1")
    L = OUTER_WINDOW
    breaks = _sine_breaks(s, -L, L, extra=(0.0, -INNER_WINDOW, INNER_WINDOW))
    cells = _cells_for(breaks, 64, 4)
    lo, hi = monotone_product_bounds(
        [lambda x: np.abs(np.sin(s * x)) ** p, lambda x: (1 + np.abs(x)) ** (-ap)],
        breaks,
        cells,
    )
    tail = 2 * (1 + L) ** (1 - ap) / (ap - 1)
    return Enclosure(lo, (hi + tail) * (1 + SUM_SLACK), "quadrature")


@shift_mass.register
def _(f: PowerProfile, t, p):
    alpha = f.alpha
    if t == 0 or alpha == 0:
        return Enclosure.point(0.0)
    q = (alpha + 1) * p
    if q <= 1:
        raise ValueError("shift difference not in L^p for (alpha + 1) p <= 1")
    at = abs(t)
    L = max(OUTER_WINDOW, 10 * at)
    grid = np.concatenate([np.arange(-INNER_WINDOW, INNER_WINDOW, 0.25),
                           np.linspace(-L, L, 801)])
    breaks = np.unique(np.concatenate([grid, [0.0, -t, -L, L]]))
    breaks = breaks[(breaks >= -L) & (breaks <= L)]
    left, right = cell_grid(breaks, _cells_for(breaks, 32, 16))
    g = lambda x: (1 + np.abs(x)) ** (-alpha)  # noqa: E731
    a1, a2 = np.sort(np.stack([g(left + t), g(right + t)]), axis=0)
    b1, b2 = np.sort(np.stack([g(left), g(right)]), axis=0)
    up = np.maximum(a2 - b1, b2 - a1) * (1 + 4 * EPS)
    down = np.maximum(0.0, np.maximum(a1 - b2, b1 - a2)) * (1 - 4 * EPS)
    w = right - left
    inner_hi = math.fsum((w * up**p).tolist())
    inner_lo = math.fsum((w * down**p).tolist())
    # mean value bound on |x| >= L > |t|
    c = at * abs(alpha)
    base = 1 + L - at if alpha > 0 else 1 + L + at
    tail = 2 * c**p * base ** (1 - q) / (q - 1)
    return Enclosure(inner_lo * (1 - SUM_SLACK), (inner_hi + tail) * (1 + SUM_SLACK), "quadrature")


@sine_mass.register
def _(f: TruncatedReciprocal, s, p):
    if s == 0:
        return Enclosure.point(0.0)
    a = abs(s)
    # min(a x, 1)^p x^-p dominates; (2 a x / pi)^p x^-p on x <= pi/(2a) minorizes
    c = min(1.0, 1.0 / a)
    upper = a**p * c + (math.log(1 / c) if p == 1 else (c ** (1 - p) - 1) / (p - 1))
    lower = (2 * a / math.pi) ** p * min(1.0, math.pi / (2 * a))
    return Enclosure(lower * (1 - SUM_SLACK), upper * (1 + SUM_SLACK), "closed-form")


@shift_mass.register
def _(f: TruncatedReciprocal, t, p):
    if t == 0:
        return Enclosure.point(0.0)
    raise ValueError("the shift difference of 1/x on (0,1) is not in L^p for t != 0")
