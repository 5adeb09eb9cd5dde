"""Functions outside L^p whose shift and sine conditions still hold when ts is in pi Z.

Every generator comes with a verifier that certifies the three defining
properties at once: a divergence certificate for the p-mass, and finite
enclosures of the p-th powers of the sine-weighted and shift-difference norms.
Series are organized by layer: |k| for the 1D families, the l1-norm of the
lattice index for the nD families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certified import (
    EPS,
    SUM_SLACK,
    DivergenceCertificate,
    Enclosure,
    PowerEnvelope,
    SeriesSpec,
    certify_divergence,
    sum_with_tail,
)
from .criterion import (
    _dot,
    as_real,
    check_quantization,
    shift_mass as criterion_shift_mass,
    sine_mass as criterion_sine_mass,
    standardizing_map,
)
from .function_model import (
    IntervalFamily1D,
    PowerProfile,
    ProductFunction,
    SimplexFamilyND,
    TruncatedReciprocal,
    phi_norm_p,
)
from .lattice import count_layer_full_array, lattice_ball, moment_coefficient
from .trig import decompose, sup_norm

KINDS = (
    "one_d_pi",
    "t_zero",
    "s_zero",
    "lattice_nd",
    "singleton_dependent",
    "singleton_independent",
)
DEFAULT_TAIL_CUTOFF = 100_000
CSV_MIN_LAYERS = 50
CSV_MAX_LAYERS = 10_000
GAMMA_REL_ERR = 1e-12


def _check_p(p: float) -> None:
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError(f"p must be in [1, inf), got {p}")


def _thresholds(M) -> list[float]:
    return [float(m) for m in (M if isinstance(M, (list, tuple)) else [M])]


@dataclass
class VerificationReport:
    """Certified trichotomy of a counterexample.

    ``sine_mass`` and ``shift_mass`` enclose p-th powers of the norms;
    ``curves`` holds per-layer partial sums for tables and plots.
    """

    kind: str
    params: dict
    p: float
    mass: list[DivergenceCertificate]
    sine_mass: Enclosure
    shift_mass: Enclosure
    axes: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict, repr=False)

    @property
    def sine_norm(self) -> Enclosure:
        return self.sine_mass.root(self.p)

    @property
    def shift_norm(self) -> Enclosure:
        return self.shift_mass.root(self.p)

    @property
    def trichotomy(self) -> bool:
        return (
            bool(self.mass)
            and all(c.lower_bound >= c.threshold for c in self.mass)
            and self.sine_mass.finite
            and self.shift_mass.finite
            and all(ax["sine_mass"].finite and ax["shift_mass"].finite for ax in self.axes)
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "p": self.p,
            "mass": [c.to_dict() for c in self.mass],
            "sine_mass": self.sine_mass.to_dict(),
            "shift_mass": self.shift_mass.to_dict(),
            "sine_norm": self.sine_norm.to_dict(),
            "shift_norm": self.shift_norm.to_dict(),
            "axes": [
                {k: (v.to_dict() if isinstance(v, Enclosure) else v) for k, v in ax.items()}
                for ax in self.axes
            ],
            "notes": self.notes,
            "trichotomy": self.trichotomy,
        }


def _curves(mass: SeriesSpec, sine: SeriesSpec | None, shift, M_list, certs) -> dict:
    """Partial sums by layer: mass lower bounds, sine/shift upper bounds."""
    reach = max([c.witness for c in certs] + [CSV_MIN_LAYERS])
    L = min(reach, CSV_MAX_LAYERS)
    layers = np.arange(L + 1)
    out = {"layer": layers, "partial_mass_lower": mass.cumulative(L) * (1 - SUM_SLACK)}
    out["partial_sine_upper"] = (
        np.zeros(L + 1) if sine is None else sine.cumulative(L) * (1 + SUM_SLACK)
    )
    if shift is None:
        out["partial_shift_upper"] = np.zeros(L + 1)
    elif isinstance(shift, SeriesSpec):
        out["partial_shift_upper"] = shift.cumulative(L) * (1 + SUM_SLACK)
    else:
        shift = np.asarray(shift, dtype=float)
        padded = np.concatenate([shift, np.full(max(0, L + 1 - shift.size), 0.0)])[: L + 1]
        out["partial_shift_upper"] = np.cumsum(padded) * (1 + SUM_SLACK)
    return out


# ---------------------------------------------------------------------------
# the 1D family on intervals [k pi, k pi + a_k]

A0 = Fraction(1, 4)


def one_d_length(k) -> np.ndarray:
    """a_0 = 1/4, a_k = 1/(5|k|)."""
    k = np.abs(np.asarray(k))
    return np.where(k == 0, 0.25, 1.0 / (5.0 * np.maximum(k, 1)))


def one_d_length_exact(k: int) -> Fraction:
    return A0 if k == 0 else Fraction(1, 5 * abs(k))


def make_one_d_pi(p: float = 2.0) -> IntervalFamily1D:
    """Indicator of the union of [k pi, k pi + a_k]; the same family serves every p."""
    _check_p(p)
    return IntervalFamily1D(
        lower=lambda k: np.zeros(np.shape(k)),
        upper=one_d_length,
        period=math.pi,
        length_envelope=PowerEnvelope(0.2, -1.0, shift=0.0, valid_from=1),
        name="one_d_pi",
    )


def _layer_multiplicity(k) -> np.ndarray:
    return np.where(np.asarray(k) == 0, 1.0, 2.0)


def one_d_mass_series() -> SeriesSpec:
    """Layer k holds I_k and I_-k: 1/4, then 2/(5k)."""
    harmonic = PowerEnvelope(0.4, -1.0, shift=0.0, valid_from=1)
    return SeriesSpec(
        term=lambda k: _layer_multiplicity(k) * one_d_length(k),
        upper_envelope=harmonic,
        lower_envelope=harmonic,
        label="one_d_pi mass",
    )


def one_d_sine_series(p: float) -> SeriesSpec:
    """Upper terms from |sin t| <= t: multiplicity * a_k^(p+1) / (p+1)."""
    coef = 2 * 0.2 ** (p + 1) / (p + 1) * (1 + 4 * EPS)
    return SeriesSpec(
        term=lambda k: _layer_multiplicity(k) * one_d_length(k) ** (p + 1) / (p + 1),
        upper_envelope=PowerEnvelope(coef, -(p + 1), shift=0.0, valid_from=1),
        label="one_d_pi sine upper",
    )


def one_d_sine_lower(p: float, K: int) -> float:
    """Lower bound via sin t >= t (1 - t^2/6) on [0, a_k], summed to layer K."""
    k = np.arange(K + 1)
    a = one_d_length(k)
    terms = _layer_multiplicity(k) * (1 - a * a / 6) ** p * a ** (p + 1) / (p + 1)
    return math.fsum(terms.tolist()) * (1 - SUM_SLACK)


def one_d_shift_mass(m: int = 1) -> Fraction:
    """Exact measure of the support of f(. + m pi) - f, for any p.

    On cell j both f(. + m pi) and f are indicators of intervals starting at
    j pi, of lengths a_{j+m} and a_j, so the difference has measure
    |a_{j+m} - a_j|.  For j >= 0 and j <= -m these telescope.
    """
    m = abs(int(m))
    if m == 0:
        return Fraction(0)
    a = one_d_length_exact
    total = sum((a(i) for i in range(m)), Fraction(0))  # j >= 0
    total += sum((a(i) for i in range(-m + 1, 1)), Fraction(0))  # j <= -m
    total += sum((abs(a(j + m) - a(j)) for j in range(-m + 1, 0)), Fraction(0))
    return total


def one_d_shift_series() -> SeriesSpec:
    """Per-layer contributions to the pi-shift difference (telescopes to 1/2)."""

    def term(k):
        k = np.asarray(k)
        right = one_d_length(k) - one_d_length(k + 1)
        left = np.where(k >= 1, one_d_length(k - 1) - one_d_length(k), 0.0)
        return right + left

    return SeriesSpec(term=term, label="one_d_pi shift")


def verify_one_d(p: float = 2.0, M=1.0, K: int = DEFAULT_TAIL_CUTOFF, shift_m: int = 1) -> VerificationReport:
    """Certify: divergent mass, finite sine norm for s = 1, finite shift norm for t = shift_m * pi."""
    _check_p(p)
    make_one_d_pi(p)
    mass = one_d_mass_series()
    certs = [certify_divergence(mass, m) for m in _thresholds(M)]
    sine_series = one_d_sine_series(p)
    sine_up = sum_with_tail(sine_series, K)
    sine = Enclosure(one_d_sine_lower(p, min(K, 1000)), sine_up.upper, "series-tail")
    exact = one_d_shift_mass(shift_m)
    shift = Enclosure(float(exact), float(exact), "closed-form")
    if float(exact) != exact:
        shift = Enclosure(math.nextafter(float(exact), 0), math.nextafter(float(exact), 1), "closed-form")
    return VerificationReport(
        kind="one_d_pi",
        params={"p": p, "t": f"{shift_m}*pi", "s": 1, "tail_cutoff": K},
        p=p,
        mass=certs,
        sine_mass=sine,
        shift_mass=shift,
        notes={
            "mass_exponent": mass.lower_envelope.exponent,
            "sine_tail_exponent": sine_series.upper_envelope.exponent,
            "shift_exact": str(exact),
        },
        curves=_curves(mass, sine_series, one_d_shift_series() if abs(shift_m) == 1 else None, M, certs),
    )


# ---------------------------------------------------------------------------
# trivial pairs: t = 0 or s = 0


def make_trivial_pair_counterexample(which: str, p: float = 2.0, a: float | None = None):
    """t_zero: 1/x on (0, 1).  s_zero: (1 + |x|)^-a with 1/p - 1 < a < 1/p.

    a = 0 (the constant 1) is accepted for every p.
    """
    _check_p(p)
    if which == "t_zero":
        return TruncatedReciprocal()
    if which == "s_zero":
        if a is None:
            a = 1 / p - 0.5
        if a != 0 and not (1 / p - 1 < a < 1 / p):
            raise ValueError(f"a must lie in ({1 / p - 1:g}, {1 / p:g}), got {a}")
        return PowerProfile(float(a))
    raise ValueError(f"unknown trivial pair {which!r}")


def reciprocal_mass_series(p: float) -> SeriesSpec:
    """Integral of x^-p over dyadic cells (2^(-k-1), 2^-k]; each is >= ln 2."""
    ln2 = math.log(2) * (1 - 4 * EPS)
    if p == 1:
        term = lambda k: np.full(np.shape(k), math.log(2))  # noqa: E731
    else:
        growth = (2.0 ** (p - 1) - 1) / (p - 1)

        def term(k):
            with np.errstate(over="ignore"):
                return 2.0 ** (np.asarray(k, dtype=float) * (p - 1)) * growth

    return SeriesSpec(
        term=term, lower_envelope=PowerEnvelope(ln2, 0.0), label="1/x on dyadic cells"
    )


def power_mass_series(a: float, p: float) -> SeriesSpec:
    """Integral of (1 + |x|)^(-a p) over k <= |x| < k + 1."""
    ap = a * p
    if ap >= 1:
        raise ValueError("profile is p-integrable; no divergence")
    if ap == 0:
        term = lambda k: np.full(np.shape(k), 2.0)  # noqa: E731
    else:
        term = lambda k: 2 * (  # noqa: E731
            (2.0 + np.asarray(k)) ** (1 - ap) - (1.0 + np.asarray(k)) ** (1 - ap)
        ) / (1 - ap)
    low = PowerEnvelope(2 * (1 - 8 * EPS), -ap, shift=2.0 if ap >= 0 else 1.0)
    return SeriesSpec(term=term, lower_envelope=low, label="(1+|x|)^-a on unit cells")


def verify_trivial_pair(
    which: str, p: float = 2.0, M=1.0, t: float = 1.0, s: float = 1.0, a: float | None = None
) -> VerificationReport:
    """t_zero is checked against the pair (0, s), s_zero against (t, 0)."""
    f = make_trivial_pair_counterexample(which, p, a)
    if which == "t_zero":
        mass = reciprocal_mass_series(p)
        sine = criterion_sine_mass(f, float(as_real(s)), p)
        shift = Enclosure.point(0.0)
        params = {"p": p, "t": 0, "s": float(as_real(s))}
    else:
        mass = power_mass_series(f.alpha, p)
        sine = Enclosure.point(0.0)
        shift = criterion_shift_mass(f, float(as_real(t)), p)
        params = {"p": p, "t": float(as_real(t)), "s": 0, "a": f.alpha}
    certs = [certify_divergence(mass, m) for m in _thresholds(M)]
    curves = _curves(mass, None, None, M, certs)
    curves["partial_sine_upper"][:] = sine.upper
    curves["partial_shift_upper"][:] = shift.upper
    return VerificationReport(
        kind=which, params=params, p=p, mass=certs, sine_mass=sine, shift_mass=shift,
        notes={"mass_exponent": mass.lower_envelope.exponent}, curves=curves,
    )


# ---------------------------------------------------------------------------
# lattice family: simplices of size (1 + |kappa|_1)^-gamma at pi kappa


def gamma_range(n: int) -> tuple[float, float]:
    """Admissible gamma: 1 - 1/(n+1) < gamma <= 1."""
    return 1 - 1 / (n + 1), 1.0


def make_lattice_nd(n: int, gamma: float, p: float = 1.0) -> SimplexFamilyND:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_p(p)
    lo, hi = gamma_range(n)
    if not (lo < gamma <= hi):
        raise ValueError(f"gamma must satisfy {lo:.6g} < gamma <= 1, got {gamma}")
    return _lattice_family(n, gamma)


def _lattice_family(n, gamma, spacing=()):
    return SimplexFamilyND(
        n=n,
        radius=lambda k: (1.0 + np.asarray(k, dtype=float)) ** (-gamma),
        spacing=spacing,
        name="lattice_nd",
        params={"gamma": gamma},
    )


def lattice_mass_series(n: int, gamma: float) -> SeriesSpec:
    """count_full(n, k) r(k)^n / n!; the count lies between (k+1)^(n-1)/(n-1)! and 2^n (k+1)^(n-1)."""
    fact = math.factorial(n)
    e = n - 1 - gamma * n
    return SeriesSpec(
        term=lambda k: count_layer_full_array(n, k) * (1.0 + np.asarray(k)) ** (-gamma * n) / fact,
        upper_envelope=PowerEnvelope(2.0**n / fact * (1 + 4 * EPS), e),
        lower_envelope=PowerEnvelope(1 / (math.factorial(n - 1) * fact) * (1 - 4 * EPS), e),
        label=f"lattice mass n={n} gamma={gamma}",
    )


def lattice_sine_series(n: int, gamma: float, p: float) -> SeriesSpec:
    """Upper terms for one axis: count_full(n, k) * integral of xi_j^p over the simplex.

    Uses |sin xi| <= xi; the envelope exponent is n - 1 - gamma (n + p).
    """
    c = moment_coefficient(n, p) * (1 + GAMMA_REL_ERR)
    e = n - 1 - gamma * (n + p)
    return SeriesSpec(
        term=lambda k: count_layer_full_array(n, k) * c * (1.0 + np.asarray(k)) ** (-gamma * (n + p)),
        upper_envelope=PowerEnvelope(2.0**n * c * (1 + 4 * EPS), e),
        label=f"lattice sine n={n} gamma={gamma} p={p}",
    )


def lattice_sine_lower(n: int, gamma: float, p: float, K: int) -> float:
    """Partial lower bound from sin xi >= (sin r / r) xi on [0, r]."""
    k = np.arange(K + 1)
    r = (1.0 + k) ** (-gamma)
    c = moment_coefficient(n, p) * (1 - GAMMA_REL_ERR)
    terms = count_layer_full_array(n, k) * (np.sin(r) / r) ** p * c * r ** (n + p)
    return math.fsum(terms.tolist()) * (1 - SUM_SLACK) * (1 - 4 * EPS)


def lattice_shift_series(n: int, gamma: float) -> SeriesSpec:
    """Exact per-layer measure of F(. + pi e_j) - F for one axis (any p).

    At anchor lambda the shifted and unshifted simplices share a corner and
    have sizes r(lambda + e_j) and r(lambda); k grows by one if lambda_j >= 0
    and drops by one otherwise, so layer k collects
    D(k) = (R^n(1+k) - R^n(2+k)) / n! from N(lambda_j >= 0, layer k) plus
    N(lambda_j < 0, layer k+1) anchors.
    """
    fact = math.factorial(n)
    gn = gamma * n

    def term(k):
        k = np.asarray(k, dtype=float)
        d = ((1 + k) ** (-gn) - (2 + k) ** (-gn)) / fact
        cf, cf1 = count_layer_full_array(n, k), count_layer_full_array(n - 1, k)
        cf_next = count_layer_full_array(n, k + 1)
        cf1_next = count_layer_full_array(n - 1, k + 1)
        return d * ((cf + cf1) / 2 + (cf_next - cf1_next) / 2)

    coef = 2.0**n * (1 + 2.0 ** (n - 1)) * gn / fact * (1 + 4 * EPS)
    return SeriesSpec(
        term=term,
        upper_envelope=PowerEnvelope(coef, n - 2 - gn),
        label=f"lattice shift n={n} gamma={gamma}",
    )


def shift_mean_value_bound(n: int, gamma: float, k) -> np.ndarray:
    """R^n(1+k) - R^n(2+k) <= gamma n (1+k)^(-gamma n - 1) for R(x) = x^-gamma."""
    gn = gamma * n
    return gn * (1.0 + np.asarray(k, dtype=float)) ** (-gn - 1)


def verify_lattice_nd(
    n: int, gamma: float, p: float = 1.0, M=5.0, K: int = DEFAULT_TAIL_CUTOFF
) -> VerificationReport:
    """Certify the trichotomy for the sine conditions sin x_j and the shifts pi e_j."""
    make_lattice_nd(n, gamma, p)
    mass = lattice_mass_series(n, gamma)
    certs = [certify_divergence(mass, m) for m in _thresholds(M)]
    sine_series = lattice_sine_series(n, gamma, p)
    sine = Enclosure(
        lattice_sine_lower(n, gamma, p, min(K, 10_000)), sum_with_tail(sine_series, K).upper, "series-tail"
    )
    shift_series = lattice_shift_series(n, gamma)
    shift = sum_with_tail(shift_series, K)
    axes = [{"axis": j + 1, "sine_mass": sine, "shift_mass": shift} for j in range(n)]
    return VerificationReport(
        kind="lattice_nd",
        params={"n": n, "gamma": gamma, "p": p, "tail_cutoff": K},
        p=p,
        mass=certs,
        sine_mass=sine,
        shift_mass=shift,
        axes=axes,
        notes={
            "mass_exponent": mass.lower_envelope.exponent,
            "sine_tail_exponent": sine_series.upper_envelope.exponent,
            "sine_cap_exponent_p1": n - 1 - gamma * (n + 1),
            "shift_tail_exponent": shift_series.upper_envelope.exponent,
        },
        curves=_curves(mass, sine_series, shift_series, M, certs),
    )


def verify_multi_sine_closure(
    F: SimplexFamilyND, b: Sequence[int], p: float, axis_norms: Sequence[Enclosure] | None = None
) -> Enclosure:
    """Bound on ||F sin<b, .>||_p from the axis norms ||F sin x_j||_p.

    sin<b, x> = sum_j Q_j(x) sin x_j, so the norm is at most
    sum_j ||Q_j||_inf ||F sin x_j||_p.
    """
    if any(int(v) != v for v in b):
        raise ValueError(f"b must be an integer vector, got {b}")
    b = [int(v) for v in b]
    if len(b) != F.n:
        raise ValueError("b must have one entry per axis")
    if axis_norms is None:
        gamma = F.params["gamma"]
        s = sum_with_tail(lattice_sine_series(F.n, gamma, p), DEFAULT_TAIL_CUTOFF)
        axis_norms = [Enclosure(0.0, s.upper, s.provenance).root(p)] * F.n
    qs = decompose(b)
    nonzero = [j for j, q in enumerate(qs) if not q.is_zero()]
    if len(nonzero) == 1 and abs(b[nonzero[0]]) == 1 and sum(map(abs, b)) == 1:
        return axis_norms[nonzero[0]]
    upper = math.fsum(float(sup_norm(qs[j], grid=8).upper) * axis_norms[j].upper for j in nonzero)
    return Enclosure(0.0, upper * (1 + SUM_SLACK), "series-tail")


def verify_lattice_shift_closure(
    shift_norm: Enclosure, steps: Sequence[int]
) -> Enclosure:
    """Bound on ||F(. + pi v) - F||_p for v in Z^n via unit steps.

    Each unit step +-pi e_j has the axis norm (shifting by -pi e_j is the
    +pi e_j difference translated), and the triangle inequality adds |v|_1 of them.
    """
    d = sum(abs(int(v)) for v in steps)
    return Enclosure(0.0, d * shift_norm.upper * (1 + SUM_SLACK), "series-tail")


# ---------------------------------------------------------------------------
# singleton pairs {a}, {b} with <a, b> in pi Z


# weight exponent -(gamma n) - 1 lifted by n - 1 for n = 2, gamma = 1
INDEPENDENT_SHIFT_EXPONENT = -2.0


@dataclass(frozen=True)
class SingletonSetup:
    case: str
    m: int
    tau: float | None
    transform: np.ndarray
    det: float


def _singleton_setup(a, b, eps: float) -> SingletonSetup:
    if len(a) != len(b):
        raise ValueError("a and b must have the same dimension")
    bf = np.asarray([float(as_real(v)) for v in b])
    af = np.asarray([float(as_real(v)) for v in a])
    if not np.any(bf):
        raise ValueError("b must be nonzero")
    q = check_quantization(_dot(a, b), 1, eps)
    if q.assertive:
        raise ValueError(
            f"<a, b> = {q.T:.17g} is not in pi Z; the criterion gives a bound instead"
        )
    m = round(q.T / math.pi)
    perp = af - (af @ bf) / (bf @ bf) * bf
    dependent = float(np.linalg.norm(perp)) <= 1e-12 * max(1.0, float(np.linalg.norm(af)))
    if dependent:
        C = standardizing_map(bf)
        tau = None
    else:
        tau = max(float(np.linalg.norm(perp)), 1.0)
        C = standardizing_map(bf, af, tau)
    det = abs(float(np.linalg.det(C)))
    return SingletonSetup("dependent" if dependent else "independent", int(m), tau, C, det)


def make_singleton_nd(a, b, p: float = 2.0, eps: float = 1e-9) -> ProductFunction:
    """F(x) = head(y) * (1 + |y_rest|^2)^-n with y = C x and (C x)_1 = <b, x>.

    Dependent a, b: head is the 1D interval family on y_1.  Independent: C a
    = m pi e_1 + tau e_2 and the head is the 2D simplex family on the grid
    (pi l_1, tau l_2) with sizes 1/(1 + |l_1| + |l_2|).
    """
    _check_p(p)
    st = _singleton_setup(a, b, eps)
    n = len(b)
    if st.case == "dependent":
        head = make_one_d_pi(p)
    else:
        head = _lattice_family(2, 1.0, spacing=(math.pi, st.tau))
    return ProductFunction(
        head=head,
        tail_dim=n - head.dim,
        tail_exponent=float(n),
        transform=st.transform,
        params={"case": st.case, "m": st.m, "tau": st.tau, "det": st.det},
    )


def index_shift_mass(n: int, gamma: float, v: Sequence[int], K: int = 400) -> Enclosure:
    """Measure of the support of G(. + shift) - G for the simplex family G,
    where the shift moves lattice index lambda to lambda + v.

    Anchors with |lambda|_1 <= K are summed exactly; beyond, each layer term
    is bounded by the mean value theorem with |k(lambda + v) - k(lambda)| <= |v|_1.
    """
    v = np.asarray(v, dtype=np.int64)
    d = int(np.abs(v).sum())
    if d == 0:
        return Enclosure.point(0.0)
    if K <= d:
        raise ValueError("cutoff must exceed |v|_1")
    fact = math.factorial(n)
    gn = gamma * n
    lam = lattice_ball(n, K)
    k0 = np.abs(lam).sum(axis=1)
    k1 = np.abs(lam + v).sum(axis=1)
    diff = np.abs((1.0 + k0) ** (-gn) - (1.0 + k1) ** (-gn)) / fact
    exact = math.fsum(diff.tolist())
    # anchors with k0 > K: (1+k0-d)^(-gn-1) <= ratio * (1+k0)^(-gn-1)
    ratio = ((2.0 + K) / (2.0 + K - d)) ** (gn + 1)
    weight = PowerEnvelope(d * gn / fact * ratio * (1 + 4 * EPS), -gn - 1)
    lifted = PowerEnvelope(2.0**n * weight.coef, weight.exponent + n - 1)
    tail = lifted.tail_upper(K)
    return Enclosure(exact * (1 - SUM_SLACK), (exact + tail) * (1 + SUM_SLACK), "series-tail")


def _index_shift_layers(n: int, gamma: float, v, L: int) -> np.ndarray:
    lam = lattice_ball(n, L)
    k0 = np.abs(lam).sum(axis=1)
    k1 = np.abs(lam + np.asarray(v)).sum(axis=1)
    diff = np.abs((1.0 + k0) ** (-gamma * n) - (1.0 + k1) ** (-gamma * n)) / math.factorial(n)
    return np.bincount(k0, weights=diff, minlength=L + 1)


def verify_singleton_nd(
    a, b, p: float = 2.0, M=1.0, eps: float = 1e-9, K: int = DEFAULT_TAIL_CUTOFF
) -> VerificationReport:
    """Certify the trichotomy for the sine condition sin<b, x> and the shift a."""
    F = make_singleton_nd(a, b, p, eps)
    st = F.params
    phi = F.phi_norm_p(p)
    # x -> y = C x changes every p-mass by 1/|det C|
    jac = 1.0 / st["det"]
    lo_c = phi.lower * jac * (1 - 1e-12)
    hi_c = phi.upper * jac * (1 + 1e-12)
    if st["case"] == "dependent":
        base_mass = one_d_mass_series()
        sine_series = one_d_sine_series(p)
        head_sine = Enclosure(
            one_d_sine_lower(p, 1000), sum_with_tail(sine_series, K).upper, "series-tail"
        )
        head_shift_exact = one_d_shift_mass(st["m"])
        head_shift = Enclosure(float(head_shift_exact) * (1 - EPS), float(head_shift_exact) * (1 + EPS), "closed-form")
        shift_curve = one_d_shift_series() if abs(st["m"]) == 1 else None
        exps = {"mass_exponent": -1.0, "sine_tail_exponent": sine_series.upper_envelope.exponent}
    else:
        base_mass = lattice_mass_series(2, 1.0)
        sine_series = lattice_sine_series(2, 1.0, p)
        head_sine = Enclosure(
            lattice_sine_lower(2, 1.0, p, 10_000), sum_with_tail(sine_series, K).upper, "series-tail"
        )
        v = (st["m"], 1)
        head_shift = index_shift_mass(2, 1.0, v)
        shift_curve = v
        exps = {
            "mass_exponent": base_mass.lower_envelope.exponent,
            "sine_tail_exponent": sine_series.upper_envelope.exponent,
            "shift_tail_exponent": INDEPENDENT_SHIFT_EXPONENT,
        }
    mass = base_mass.scaled(lo_c, label=f"singleton {st['case']} mass")
    certs = [certify_divergence(mass, m) for m in _thresholds(M)]
    sine = Enclosure(head_sine.lower * lo_c, head_sine.upper * hi_c, head_sine.provenance)
    shift = Enclosure(head_shift.lower * lo_c, head_shift.upper * hi_c, head_shift.provenance)
    curves = _curves(mass, sine_series.scaled(hi_c), None, M, certs)
    if isinstance(shift_curve, SeriesSpec):
        curves["partial_shift_upper"] = shift_curve.scaled(hi_c).cumulative(curves["layer"][-1]) * (1 + SUM_SLACK)
    elif shift_curve is not None:
        L = int(curves["layer"][-1])
        layers = _index_shift_layers(2, 1.0, shift_curve, min(L, 200))
        padded = np.concatenate([layers, np.zeros(max(0, L + 1 - layers.size))])[: L + 1]
        curves["partial_shift_upper"] = np.cumsum(padded) * hi_c * (1 + SUM_SLACK)
    return VerificationReport(
        kind=f"singleton_{st['case']}",
        params={
            "a": [float(as_real(x)) for x in a], "b": [float(as_real(x)) for x in b], "p": p,
            "m": st["m"], "tau": st["tau"], "det": st["det"],
            "phi_exponent": F.tail_exponent, "phi_dim": F.tail_dim,
        },
        p=p,
        mass=certs,
        sine_mass=sine,
        shift_mass=shift,
        notes={**exps, "phi_mass": phi.to_dict()},
        curves=curves,
    )
