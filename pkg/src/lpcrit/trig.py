"""Decomposition sin<b, x> = sum_j Q_j(x) sin(x_j) for integer frequency vectors.

Q_j are stored in Fourier form,

    Q(x) = sum_w  c_w cos<w, x> + s_w sin<w, x>,

with exact rational coefficients over canonical frequencies w (first nonzero
entry positive).  The l1-norm of the coefficients bounds the sup-norm, and
for the canonical construction it equals |b_j| <= |b|_1.

Construction, for b = (b_1, b'):

    sin(b_1 x_1 + <b', x'>) = sin(b_1 x_1) cos<b', x'> + cos(b_1 x_1) sin<b', x'>
    sin(m u) = sign(m) U_{|m|-1}(cos u) sin u,   U_{m-1}(cos u) = sum_i cos((m-1-2i) u)

so Q_1 = sign(b_1) U_{|b_1|-1}(cos x_1) cos<b', x'> and Q_j = cos(b_1 x_1) Q'_j
for j >= 2, recursing on b'.  Unrolled, Q_j is a product of cosines times
the Dirichlet-type sum U_{|b_j|-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certified import Enclosure

Freq = tuple[int, ...]


def _canon(w: Freq) -> tuple[Freq, int]:
    """Canonical representative of +-w and the sign flip applied to sin terms."""
    for v in w:
        if v:
            return (w, 1) if v > 0 else (tuple(-u for u in w), -1)
    return w, 0


@dataclass(frozen=True)
class TrigPolynomial:
    n: int
    coeffs: dict = field(default_factory=dict)  # Freq -> (cos coef, sin coef)

    @classmethod
    def build(cls, n: int, terms) -> "TrigPolynomial":
        """Collect (w, cos_coef, sin_coef) triples into canonical form."""
        acc: dict[Freq, list[Fraction]] = {}
        for w, c, s in terms:
            w, sign = _canon(tuple(int(v) for v in w))
            slot = acc.setdefault(w, [Fraction(0), Fraction(0)])
            slot[0] += Fraction(c)
            if sign:
                slot[1] += sign * Fraction(s)
        return cls(n, {w: (c, s) for w, (c, s) in acc.items() if c or s})

    @classmethod
    def constant(cls, n: int, c=1) -> "TrigPolynomial":
        return cls.build(n, [((0,) * n, c, 0)])

    @classmethod
    def cos_of(cls, w: Sequence[int]) -> "TrigPolynomial":
        return cls.build(len(w), [(tuple(w), 1, 0)])

    def terms(self):
        for w, (c, s) in self.coeffs.items():
            yield w, c, s

    def __add__(self, other):
        return TrigPolynomial.build(self.n, [*self.terms(), *other.terms()])

    def __neg__(self):
        return TrigPolynomial(self.n, {w: (-c, -s) for w, (c, s) in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, TrigPolynomial):
            other = Fraction(other)
            return TrigPolynomial.build(self.n, [(w, c * other, s * other) for w, c, s in self.terms()])
        half = Fraction(1, 2)
        out = []
        for w1, c1, s1 in self.terms():
            for w2, c2, s2 in other.terms():
                wp = tuple(a + b for a, b in zip(w1, w2))
                wm = tuple(a - b for a, b in zip(w1, w2))
                # cos A cos B, sin A sin B, sin A cos B, cos A sin B
                out.append((wp, half * (c1 * c2 - s1 * s2), half * (s1 * c2 + c1 * s2)))
                out.append((wm, half * (c1 * c2 + s1 * s2), half * (s1 * c2 - c1 * s2)))
        return TrigPolynomial.build(self.n, out)

    __rmul__ = __mul__

    def embed(self, n: int, offset: int) -> "TrigPolynomial":
        """Same polynomial on R^n, reading variables offset..offset+self.n-1."""
        pad = lambda w: (0,) * offset + w + (0,) * (n - offset - self.n)  # noqa: E731
        return TrigPolynomial.build(n, [(pad(w), c, s) for w, c, s in self.terms()])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_zero():
            return np.zeros(x.shape[:-1])
        W = np.array(list(self.coeffs), dtype=float)
        c = np.array([float(v[0]) for v in self.coeffs.values()])
        s = np.array([float(v[1]) for v in self.coeffs.values()])
        ph = x @ W.T
        out = np.cos(ph) @ c
        if s.any():
            out = out + np.sin(ph) @ s
        return out

    def l1_norm(self) -> Fraction:
        return sum((abs(c) + abs(s) for _, c, s in self.terms()), Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_text(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for w in sorted(self.coeffs, key=lambda w: (sum(map(abs, w)), [-v for v in w])):
            c, s = self.coeffs[w]
            for coef, fn in ((c, "cos"), (s, "sin")):
                if coef:
                    parts.append((coef, _atom(fn, w)))
        text = ""
        for i, (coef, atom) in enumerate(parts):
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            body = (str(mag) if atom is None else atom if mag == 1 else f"{mag}*{atom}")
            text += (("-" if sign == "-" else "") if i == 0 else f" {sign} ") + body
        return text


def _atom(fn: str, w: Freq) -> str | None:
    if not any(w):
        return None
    pieces = []
    for j, v in enumerate(w, start=1):
        if not v:
            continue
        mag = "" if abs(v) == 1 else f"{abs(v)}*"
        sign = "-" if v < 0 else "+"
        pieces.append((sign, f"{mag}x{j}"))
    arg = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, p in pieces[1:]:
        arg += f" {sign} {p}"
    return f"{fn}({arg})"


def _unit_axis(n: int, j: int, m: int) -> Freq:
    w = [0] * n
    w[j] = m
    return tuple(w)


def _dirichlet(n: int, j: int, m: int) -> TrigPolynomial:
    """sign(m) U_{|m|-1}(cos x_j) = sin(m x_j) / sin(x_j)."""
    if m == 0:
        return TrigPolynomial(n, {})
    sign = 1 if m > 0 else -1
    k = abs(m)
    return TrigPolynomial.build(
        n, [(_unit_axis(n, j, k - 1 - 2 * i), sign, 0) for i in range(k)]
    )


def decompose(b: Sequence[int]) -> list[TrigPolynomial]:
    """The canonical Q_1..Q_n with sin<b, x> = sum_j Q_j(x) sin(x_j).

    Each Q_j is a product of cosines, cos(u_0) cos(u_1)...cos(u_r) =
    2^-r sum over signs of cos(u_0 +- u_1 ... +- u_r), so the coefficients
    are integers over 2^r and are accumulated exactly without Fractions.
    """
    if any(int(v) != v for v in b):
        raise ValueError(f"frequency vector must be integer, got {b}")
    b = tuple(int(v) for v in b)
    n = len(b)
    if n == 0:
        raise ValueError("empty frequency vector")
    qs = []
    for j in range(n):
        if b[j] == 0:
            qs.append(TrigPolynomial(n, {}))
            continue
        factors = [_unit_axis(n, i, b[i]) for i in range(j) if b[i]]
        rest = (0,) * (j + 1) + b[j + 1 :]
        if any(rest):
            factors.append(rest)
        # every signed combination of the factor frequencies
        combos = [(0,) * n]
        for f in factors:
            combos = [tuple(u + e * v for u, v in zip(c, f)) for c in combos for e in (1, -1)]
        sign = 1 if b[j] > 0 else -1
        acc: dict[Freq, int] = {}
        for i in range(abs(b[j])):
            m = abs(b[j]) - 1 - 2 * i
            for c in combos:
                w, _ = _canon(c[:j] + (c[j] + m,) + c[j + 1 :])
                acc[w] = acc.get(w, 0) + sign
        denom = 2 ** len(factors)
        qs.append(TrigPolynomial(n, {w: (Fraction(c, denom), Fraction(0)) for w, c in acc.items() if c}))
    return qs


def format_decomposition(qs: Sequence[TrigPolynomial]) -> str:
    return "; ".join(f"Q{j} = {q.to_text()}" for j, q in enumerate(qs, start=1))


def sup_norm(q: TrigPolynomial, grid: int | None = None) -> Enclosure:
    """Lower bound by grid maximization over [0, 2pi)^n, upper by coefficient l1-norm."""
    upper = float(q.l1_norm())
    if q.is_zero():
        return Enclosure(0.0, 0.0, "grid-bound")
    if grid is None:
        grid = max(8, int(round(2.0 ** (18 / q.n))))
    axis = np.arange(grid) * (2 * np.pi / grid)
    pts = np.stack(np.meshgrid(*([axis] * q.n), indexing="ij"), axis=-1).reshape(-1, q.n)
    lower = float(np.max(np.abs(q(pts)))) * (1 - 1e-13)
    return Enclosure(min(lower, upper), upper * (1 + 1e-15), "grid-bound")


def verify_identity(b: Sequence[int], trials: int = 1000, seed: int = 0) -> float:
    """Max |sin<b,x> - sum_j Q_j(x) sin x_j| over random x in [-10, 10]^n."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    qs = decompose(b)
    n = len(qs)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-10, 10, size=(trials, n))
    lhs = np.sin(x @ np.asarray(b, dtype=float))
    rhs = sum(q(x) * np.sin(x[:, j]) for j, q in enumerate(qs))
    return float(np.max(np.abs(lhs - rhs)))
