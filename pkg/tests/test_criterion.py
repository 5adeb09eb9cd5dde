import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lpcrit.certified import Enclosure
from lpcrit.criterion import (
    QuantizationViolated,
    Real,
    build_decomposition,
    certify_bound,
    certify_bound_nd,
    check_quantization,
    default_delta,
    e_shift_check,
    input_norms,
    parse_real,
    shift_mass,
    sine_mass,
    standardizing_map,
)
from lpcrit.function_model import Box, PowerProfile, TruncatedReciprocal
from tests import oracles


# ---------------------------------------------------------------------------
# parsing and quantization


@pytest.mark.parametrize(
    "text,coef,power",
    [
        ("1.5", Fraction(3, 2), 0),
        ("pi", Fraction(1), 1),
        ("-pi/2", Fraction(-1, 2), 1),
        ("3pi", Fraction(3), 1),
        ("3*pi/2", Fraction(3, 2), 1),
        ("2/3", Fraction(2, 3), 0),
        ("1e-3", Fraction(1, 1000), 0),
    ],
)
def test_parse_real(text, coef, power):
    assert parse_real(text) == Real(coef, power)


@pytest.mark.parametrize("bad", ["", "abc", "*pi", "pi/0", "1/2/3", "2 pie"])
def test_parse_real_rejects(bad):
    with pytest.raises(ValueError):
        parse_real(bad)


@pytest.mark.parametrize("t,s", [("0", "1"), ("pi", "1"), ("-2pi", "1"), ("3pi/2", "2"), ("pi/3", 3), (1, "pi")])
def test_symbolic_multiples_of_pi_violate(t, s):
    q = check_quantization(t, s)
    assert q.verdict == "violated" and q.exact and q.distance == 0


def test_quantization_decomposition():
    q = check_quantization("pi/2", "3")
    assert q.m == 1 and q.tau == pytest.approx(math.pi / 2) and q.assertive
    q = check_quantization(1.0, -1.0)
    assert q.m == 0 and q.tau == pytest.approx(1.0) and q.distance == pytest.approx(1.0)


def test_eps_boundary():
    assert check_quantization(math.pi + 2e-9, 1).assertive
    assert check_quantization(math.pi + 5e-10, 1).verdict == "violated"
    assert check_quantization(math.pi + 5e-10, 1, eps=1e-10).assertive
    with pytest.raises(ValueError):
        check_quantization(1, 1, eps=0)


def test_truncated_pi_decimal_is_close_but_allowed():
    # seven digits of pi/2 times 2 is 3.1415926, about 5e-8 from pi
    q = check_quantization("1.5707963", "2")
    assert q.assertive and q.distance < 1e-7


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_decomposition_invariant(t, s):
    q = check_quantization(t, s)
    assert 0 <= q.tau < math.pi
    assert q.m * math.pi + q.tau == pytest.approx(abs(t * s), abs=1e-9)


# ---------------------------------------------------------------------------
# decomposition and constants


def test_delta_rule_and_override():
    cert = build_decomposition(1.0, 1.0, 2)
    assert cert.delta == default_delta(1.0) == 0.25
    assert cert.e_shift_check
    assert build_decomposition(1.0, 1.0, 2, delta=0.5).delta == 0.5
    for bad in (0.0, 0.6, -0.1):
        with pytest.raises(ValueError):
            build_decomposition(1.0, 1.0, 2, delta=bad)
    with pytest.raises(ValueError):
        build_decomposition(1.0, 1.0, 0.5)


def test_refuses_violated_pairs():
    with pytest.raises(QuantizationViolated) as exc:
        build_decomposition("pi", 1, 2)
    assert exc.value.report.verdict == "violated"


def test_multiplier_blows_up_near_pi_z():
    consts = [build_decomposition(math.pi + 10.0**-j, 1, 2).multiplier_norm for j in range(1, 8)]
    assert all(a < b for a, b in zip(consts, consts[1:]))


@settings(max_examples=200)
@given(st.floats(1e-6, math.pi - 1e-6))
def test_shift_moves_e_off_itself(tau):
    delta = default_delta(tau)
    assert e_shift_check(tau, delta)
    # points of E shifted by tau stay at distance >= delta from pi Z
    u = np.linspace(-delta, delta, 101)
    r = np.mod(u + tau, math.pi)
    assert np.all(np.minimum(r, math.pi - r) >= delta * (1 - 1e-9))


@settings(max_examples=100)
@given(st.floats(1e-4, math.pi - 1e-4))
def test_multiplier_grid_bound(tau):
    # 1/|sin| is at most the multiplier off E and on the shifted E
    d = default_delta(tau)
    c = 1 / math.sin(d)
    # rounding x near pi costs about ulp(pi)/d relative accuracy in sin(x)
    tol = 1 + 1e-12 + 8 * np.finfo(float).eps * math.pi / d
    xi = np.linspace(d, math.pi - d, 2001)
    assert np.all(1 / np.abs(np.sin(xi)) <= c * tol)
    u = np.linspace(-d, d, 2001)
    assert np.all(1 / np.abs(np.sin(u - tau)) <= c * tol)


# ---------------------------------------------------------------------------
# bounds


def test_box_example():
    cert = certify_bound(Box(0, 1), "pi/2", 1, 2)
    assert cert.delta == pytest.approx(math.pi / 8)
    assert cert.bound == pytest.approx(6.425, rel=0.01)
    # the norms feeding the bound agree with quadrature
    sine = math.sqrt(oracles.quad_sin_power(0, 1, 2))
    shift = math.sqrt(2.0)
    assert cert.input_norms["sine"].contains(sine)
    assert cert.input_norms["shift"].contains(shift)
    assert cert.bound >= (2 * sine + shift) / math.sin(math.pi / 8)


def test_zero_function_gives_zero_bound():
    zero = Enclosure.point(0.0)
    cert = certify_bound(t=1.0, s=1.0, p=2, norms=(zero, zero))
    assert cert.bound == 0.0


def test_requires_function_or_norms():
    with pytest.raises(ValueError):
        certify_bound(t=1.0, s=1.0, p=2)
    with pytest.raises(ValueError):
        certify_bound(t=1.0, s=1.0, p=2, norms=(Enclosure(0.0, math.inf), Enclosure.point(1.0)))


def test_certificate_json_fields():
    d = certify_bound(Box(0, 1), 1.0, 1.0, 2).to_dict()
    for key in ("delta", "multiplier_norm", "e_set", "e_shift_check", "bound", "m", "tau"):
        assert key in d
    assert d["input_norms"]["sine"]["provenance"]


@pytest.mark.parametrize("t,s", [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)])
def test_sign_symmetry(t, s):
    ref = certify_bound(Box(0, 1), 1.0, 1.0, 2)
    cert = certify_bound(Box(0, 1), t, s, 2)
    assert cert.multiplier_norm == ref.multiplier_norm
    assert cert.input_norms["sine"] == ref.input_norms["sine"]


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-2, 2), st.floats(0.05, 3), st.floats(0.2, 6), st.floats(0.2, 4),
    st.sampled_from([1.0, 1.5, 2.0, 3.0]),
)
def test_soundness_on_boxes(lo, width, t, s, p):
    assume(oracles.dist_to_pi_z(t * s) >= 1e-3)
    cert = certify_bound(Box(lo, lo + width), t, s, p)
    assert cert.bound >= oracles.box_norm(lo, lo + width, p)


@pytest.mark.parametrize("alpha,p", [(2.0, 1.0), (1.0, 2.0), (0.8, 2.0)])
def test_power_profile_norms_against_quadrature(alpha, p):
    from scipy import integrate

    f = PowerProfile(alpha)
    s, t = 1.3, 0.9
    sm = sine_mass(f, s, p)
    integrand = lambda x: abs(math.sin(s * x)) ** p * (1 + abs(x)) ** (-alpha * p)  # noqa: E731
    truth = 0.0
    for k in range(0, 2000):
        v, _ = integrate.quad(integrand, k * math.pi / s, (k + 1) * math.pi / s, epsabs=1e-14)
        truth += 2 * v
    assert sm.lower <= truth
    assert truth <= sm.upper + 1e-6  # quadrature truncated at x ~ 4800
    sh = shift_mass(f, t, p)
    g = lambda x: abs((1 + abs(x + t)) ** (-alpha) - (1 + abs(x)) ** (-alpha)) ** p  # noqa: E731
    truth = sum(integrate.quad(g, a, b, epsabs=1e-14, limit=200)[0] for a, b in [(-np.inf, -t), (-t, 0), (0, np.inf)])
    assert sh.lower - 1e-12 <= truth <= sh.upper + 1e-12
    assert certify_bound(f, t, s, p).bound >= oracles.power_profile_norm(alpha, p)


def test_reciprocal_norms():
    f = TruncatedReciprocal()
    from scipy import integrate

    sm = sine_mass(f, 1.0, 2)
    truth, _ = integrate.quad(lambda x: (math.sin(x) / x) ** 2, 0, 1, epsabs=1e-14)
    assert sm.lower <= truth <= sm.upper
    with pytest.raises(ValueError):
        input_norms(f, 1.0, 1.0, 2)


# ---------------------------------------------------------------------------
# n dimensions


def test_nd_example():
    one = Enclosure.point(1.0)
    cert = certify_bound_nd((one, one), ["pi/2", 0, 0], [1, 0, 0], 2)
    assert cert.dim == 3 and cert.delta == pytest.approx(math.pi / 8)
    assert "strip" in cert.e_set
    assert cert.bound == pytest.approx(3 / math.sin(math.pi / 8), rel=1e-12)


def test_nd_refuses_quantized_and_bad_input():
    one = Enclosure.point(1.0)
    with pytest.raises(QuantizationViolated):
        certify_bound_nd((one, one), ["pi", 1, 0], [1, 0, 0], 2)
    with pytest.raises(ValueError):
        certify_bound_nd((one, one), [1, 0], [0, 0], 2)
    with pytest.raises(ValueError):
        certify_bound_nd((one, one), [1, 0], [1, 0, 0], 2)


@settings(max_examples=100)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5).filter(lambda b: np.linalg.norm(b) > 0.1))
def test_standardizing_map(b):
    C = standardizing_map(b)
    assert np.allclose(C[0], b)
    assert abs(np.linalg.det(C)) > 1e-8
    x = np.random.default_rng(0).normal(size=len(b))
    assert (C @ x)[0] == pytest.approx(np.dot(b, x), abs=1e-12)


def test_standardizing_map_with_shift():
    a, b = np.array([1.0, 2.0, 0.5]), np.array([0.0, 1.0, 1.0])
    C = standardizing_map(b, a, tau=1.7)
    ca = C @ a
    assert ca[0] == pytest.approx(a @ b)
    assert ca[1] == pytest.approx(1.7)
    assert np.allclose(ca[2:], 0, atol=1e-12)
