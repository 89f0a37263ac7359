"""Tests for exact Laurent polynomial arithmetic."""

import doctest
import json
import random
from fractions import Fraction

import pytest

import noodlefork.laurent
from noodlefork.laurent import (
    ONE,
    ZERO,
    LaurentPoly,
    ModEval,
    NonUnit,
    ZeroPoint,
    ZeroPolynomial,
    const,
    qpow,
)

# Degree-7 polynomial used throughout: the expansion of
# (q-1)(q-2)(2q-1)(q^2-q+1)(q^2+1), frozen after expanding it by hand and
# with the independent convolution oracle below.
SEPTIC = LaurentPoly(0, (-2, 9, -18, 25, -25, 18, -9, 2))
SEPTIC_FACTORS = (
    LaurentPoly(0, (-1, 1)),
    LaurentPoly(0, (-2, 1)),
    LaurentPoly(0, (-1, 2)),
    LaurentPoly(0, (1, -1, 1)),
    LaurentPoly(0, (1, 0, 1)),
)


def slow_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    # Independent multiplication oracle: sparse dict convolution.
    acc: dict[int, int] = {}
    for i, c in enumerate(a.coeffs):
        for j, d in enumerate(b.coeffs):
            deg = a.min_deg + i + b.min_deg + j
            acc[deg] = acc.get(deg, 0) + c * d
    if not any(acc.values()):
        return ZERO
    lo, hi = min(acc), max(acc)
    return LaurentPoly(lo, [acc.get(d, 0) for d in range(lo, hi + 1)])


def rand_poly(rng: random.Random, span: int = 5, coeff: int = 9) -> LaurentPoly:
    lo = rng.randint(-span, span)
    n = rng.randint(0, span)
    return LaurentPoly(lo, [rng.randint(-coeff, coeff) for _ in range(n)])


def test_doctests_pass():
    failures, attempted = doctest.testmod(noodlefork.laurent)
    assert failures == 0 and attempted > 0


def test_construction_trims_to_canonical_form():
    assert LaurentPoly(2, (0, 0, 5, 0)) == LaurentPoly(4, (5,))
    assert LaurentPoly(-3, (0,)) == ZERO
    assert LaurentPoly(7, ()) == ZERO
    assert ZERO.min_deg == 0 and ZERO.coeffs == ()


def test_difference_of_squares():
    one_minus_q = LaurentPoly(0, (1, -1))
    one_plus_q = LaurentPoly(0, (1, 1))
    assert one_minus_q * one_plus_q == LaurentPoly(0, (1, 0, -1))


def test_zero_annihilates():
    assert SEPTIC * ZERO == ZERO
    assert ZERO * SEPTIC == ZERO


def test_septic_expansion_matches_frozen_value():
    prod = ONE
    check = ONE
    for f in SEPTIC_FACTORS:
        prod = prod * f
        check = slow_mul(check, f)
    assert prod == SEPTIC
    assert check == SEPTIC
    assert prod.evaluate(1) == 0
    assert prod.evaluate(2) == 0


def test_normalize_examples():
    # The product has constant -2; its canonical representative flips the sign.
    assert SEPTIC.normalize() == -SEPTIC
    assert (-SEPTIC).normalize() == -SEPTIC
    assert qpow(5).normalize() == ONE
    assert ZERO.normalize() == ZERO
    assert LaurentPoly(-4, (-3, 1)).normalize() == LaurentPoly(0, (3, -1))


def test_normalize_constant_on_sign_shift_orbits():
    rng = random.Random(2024)
    for _ in range(50):
        p = rand_poly(rng)
        base = p.normalize()
        for s in range(-20, 21):
            assert (p.shift(s)).normalize() == base
            assert (-(p.shift(s))).normalize() == base
        assert base.normalize() == base
        if not p.is_zero():
            assert base.min_deg == 0 and base.coeffs[0] > 0


def test_evaluate_examples():
    assert SEPTIC.evaluate(2) == 0
    assert SEPTIC.evaluate(Fraction(1, 2)) == 0
    assert LaurentPoly(0, (1, -1)).evaluate(3) == -2
    assert SEPTIC.evaluate(-1) == -108


def test_evaluate_rejects_zero():
    with pytest.raises(ZeroPoint):
        LaurentPoly(-1, (1,)).evaluate(0)
    with pytest.raises(ZeroPoint):
        ONE.evaluate(Fraction(0))


def test_eval_mod_examples():
    assert LaurentPoly(0, (1, -1)).eval_mod(2, 101) == 100
    assert ZERO.eval_mod(7, 101) == 0
    assert SEPTIC.eval_mod(2, 10**9 + 7) == 0


def test_eval_mod_negative_exponents_use_inverse():
    p = qpow(-1)  # q^-1 at q=2 mod 101 is the inverse of 2
    assert p.eval_mod(2, 101) == 51
    assert (2 * 51) % 101 == 1


def test_eval_mod_rejects_non_units():
    with pytest.raises(NonUnit):
        ONE.eval_mod(6, 9)


def test_mirror_examples():
    assert LaurentPoly(0, (1, -1)).mirror() == LaurentPoly(-1, (-1, 1))
    rng = random.Random(7)
    for _ in range(50):
        p = rand_poly(rng)
        assert p.mirror().mirror() == p


def test_mirror_is_ring_automorphism():
    rng = random.Random(8)
    for _ in range(50):
        p, q = rand_poly(rng), rand_poly(rng)
        assert (p * q).mirror() == p.mirror() * q.mirror()
        assert (p + q).mirror() == p.mirror() + q.mirror()


def test_septic_is_mirror_antisymmetric():
    # q^7 * SEPTIC(1/q) = -SEPTIC(q), so both normalize identically.
    assert SEPTIC.mirror().normalize() == SEPTIC.normalize()
    assert SEPTIC.mirror().shift(7) == -SEPTIC


def test_rational_roots_of_septic():
    scan = SEPTIC.rational_roots()
    assert scan.roots == {Fraction(1), Fraction(2), Fraction(1, 2)}
    assert scan.reciprocal_closed == {Fraction(2), Fraction(1, 2)}


def test_rational_roots_simple_cases():
    scan = LaurentPoly(0, (1, -1)).rational_roots()
    assert scan.roots == {Fraction(1)}
    assert scan.reciprocal_closed == frozenset()
    scan = LaurentPoly(0, (1, 0, 1)).rational_roots()
    assert scan.roots == frozenset()
    with pytest.raises(ZeroPolynomial):
        ZERO.rational_roots()


def test_rational_roots_with_negative_pair():
    # (q + 3)(3q + 1) has the reciprocal pair -3, -1/3.
    p = LaurentPoly(0, (3, 10, 3))
    scan = p.rational_roots()
    assert scan.roots == {Fraction(-3), Fraction(-1, 3)}
    assert scan.reciprocal_closed == {Fraction(-3), Fraction(-1, 3)}


def test_rational_roots_ignore_shift():
    assert SEPTIC.shift(-3).rational_roots().roots == SEPTIC.rational_roots().roots


def test_ring_axioms_on_random_triples():
    rng = random.Random(90125)
    for _ in range(60):
        a, b, c = rand_poly(rng), rand_poly(rng), rand_poly(rng)
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a - a == ZERO
        assert a * ONE == a


def test_mul_matches_convolution_oracle():
    rng = random.Random(31337)
    for _ in range(80):
        a, b = rand_poly(rng), rand_poly(rng)
        assert a * b == slow_mul(a, b)


def test_evaluation_is_a_ring_homomorphism():
    rng = random.Random(55)
    for _ in range(40):
        a, b = rand_poly(rng), rand_poly(rng)
        x = Fraction(rng.randint(1, 9), rng.randint(1, 9)) * rng.choice((1, -1))
        assert (a * b).evaluate(x) == a.evaluate(x) * b.evaluate(x)
        assert (a + b).evaluate(x) == a.evaluate(x) + b.evaluate(x)


def test_eval_mod_is_a_ring_homomorphism():
    rng = random.Random(56)
    m = 10**9 + 7
    for _ in range(40):
        a, b = rand_poly(rng), rand_poly(rng)
        q0 = rng.randint(2, m - 1)
        assert (a * b).eval_mod(q0, m) == a.eval_mod(q0, m) * b.eval_mod(q0, m) % m
        assert (a + b).eval_mod(q0, m) == (a.eval_mod(q0, m) + b.eval_mod(q0, m)) % m


def test_zero_polynomial_has_zero_residue_everywhere():
    rng = random.Random(57)
    for _ in range(20):
        p = rand_poly(rng)
        z = p - p
        assert z == ZERO
        for q0, m in ((2, 101), (3, 97), (17, 2**61 - 1)):
            assert z.eval_mod(q0, m) == 0


def test_pow_and_shift():
    assert (Q := qpow(1)) ** 3 == qpow(3)
    assert Q**0 == ONE
    p = LaurentPoly(0, (1, 1))
    assert p**2 == LaurentPoly(0, (1, 2, 1))
    assert p.shift(-2) == LaurentPoly(-2, (1, 1))


def test_unit_monomial_inversion():
    assert qpow(3) ** -1 == qpow(-3)
    assert (-qpow(2)) ** -1 == -qpow(-2)
    assert (-qpow(2)) ** -2 == qpow(-4)
    with pytest.raises(ValueError):
        LaurentPoly(0, (1, 1)) ** -1
    with pytest.raises(ValueError):
        (2 * ONE) ** -1


def test_coefficient_lookup():
    assert SEPTIC.coefficient(3) == 25
    assert SEPTIC.coefficient(-1) == 0
    assert SEPTIC.coefficient(8) == 0


def test_json_roundtrip():
    for p in (ZERO, ONE, SEPTIC, LaurentPoly(-4, (1, 0, -7))):
        blob = json.dumps(p.to_json())
        assert LaurentPoly.from_json(json.loads(blob)) == p
    assert SEPTIC.to_json() == {
        "min_deg": 0,
        "coeffs": [-2, 9, -18, 25, -25, 18, -9, 2],
    }


def test_modeval_validates_unit():
    ev = ModEval(101, 2, 96)
    assert ModEval.from_json(json.loads(json.dumps(ev.to_json()))) == ev
    with pytest.raises(NonUnit):
        ModEval(100, 10, 0)


def test_int_coercion_in_arithmetic():
    p = LaurentPoly(0, (1, 1))
    assert 1 + p == LaurentPoly(0, (2, 1))
    assert p - 1 == qpow(1)
    assert 3 * p == LaurentPoly(0, (3, 3))
    assert const(-4) == LaurentPoly(0, (-4,))
