from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from superkoszul.corpus import random_poly, rng_for
from superkoszul.expr import parse
from superkoszul.superalg import (
    Chart,
    ChartMismatch,
    NotNilpotent,
    Scalar,
    berezin_integral,
    exp_nilpotent,
    left_derivative,
    substitute,
    to_text,
)

PARITIES = [(0, 0), (0, 1), (1, 1), (0, 0, 1)]


def _chart(k):
    return Chart.standard(PARITIES[k % len(PARITIES)])


def _poly(c, seed, label, parity=None):
    gens = [g.name for g in c.base] + [c.dx_of(g).name for g in c.base] + [c.xs_of(g).name for g in c.base]
    return random_poly(c, gens, rng_for(seed, label), 3, 4, parity)


seeds = st.integers(0, 10**6)


@given(seeds, st.integers(0, 3), st.sampled_from([0, 1]), st.sampled_from([0, 1]))
def test_supercommutativity(seed, k, pa, pb):
    c = _chart(k)
    a, b = _poly(c, seed, "a", pa), _poly(c, seed, "b", pb)
    sign = -1 if pa * pb else 1
    assert a * b == b * a * sign


@given(seeds, st.integers(0, 3))
def test_associativity_and_distributivity(seed, k):
    c = _chart(k)
    a, b, d = (_poly(c, seed, x) for x in "abd")
    assert (a * b) * d == a * (b * d)
    assert a * (b + d) == a * b + a * d


@given(seeds, st.integers(0, 3), st.sampled_from([0, 1]), st.sampled_from([0, 1]))
def test_left_derivative_is_graded_derivation(seed, k, pa, pb):
    c = _chart(k)
    a, b = _poly(c, seed, "a", pa), _poly(c, seed, "b", pb)
    for g in list(c.base) + [c.dx_of(x) for x in c.base]:
        sign = -1 if (g.parity * pa) % 2 else 1
        lhs = left_derivative(a * b, g)
        rhs = left_derivative(a, g) * b + a * left_derivative(b, g) * sign
        assert lhs == rhs


@given(seeds, st.integers(0, 3))
def test_partial_derivatives_supercommute(seed, k):
    c = _chart(k)
    f = _poly(c, seed, "f")
    gs = list(c.base) + [c.dx_of(x) for x in c.base]
    for g in gs:
        for h in gs:
            sign = -1 if g.parity * h.parity else 1
            assert left_derivative(left_derivative(f, h), g) == left_derivative(left_derivative(f, g), h) * sign


def test_odd_square_vanishes():
    c = Chart.standard((0, 0))
    assert (c("dx1") * c("dx1")).is_zero()
    assert c("dx1") * c("dx2") == -(c("dx2") * c("dx1"))


def test_berezin_single_odd_variable():
    c = Chart.standard((0,))
    xi = c("dx1")
    assert berezin_integral(xi, ["dx1"]) == c.one()
    assert berezin_integral(c("x1"), ["dx1"]).is_zero()


def test_berezin_last_measure_acts_first():
    # int D(xi1) D(xi2) xi1 xi2: the innermost (last) variable xi2 is integrated first
    c = Chart.standard((0, 0))
    f = c("dx1") * c("dx2")
    assert berezin_integral(f, ["dx1", "dx2"]) == -c.one()
    assert berezin_integral(f, ["dx2", "dx1"]) == c.one()


def test_berezin_is_translation_invariant():
    c = Chart.standard((0, 0))
    f = parse("x1*dx1*dx2 + dx2 + 3", c)
    shifted = substitute(f, {c["dx1"]: c("dx1") + c("dx2") * c("x2")})
    # a shift of dx1 by something independent of dx1 leaves the top component alone
    assert berezin_integral(shifted, ["dx1", "dx2"]) == berezin_integral(f, ["dx1", "dx2"])


def test_exp_nilpotent_of_odd_pair():
    c = Chart.standard((0, 0))
    a = c("dx1") * c("xs1") + c("dx2") * c("xs2")
    e = exp_nilpotent(a)
    assert e == c.one() + a + a * a * Fraction(1, 2)
    with pytest.raises(NotNilpotent):
        exp_nilpotent(c("x1"))


def test_scalar_i_squared():
    assert Scalar.i() * Scalar.i() == Scalar.of(-1)
    assert (Scalar.hbar(2) * Scalar.of(3)).inverse() * Scalar.hbar(2) == Scalar.of(Fraction(1, 3))


def test_chart_mismatch():
    with pytest.raises(ChartMismatch):
        Chart.standard((0,))("x1") + Chart.standard((0, 0))("x1")


def test_to_text_roundtrip():
    c = Chart.standard((0, 1))
    f = parse("x1^2*xs2/3 - 2*dx1*dx2 + 5", c)
    assert parse(to_text(f), c) == f
