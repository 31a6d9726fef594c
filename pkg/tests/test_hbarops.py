import pytest
from hypothesis import given, strategies as st

from superkoszul.brackets import PStructure, canonical_poisson, higher_koszul
from superkoszul.corpus import CATALOG, catalog, form_gens, random_form, random_operator, rng_for
from superkoszul.expr import parse
from superkoszul.hbarops import (
    DivisibilityError,
    HbarOp,
    build_Delta_P,
    classical_bracket,
    commutator,
    compose,
    de_rham_op,
    hleibniz_residual,
    koszul_bv_operator,
    principal_symbol,
    quantum_bracket,
    quantize_standard,
    square,
)
from superkoszul.superalg import Chart, Scalar

INV_HBAR_I = Scalar.i() * Scalar.hbar(-1)
seeds = st.integers(0, 10**6)


def _ops(seed, pars, order=2):
    c = Chart.standard(pars)
    rng = rng_for(seed, "ops")
    gens = [g.name for g in c.base]
    return c, random_operator(c, gens, rng, order, 2, seed % 2), random_operator(c, gens, rng, order, 2, (seed // 2) % 2)


@given(seeds, st.sampled_from([(0,), (0, 1), (1, 1)]))
def test_symbol_is_multiplicative(seed, pars):
    c, A, B = _ops(seed, pars)
    assert principal_symbol(compose(A, B)) == principal_symbol(A) * principal_symbol(B)


@given(seeds, st.sampled_from([(0,), (0, 1), (1, 1)]))
def test_symbol_of_commutator_is_poisson_bracket(seed, pars):
    c, A, B = _ops(seed, pars)
    lhs = principal_symbol(commutator(A, B) * INV_HBAR_I)
    assert lhs == canonical_poisson(principal_symbol(A), principal_symbol(B))


def test_quantize_then_symbol_roundtrip():
    c = Chart.standard((0, 1))
    s = parse("x1*p1^2 + x2*p2 + 3*p1*p2", c)
    assert principal_symbol(quantize_standard(s)) == s


def test_canonical_commutation_relation():
    c = Chart.standard((0,))
    x, d = HbarOp.mult(c("x1")), HbarOp.deriv(c, "x1")
    # [d/dx, x] = 1, so the quantum bracket is the identity operator
    assert commutator(d, x) == HbarOp.identity(c)


def test_quantum_bracket_requires_divisibility():
    c = Chart.standard((0,))
    L = HbarOp.deriv(c, "x1")  # not hbar-differential: a bare derivative
    with pytest.raises(DivisibilityError):
        quantum_bracket(L, [c("x1")])


@given(seeds, st.sampled_from([(0, 0), (0, 1)]), st.integers(0, 2))
def test_hbar_modified_leibniz(seed, pars, n):
    c = Chart.standard(pars)
    rng = rng_for(seed, "hleibniz")
    L = random_operator(c, form_gens(c), rng, 2, 2, seed % 2)
    fs = [random_form(c, rng, 2, (seed + j) % 2, 2) for j in range(n + 2)]
    if not all(fs):
        return
    assert hleibniz_residual(L, fs[2:], fs[0], fs[1]).is_zero()


def test_de_rham_squares_to_zero():
    c = Chart.standard((0, 1, 0))
    assert not square(de_rham_op(c)).terms


@pytest.mark.parametrize("inst", [i for i in CATALOG if i.pinfty], ids=lambda i: i.name)
def test_delta_p_squares_to_zero(inst):
    c, P, _, _ = inst.build()
    assert not square(build_Delta_P(P)).terms


def test_delta_p_square_nonzero_for_broken_p():
    c, P, _, _ = catalog("broken-bivector").build()
    assert not PStructure(P).is_pinfty
    assert square(build_Delta_P(P)).terms


@pytest.mark.parametrize("text", ["xs1*xs2", "xs1*xs2 + 3*xs2*xs3", "-2*xs1*xs3"])
def test_delta_p_constant_bivector_is_koszul_operator(text):
    c = Chart.standard((0, 0, 0))
    P = parse(text, c)
    D = build_Delta_P(P)
    assert D == koszul_bv_operator(P).scale(Scalar.hbar(2) * Scalar.of(-1))


@pytest.mark.parametrize("name", ["linear-so3", "curved-3d", "mixed-quartic"])
def test_classical_brackets_of_delta_p_are_higher_koszul(name):
    c, P, _, _ = catalog(name).build()
    D = build_Delta_P(P)
    rng = rng_for(3, name)
    for k in (0, 1, 2, 3):
        for _ in range(3):
            args = [random_form(c, rng, 2, j % 2, 2) for j in range(k)]
            assert classical_bracket(D, args) == higher_koszul(P, args)
