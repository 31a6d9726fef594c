import pytest
from hypothesis import given, strategies as st

from superkoszul.brackets import PStructure, VolumeData, canonical_schouten, divergence
from superkoszul.corpus import CATALOG, catalog, random_function, random_operator, rng_for
from superkoszul.expr import parse
from superkoszul.hbarops import HbarOp, build_Delta_P, de_rham_op, divergence_op
from superkoszul.mx import (
    TO_COTANGENT,
    TO_TANGENT,
    DualPair,
    GaussianVolume,
    classical_mx,
    delta_P_star,
    modular_checks,
    pairing_adjoint_oracle,
    quantum_mx,
    solve_modular_potential,
    symbol_mx_commutes,
)
from superkoszul.suites import expected_generator_images
from superkoszul.superalg import MINUS_I_HBAR, Chart, substitute
from superkoszul.thick import form_basis

seeds = st.integers(0, 10**6)
PARITIES = [(0, 0), (0, 1), (0, 0, 0)]


@pytest.mark.parametrize("pars", PARITIES)
@pytest.mark.parametrize("log_rho", ["0", "x1", "x1^2 - 3*x1"])
def test_generator_images(pars, log_rho):
    c = Chart.standard(pars)
    vol = VolumeData(parse(log_rho, c))
    pair = DualPair.forms_multivectors(c)
    for A, want in expected_generator_images(c, vol):
        assert quantum_mx(A, pair, vol) == want


@pytest.mark.parametrize("pars", PARITIES)
def test_de_rham_goes_to_divergence(pars):
    c = Chart.standard(pars)
    vol = VolumeData(parse("x1^2/2 + x1", c))
    pair = DualPair.forms_multivectors(c)
    d = de_rham_op(c).scale(MINUS_I_HBAR)
    assert quantum_mx(d, pair, vol) == divergence_op(c, vol).scale(MINUS_I_HBAR * MINUS_I_HBAR)


@pytest.mark.parametrize("inst", CATALOG, ids=lambda i: i.name)
def test_delta_p_star_closed_form(inst):
    c, P, lr, _ = inst.build()
    rule, closed = delta_P_star(PStructure(P), VolumeData(lr))
    assert rule == closed


@given(seeds, st.sampled_from(PARITIES))
def test_mx_is_an_involution_and_respects_symbols(seed, pars):
    c = Chart.standard(pars)
    rng = rng_for(seed, "mx")
    vol = VolumeData(random_function(c, rng, 2, 0))
    pair = DualPair.forms_multivectors(c)
    gens = [g.name for g in c.base] + [c.dx_of(g).name for g in c.base]
    A = random_operator(c, gens, rng, 2, 2, seed % 2)
    assert quantum_mx(quantum_mx(A, pair, vol), pair, vol, TO_TANGENT) == A
    assert symbol_mx_commutes(A, pair, vol).is_zero()


def test_classical_mx_swaps_fiber_roles():
    c = Chart.standard((0, 0))
    h = parse("x1*pi1*dx2", c)
    there = classical_mx(h, TO_COTANGENT)
    assert there == parse("-x1*xs1*ps2", c)
    assert classical_mx(there, TO_TANGENT) == h


def _oracle_setup(c):
    gauss = GaussianVolume(c, {g.name: 1 + k for k, g in enumerate(c.base)}, {g.name: k for k, g in enumerate(c.base)})
    fs = form_basis(c, 2, [c.one(), c("x1")])
    gs = [substitute(f, {c.dx_of(g): c(c.xs_of(g).name) for g in c.base}) for f in fs]
    return gauss, [(f, g) for f in fs[:5] for g in gs[:5]]


@pytest.mark.parametrize("name", ["bivector-3d", "linear-so3", "constant-bivector-2d"])
def test_rule_based_mx_agrees_with_pairing_oracle(name):
    c, P, _, _ = catalog(name).build()
    gauss, corpus = _oracle_setup(c)
    pair = DualPair.forms_multivectors(c)
    for A in (build_Delta_P(P), de_rham_op(c).scale(MINUS_I_HBAR), HbarOp.mult(c("x1") * c("dx2"))):
        chk = pairing_adjoint_oracle(A, pair, gauss, corpus)
        assert chk.status == "pass", chk.witnesses


def test_pairing_oracle_rejects_wrong_adjoint():
    c = Chart.standard((0, 0))
    gauss, corpus = _oracle_setup(c)
    pair = DualPair.forms_multivectors(c)
    A = de_rham_op(c).scale(MINUS_I_HBAR)
    wrong = quantum_mx(A, pair, gauss.volume).scale(MINUS_I_HBAR * -1)
    assert pairing_adjoint_oracle(A, pair, gauss, corpus, A_star=wrong).status == "fail"


@pytest.mark.parametrize("inst", [i for i in CATALOG if i.pinfty], ids=lambda i: i.name)
def test_modular_class_closed_and_gauge_law(inst):
    c, P, lr, _ = inst.build()
    rng = rng_for(7, inst.name)
    fns = [f for f in (random_function(c, rng, 2, 0) for _ in range(10)) if f]
    for chk in modular_checks(PStructure(P), VolumeData(lr), fns):
        assert chk.status == "pass", (chk.name, chk.witnesses)


def test_modular_potential_instance():
    c, P, lr, F = catalog("modular-potential").build()
    mu = divergence(P, VolumeData(lr))
    assert mu and canonical_schouten(P, F) == mu


def test_modular_obstruction_has_no_potential():
    c, P, lr, _ = catalog("modular-obstruction").build()
    assert divergence(P, VolumeData(lr))
    assert solve_modular_potential(PStructure(P), VolumeData(lr), 3) is None
