import pytest
from hypothesis import given, strategies as st

from superkoszul.brackets import H_P, H_d, H_dP, H_schouten, PStructure, VolumeData, divergence
from superkoszul.corpus import CATALOG, catalog, form_gens, monomials, random_function, random_pinfty, rng_for
from superkoszul.superalg import Chart, substitute
from superkoszul.thick import (
    anchor_genfun,
    anchor_kernel,
    check_intertwining,
    check_phi_related,
    classical_anchor_pullback,
    dual_genfun,
    form_basis,
    intertwining_residuals,
    linear_genfun,
    pairing_kernel,
    quantum_dual,
    quantum_pullback,
    thick_pullback,
)

seeds = st.integers(0, 10**6)


@given(seeds, st.sampled_from([(0,), (0, 0), (0, 1), (0, 0, 0)]))
def test_linear_pullback_is_composition(seed, pars):
    c = Chart.standard(pars)
    rng = rng_for(seed, "linear")
    phi = {g.name: c(g.name) + random_function(c, rng, 2, g.parity, 2) for g in c.base}
    w = random_function(c, rng, 3, 0)
    want = substitute(w, {c[g]: v for g, v in phi.items()})
    assert thick_pullback(linear_genfun(c, phi), w, 4) == want


@pytest.mark.parametrize("inst", CATALOG, ids=lambda i: i.name)
def test_anchor_relates_lichnerowicz_and_de_rham(inst):
    c, P, _, _ = inst.build()
    chk = check_phi_related(H_dP(P), H_d(c), anchor_genfun(P))
    assert chk.status == ("pass" if inst.pinfty else "fail")


@pytest.mark.parametrize("inst", CATALOG, ids=lambda i: i.name)
def test_dual_anchor_relates_koszul_and_schouten(inst):
    c, P, _, _ = inst.build()
    chk = check_phi_related(H_schouten(c), H_P(P), dual_genfun(P), truncation=4)
    assert chk.status == ("pass" if inst.pinfty else "fail")


@pytest.mark.parametrize("name", ["linear-so3", "mixed-quartic", "curved-3d"])
def test_thick_anchor_pullback_is_classical(name):
    c, P, _, _ = catalog(name).build()
    S = anchor_genfun(P)
    for w in monomials(c, form_gens(c), 2):
        assert thick_pullback(S, w, 4) == classical_anchor_pullback(P, w)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pairing_kernel_is_identity(n):
    c = Chart.standard((0,) * n)
    K = pairing_kernel(c)
    for f in monomials(c, form_gens(c), 2 * n):
        assert quantum_pullback(K, f) == f


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("pairing", ["kernel", "induced"])
def test_double_dual_is_identity(n, pairing):
    c = Chart.standard((0,) * n)
    K = pairing_kernel(c)
    KK = quantum_dual(quantum_dual(K, pairing), pairing)
    assert (KK.S, KK.inputs, KK.outputs, KK.pair_order) == (K.S, K.inputs, K.outputs, K.pair_order)


@pytest.mark.parametrize("pairing", ["kernel", "induced"])
def test_double_dual_of_anchor_kernel(pairing):
    c, P, _, _ = catalog("linear-so3").build()
    A = anchor_kernel(P)
    AA = quantum_dual(quantum_dual(A, pairing), pairing)
    for f in monomials(c, form_gens(c), 3):
        assert quantum_pullback(AA, f) == quantum_pullback(A, f)


def test_anchor_kernel_is_classical_pullback():
    c, P, _, _ = catalog("bivector-3d").build()
    K = anchor_kernel(P)
    for f in monomials(c, [g.name for g in c.base] + [c.dx_of(g).name for g in c.base], 2):
        assert quantum_pullback(K, f) == classical_anchor_pullback(P, f)


@given(seeds, st.sampled_from([1, 2, 3]))
def test_intertwining_for_unimodular_data(seed, n):
    c = Chart.standard((0,) * n)
    P = random_pinfty(c, rng_for(seed, "pinfty"), curved=seed % 2 == 1)
    vol = VolumeData.trivial(c)
    if divergence(P, vol):
        return
    chk = check_intertwining(PStructure(P), vol, corpus=form_basis(c, 3))
    assert chk.status == "pass", chk.witnesses


def test_corrected_diagram_commutes():
    c, P, lr, F = catalog("modular-potential").build()
    chk = check_intertwining(PStructure(P), VolumeData(lr), F)
    assert chk.status == "pass", chk.witnesses


def test_uncorrected_diagram_fails_with_modular_class():
    c, P, lr, F = catalog("modular-potential").build()
    res = intertwining_residuals(PStructure(P), VolumeData(lr), None, form_basis(c))
    assert any(res)


def test_intertwining_skips_without_potential():
    c, P, lr, _ = catalog("modular-obstruction").build()
    assert check_intertwining(PStructure(P), VolumeData(lr)).status == "skipped"
