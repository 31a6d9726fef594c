"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Every corpus is seeded (``SEED``) and has at least ``N`` instances.  Run directly
with ``python tests/test_acceptance.py`` to print the lines without pytest.
"""
import time

import pytest

from superkoszul.brackets import (
    H_P,
    H_d,
    H_dP,
    H_schouten,
    PStructure,
    VolumeData,
    bivector_coefficient,
    canonical_poisson,
    canonical_schouten,
    de_rham,
    divergence,
    higher_derived_bracket_P,
    higher_koszul,
    koszul_binary,
    poisson_bracket_of_bivector,
)
from superkoszul.corpus import (
    base_gens,
    catalog,
    form_gens,
    monomials,
    random_bivector,
    random_form,
    random_function,
    random_operator,
    random_pinfty,
    random_poly,
    rng_for,
)
from superkoszul.hbarops import (
    build_Delta_P,
    classical_bracket,
    commutator,
    compose,
    de_rham_op,
    divergence_op,
    hleibniz_residual,
    koszul_bv_operator,
    principal_symbol,
)
from superkoszul.linfty import check_higher_jacobi, pinfty_family
from superkoszul.mx import DualPair, GaussianVolume, delta_P_star, modular_checks, pairing_adjoint_oracle, quantum_mx
from superkoszul.suites import expected_generator_images
from superkoszul.superalg import MINUS_I_HBAR, Chart, Scalar, berezin_integral, left_derivative, substitute, to_text
from superkoszul.thick import (
    anchor_genfun,
    check_intertwining,
    check_phi_related,
    dual_genfun,
    form_basis,
    linear_genfun,
    pairing_kernel,
    quantum_dual,
    quantum_pullback,
    thick_pullback,
)

SEED = 20240611
N = 50
CHARTS = [(0, 0), (0, 1), (1, 1), (0, 0, 0), (0, 0, 1)]
EVEN = [(0,), (0, 0), (0, 0, 0)]


class Tally:
    def __init__(self):
        self.cases = 0
        self.failures = []

    def __call__(self, ok, witness=""):
        self.cases += 1
        if not ok:
            self.failures.append(witness)


def _sgn(e):
    return -1 if e % 2 else 1


def _report(config, k, title, tally, elapsed, limit=None, extra=""):
    ok = not tally.failures and (limit is None or elapsed < limit)
    budget = f" (limit {limit} s)" if limit else ""
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d} {title}: {tally.cases} cases, "
            f"{len(tally.failures)} failures, {elapsed:.1f} s{budget}{extra}")
    if tally.failures:
        line += f"; first witness: {tally.failures[0]}"
    if config is not None:
        config._acceptance_lines[k] = line
    print(line)
    return ok


def _charts(i):
    return Chart.standard(CHARTS[i % len(CHARTS)])


def _pinfty_corpus(n=N):
    """Seeded P-infinity data on even bases of dimension 1..3, half of them curved."""
    out = []
    for i in range(n):
        c = Chart.standard(EVEN[i % 3])
        out.append((c, random_pinfty(c, rng_for(SEED, f"pinfty{i}"), curved=i % 2 == 1)))
    for name in ("mixed-cubic", "mixed-quartic", "mixed-curved", "mixed-two-odd"):
        c, P, _, _ = catalog(name).build()
        out.append((c, P))
    return out


# --- criteria ---------------------------------------------------------------------


def criterion_1(config=None):
    t0, tally = time.time(), Tally()
    for i in range(N):
        c = _charts(i)
        rng = rng_for(SEED, f"alg{i}")
        gens = form_gens(c) + [c.xs_of(g).name for g in c.base]
        pa, pb = i % 2, (i // 2) % 2
        a, b, d = (random_poly(c, gens, rng, 3, 4, p) for p in (pa, pb, None))
        tally(a * b == b * a * _sgn(pa * pb), ("supercommutativity", to_text(a), to_text(b)))
        tally((a * b) * d == a * (b * d), "associativity")
        for g in c.generators:
            if g.role in ("base", "tangent-fiber", "antifiber"):
                lhs = left_derivative(a * b, g)
                rhs = left_derivative(a, g) * b + a * left_derivative(b, g) * _sgn(g.parity * pa)
                tally(lhs == rhs, ("derivation", g.name))
        odd = [g.name for g in c.generators if g.parity and g.role in ("tangent-fiber", "antifiber")][:2]
        if len(odd) == 2:
            u, v = c(odd[0]), c(odd[1])
            # the last measure acts first: int Du Dv u v = -1
            tally(berezin_integral(u * v, odd) == -c.one(), "berezin order")
            tally(berezin_integral(u, odd[:1]) == c.one(), "berezin normalization")
    return _report(config, 1, "graded-algebra laws", tally, time.time() - t0, 10)


def criterion_2(config=None):
    t0, tally = time.time(), Tally()
    pb, sb = canonical_poisson, canonical_schouten
    for i in range(N):
        c = _charts(i)
        rng = rng_for(SEED, f"brackets{i}")
        ph = base_gens(c) + [c.momentum_of(g).name for g in c.base]
        mv = base_gens(c) + [c.xs_of(g).name for g in c.base]
        a, b, d = i % 2, (i // 2) % 2, (i // 4) % 2
        H, G, K = (random_poly(c, ph, rng, 3, 3, p) for p in (a, b, d))
        tally(pb(H, G) == -pb(G, H) * _sgn(a * b), "poisson antisymmetry")
        tally(pb(H, G * K) == pb(H, G) * K + G * pb(H, K) * _sgn(a * b), "poisson leibniz")
        tally(pb(H, pb(G, K)) == pb(pb(H, G), K) + pb(G, pb(H, K)) * _sgn(a * b), "poisson jacobi")
        F, G, K = (random_poly(c, mv, rng, 3, 3, p) for p in (a, b, d))
        tally(sb(F, G) == sb(G, F) * _sgn(a * b), "schouten symmetry")
        tally(sb(F, G * K) == sb(F, G) * K + G * sb(F, K) * _sgn((a + 1) * b), "schouten leibniz")
        tally(sb(F, sb(G, K)) == sb(sb(F, G), K) * _sgn(a + 1) + sb(G, sb(F, K)) * _sgn((a + 1) * (b + 1)),
              "schouten jacobi")
    return _report(config, 2, "Poisson and Schouten axioms", tally, time.time() - t0, 30)


def criterion_3(config=None):
    t0, tally = time.time(), Tally()
    for i in range(N):
        c = _charts(i)
        rng = rng_for(SEED, f"derived{i}")
        P = random_bivector(c, rng)
        f = random_poly(c, base_gens(c), rng, 3, 3, i % 2)
        g = random_poly(c, base_gens(c), rng, 3, 3, None)
        tally(higher_derived_bracket_P(P, [f, g]) == poisson_bracket_of_bivector(P, f, g),
              ("binary", to_text(P), to_text(f), to_text(g)))
    for j, (c, P) in enumerate(_pinfty_corpus()):
        fam = pinfty_family(P)
        n_max = min(fam.max_arity + 1, 4)
        rng = rng_for(SEED, f"jac{j}")
        corpus = [[random_poly(c, base_gens(c), rng, 2, 2, k % 2 if any(g.parity for g in c.base) else 0)
                   for k in range(n_max)] for _ in range(2)]
        chk = check_higher_jacobi(fam, corpus, n_max)
        tally(chk.status == "pass", ("jacobi", to_text(P), chk.witnesses[:1]))
    return _report(config, 3, "derived-bracket equivalence", tally, time.time() - t0, 60)


def criterion_4(config=None):
    """Generator table of the Koszul bracket against the displayed signs."""
    t0, tally = time.time(), Tally()
    sample = None
    for i in range(N):
        c = Chart.standard(EVEN[1 + i % 2])
        P = random_bivector(c, rng_for(SEED, f"table{i}"))
        for a in c.base:
            for b in c.base:
                xa, dxa, dxb = c(a.name), c(c.dx_of(a).name), c(c.dx_of(b).name)
                Pab = bivector_coefficient(P, a, b)
                got = (koszul_binary(P, xa, c(b.name)), koszul_binary(P, xa, dxb), koszul_binary(P, dxa, dxb))
                want = (c.zero(), -Pab, de_rham(Pab))
                ok = got == want
                if not ok and sample is None:
                    sample = (f"P = {to_text(P)}, [{a.name},d{b.name}] = {to_text(got[1])} vs {to_text(want[1])}, "
                              f"[d{a.name},d{b.name}] = {to_text(got[2])} vs {to_text(want[2])}")
                tally(ok, sample)
    return _report(config, 4, "Koszul generator table", tally, time.time() - t0)


def criterion_5(config=None):
    t0, tally = time.time(), Tally()
    inv = Scalar.i() * Scalar.hbar(-1)
    for i in range(N):
        c = Chart.standard(CHARTS[i % 3][:1 + i % 2])
        rng = rng_for(SEED, f"ops{i}")
        gens = base_gens(c)
        A = random_operator(c, gens, rng, 3, 2, i % 2)
        B = random_operator(c, gens, rng, 3, 2, (i // 2) % 2)
        sa, sb = principal_symbol(A), principal_symbol(B)
        tally(principal_symbol(compose(A, B, max_degree=6)) == sa * sb, "symbol product")
        tally(principal_symbol(commutator(A, B) * inv) == canonical_poisson(sa, sb), "symbol commutator")
    for i in range(N):
        c = Chart.standard(CHARTS[i % 2])
        rng = rng_for(SEED, f"hleib{i}")
        L = random_operator(c, form_gens(c), rng, 2, 2, i % 2)
        fs = [random_form(c, rng, 2, (i + j) % 2, 2) for j in range(4)]
        for n in (1, 2, 3):
            r = hleibniz_residual(L, fs[2:1 + n], fs[0], fs[1])
            tally(not r, ("hleibniz", n))
    return _report(config, 5, "operator calculus (truncation 6)", tally, time.time() - t0, 120)


def criterion_6(config=None):
    t0, tally = time.time(), Tally()
    corpus = _pinfty_corpus()
    for c, P in corpus:
        tally(not compose(build_Delta_P(P), build_Delta_P(P)).terms, ("square", to_text(P)))
    c, P, _, _ = catalog("broken-bivector").build()
    tally(bool(compose(build_Delta_P(P), build_Delta_P(P)).terms), "broken P must give a nonzero square")
    for i in range(N):
        c = Chart.standard(EVEN[1 + i % 2])
        rng = rng_for(SEED, f"const{i}")
        P = random_bivector(c, rng, coeff_degree=0)
        tally(build_Delta_P(P) == koszul_bv_operator(P).scale(Scalar.hbar(2) * Scalar.of(-1)), ("constant", to_text(P)))
    for j, (c, P) in enumerate(corpus[:N // 2]):
        rng = rng_for(SEED, f"cb{j}")
        D = build_Delta_P(P)
        for k in (1, 2, 3):
            args = [random_form(c, rng, 2, m % 2, 2) for m in range(k)]
            tally(classical_bracket(D, args) == higher_koszul(P, args), ("classical", k, to_text(P)))
    return _report(config, 6, "Delta_P", tally, time.time() - t0)


def criterion_7(config=None):
    t0, tally = time.time(), Tally()
    for i in range(N):
        c = _charts(i)
        rng = rng_for(SEED, f"mx{i}")
        vol = VolumeData(random_function(c, rng, 2, 0))
        pair = DualPair.forms_multivectors(c)
        for A, want in expected_generator_images(c, vol):
            tally(quantum_mx(A, pair, vol) == want, "generator image")
        d = de_rham_op(c).scale(MINUS_I_HBAR)
        tally(quantum_mx(d, pair, vol) == divergence_op(c, vol).scale(MINUS_I_HBAR * MINUS_I_HBAR), "d star")
    for j, (c, P) in enumerate(_pinfty_corpus()):
        vol = VolumeData(random_function(c, rng_for(SEED, f"rho{j}"), 2, 0))
        rule, closed = delta_P_star(PStructure(P), vol)
        tally(rule == closed, ("Delta_P star", to_text(P)))
        if any(g.parity for g in c.base):
            continue
        gauss = GaussianVolume(c, {g.name: 1 + k for k, g in enumerate(c.base)}, {g.name: k for k, g in enumerate(c.base)})
        fs = form_basis(c, 2, [c.one(), c(c.base[0].name)])
        gs = [substitute(f, {c.dx_of(g): c(c.xs_of(g).name) for g in c.base}) for f in fs]
        pairs = [(f, g) for f in fs[:4] for g in gs[:4]]
        chk = pairing_adjoint_oracle(build_Delta_P(P), DualPair.forms_multivectors(c), gauss, pairs)
        tally(chk.status == "pass", ("oracle", to_text(P)))
    return _report(config, 7, "quantum MX", tally, time.time() - t0)


def criterion_8(config=None):
    t0, tally = time.time(), Tally()
    for j, (c, P) in enumerate(_pinfty_corpus()):
        rng = rng_for(SEED, f"mod{j}")
        vol = VolumeData(random_function(c, rng, 2, 0))
        fns = [f for f in (random_function(c, rng, 2, 0) for _ in range(3)) if f]
        for chk in modular_checks(PStructure(P), vol, fns):
            tally(chk.status == "pass", (chk.name, to_text(P)))
    return _report(config, 8, "modular class", tally, time.time() - t0)


def criterion_9(config=None):
    t0, tally = time.time(), Tally()
    for i in range(N):
        c = _charts(i)
        rng = rng_for(SEED, f"lin{i}")
        phi = {g.name: c(g.name) + random_function(c, rng, 2, g.parity, 2) for g in c.base}
        w = random_function(c, rng, 3, 0)
        tally(thick_pullback(linear_genfun(c, phi), w, 4) == substitute(w, {c[g]: v for g, v in phi.items()}), "linear")
    for c, P in _pinfty_corpus():
        tally(check_phi_related(H_dP(P), H_d(c), anchor_genfun(P)).status == "pass", ("anchor", to_text(P)))
        chk = check_phi_related(H_schouten(c), H_P(P), dual_genfun(P), truncation=4)
        tally(chk.status == "pass", ("dual", to_text(P)))
    return _report(config, 9, "thick morphisms (momentum truncation 4)", tally, time.time() - t0)


def criterion_10(config=None):
    t0, tally = time.time(), Tally()
    for n in (1, 2, 3):
        c = Chart.standard((0,) * n)
        K = pairing_kernel(c)
        fiber = monomials(c, [c.dx_of(g).name for g in c.base], n)
        coeffs = monomials(c, base_gens(c), 2)
        for f in fiber:
            for a in coeffs:
                tally(quantum_pullback(K, a * f) == a * f, ("identity", n, to_text(a * f)))
        for pairing in ("kernel", "induced"):
            KK = quantum_dual(quantum_dual(K, pairing), pairing)
            same = (KK.S, KK.inputs, KK.slots, KK.dummies, KK.outputs, KK.pair_order) == \
                (K.S, K.inputs, K.slots, K.dummies, K.outputs, K.pair_order)
            tally(same, ("double dual", n, pairing))
    return _report(config, 10, "pairing-kernel normalization", tally, time.time() - t0)


def criterion_11(config=None):
    t0, tally = time.time(), Tally()
    used = 0
    for j, (c, P) in enumerate(_pinfty_corpus(2 * N)):
        if used >= N or any(g.parity for g in c.base):
            continue
        vol = VolumeData.trivial(c)
        if divergence(P, vol):
            continue
        used += 1
        chk = check_intertwining(PStructure(P), vol, corpus=form_basis(c, 3))
        tally(chk.status == "pass", ("unimodular", to_text(P), chk.witnesses[:1]))
    c, P, lr, F = catalog("modular-potential").build()
    chk = check_intertwining(PStructure(P), VolumeData(lr), F, corpus=form_basis(c, 3))
    tally(chk.status == "pass", ("corrected diagram", chk.witnesses[:1]))
    extra = f"; {used} unimodular instances + corrected diagram"
    return _report(config, 11, "end-to-end intertwining", tally, time.time() - t0, 300, extra)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("k", range(1, 12), ids=lambda k: f"criterion-{k}")
def test_criterion(k, request):
    assert CRITERIA[k - 1](request.config)


if __name__ == "__main__":
    results = [crit() for crit in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
