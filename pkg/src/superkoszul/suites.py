"""Named verification suites run by the CLI.  Each suite maps a validated context
(chart, P, volume, optional F, budgets, seed) to a list of Checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .brackets import (
    H_P,
    H_d,
    H_dP,
    H_schouten,
    PStructure,
    VolumeData,
    canonical_poisson,
    canonical_schouten,
    de_rham,
    higher_derived_bracket_P,
    higher_koszul,
    koszul_binary,
    poisson_bracket_of_bivector,
)
from .corpus import form_gens, monomials, random_form, random_function, random_operator, rng_for
from .hbarops import (
    HbarOp,
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
from .linfty import MorphismData, check_higher_jacobi, check_linfty_morphism, hamiltonian_family, pinfty_family, polarize
from .mx import (
    TO_TANGENT,
    DualPair,
    GaussianVolume,
    delta_P_star,
    modular_checks,
    pairing_adjoint_oracle,
    quantum_mx,
    symbol_mx_commutes,
)
from .report import Check
from .superalg import MINUS_I_HBAR, Scalar, SuperPoly, left_derivative, substitute
from .thick import (
    anchor_genfun,
    check_intertwining,
    check_phi_related,
    classical_anchor_pullback,
    dual_genfun,
    form_basis,
    linear_genfun,
    thick_pullback,
)

SUITES = ("pinfty", "koszul", "jacobi", "symbols", "quantum-brackets", "mx", "modular", "thick", "intertwine")


@dataclass
class Budgets:
    hbar_order: int = 4
    momentum_order: int = 4
    corpus_degree: int = 2
    corpus_size: int = 50

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class Context:
    chart: object
    P: SuperPoly
    vol: VolumeData
    F: SuperPoly | None = None
    seed: int = 0
    budgets: Budgets = field(default_factory=Budgets)

    @property
    def pstruct(self) -> PStructure:
        return PStructure(self.P)

    @property
    def even_base(self) -> bool:
        return not any(g.parity for g in self.chart.base)

    def rng(self, label):
        return rng_for(self.seed, label)

    def function_pairs(self, label, n=None):
        rng = self.rng(label)
        n = n or self.budgets.corpus_size
        out = []
        k = 0
        while len(out) < n and k < 20 * n:
            pf, pg = (0, 0) if self.even_base else (k % 2, (k // 2) % 2)
            f = random_function(self.chart, rng, self.budgets.corpus_degree, pf)
            g = random_function(self.chart, rng, self.budgets.corpus_degree, pg)
            k += 1
            if f and g:
                out.append((f, g))
        return out

    def form_tuples(self, label, n, length, parities=(0, 1)):
        rng = self.rng(label)
        out = []
        for k in range(n):
            tup = []
            for j in range(length):
                w = random_form(self.chart, rng, self.budgets.corpus_degree, parities[(k + j) % len(parities)], 2)
                if w:
                    tup.append(w)
            if len(tup) == length:
                out.append(tup)
        return out


def _record_zero(check: Check, residuals):
    for r in residuals:
        check.record(not r, r)
    return check


def _is_bivector(ctx):
    return ctx.pstruct.is_bivector()


# --- suites -------------------------------------------------------------------------


def suite_pinfty(ctx: Context):
    c1 = Check("pinfty.self-bracket")
    r = canonical_schouten(ctx.P, ctx.P)
    c1.record(not r, r)
    c2 = Check("pinfty.derived-poisson")
    if not _is_bivector(ctx):
        c2.skip("P is not a bivector")
    else:
        for f, g in ctx.function_pairs("pinfty"):
            r = higher_derived_bracket_P(ctx.P, [f, g]) - poisson_bracket_of_bivector(ctx.P, f, g)
            c2.record(not r, r)
    return [c1, c2]


def suite_koszul(ctx: Context):
    c1 = Check("koszul.table-vs-higher")
    c2 = Check("koszul.anchor-morphism")
    c3 = Check("koszul.anchor-chain-map")
    if not _is_bivector(ctx):
        for c in (c1, c2):
            c.skip("P is not a bivector")
    else:
        Pst = ctx.pstruct
        for a, b in ctx.form_tuples("koszul", ctx.budgets.corpus_size, 2):
            r = koszul_binary(Pst, a, b) - higher_koszul(ctx.P, [a, b])
            c1.record(not r, r)
            if Pst.is_pinfty:
                lhs = classical_anchor_pullback(ctx.P, koszul_binary(Pst, a, b))
                rhs = canonical_schouten(classical_anchor_pullback(ctx.P, a), classical_anchor_pullback(ctx.P, b))
                c2.record(not (lhs - rhs), lhs - rhs)
        if not Pst.is_pinfty:
            c2.skip("[[P,P]] != 0")
    if not ctx.pstruct.is_pinfty:
        c3.skip("[[P,P]] != 0")
    else:
        for (w,) in ctx.form_tuples("koszul-d", ctx.budgets.corpus_size, 1):
            r = canonical_schouten(ctx.P, classical_anchor_pullback(ctx.P, w)) - classical_anchor_pullback(ctx.P, de_rham(w))
            c3.record(not r, r)
    return [c1, c2, c3]


def _bracket_arity(ctx):
    xs = [ctx.chart.xs_of(g) for g in ctx.chart.base]
    return ctx.P.max_degree_in(xs) if ctx.P else 0


def suite_jacobi(ctx: Context):
    m = _bracket_arity(ctx)
    n_max = min(4, max(2, 2 * m - 1))
    size = max(10, ctx.budgets.corpus_size // 5)
    rng = ctx.rng("jacobi")
    fun_tuples = []
    for k in range(size):
        tup = [random_function(ctx.chart, rng, ctx.budgets.corpus_degree, (k + j) % 2 if not ctx.even_base else 0, 2)
               for j in range(n_max)]
        if all(tup):
            fun_tuples.append(tup)
    c1 = check_higher_jacobi(pinfty_family(ctx.P), fun_tuples, n_max, name="jacobi.poisson-family")
    forms = ctx.form_tuples("jacobi-forms", size, n_max)
    c2 = check_higher_jacobi(hamiltonian_family(H_P(ctx.P), max(m, 1)), forms, n_max, name="jacobi.koszul-family")
    return [c1, c2]


def _symbol_gens(ctx):
    return [g.name for g in ctx.chart.base] + [ctx.chart.dx_of(g).name for g in ctx.chart.base]


def suite_symbols(ctx: Context):
    rng = ctx.rng("symbols")
    gens = _symbol_gens(ctx)
    order = max(1, min(2, ctx.budgets.hbar_order // 2))
    c1, c2, c3 = Check("symbols.product"), Check("symbols.commutator"), Check("symbols.hleibniz")
    inv = Scalar.i() * Scalar.hbar(-1)
    for k in range(ctx.budgets.corpus_size):
        A = random_operator(ctx.chart, gens, rng, order, ctx.budgets.corpus_degree, k % 2)
        B = random_operator(ctx.chart, gens, rng, order, ctx.budgets.corpus_degree, (k // 2) % 2)
        sa, sb = principal_symbol(A), principal_symbol(B)
        r = principal_symbol(compose(A, B)) - sa * sb
        c1.record(not r, r)
        r = principal_symbol(commutator(A, B) * inv) - canonical_poisson(sa, sb)
        c2.record(not r, r)
    for k in range(max(10, ctx.budgets.corpus_size // 5)):
        L = random_operator(ctx.chart, gens, rng, 2, ctx.budgets.corpus_degree, k % 2)
        fs = [random_form(ctx.chart, rng, 2, (k + j) % 2, 2) for j in range(4)]
        if not all(fs):
            continue
        for n in range(0, 3):
            r = hleibniz_residual(L, fs[2:2 + n], fs[0], fs[1])
            c3.record(not r, r)
    return [c1, c2, c3]


def suite_quantum_brackets(ctx: Context):
    D = build_Delta_P(ctx.P)
    c1 = Check("delta-p.square")
    r = compose(D, D)
    c1.record(not r.terms, r)
    c2 = Check("delta-p.koszul-operator")
    if not _is_bivector(ctx):
        c2.skip("P is not a bivector")
    else:
        r = D - koszul_bv_operator(ctx.P).scale(Scalar({(2, 0): -1}))
        c2.record(not r.terms, r)
    c3 = Check("delta-p.classical-brackets")
    for k in (1, 2, 3):
        for tup in ctx.form_tuples(f"qb{k}", max(5, ctx.budgets.corpus_size // 10), k):
            r = classical_bracket(D, tup) - higher_koszul(ctx.P, tup)
            c3.record(not r, r)
    return [c1, c2, c3]


def expected_generator_images(chart, vol):
    """Generator images written out directly from the quantum MX rules on Pi TM."""
    out = []
    for g in chart.base:
        dx, xs = chart.dx_of(g), chart.xs_of(g)
        lam = left_derivative(vol.log_rho, g)
        out.append((HbarOp.mult(chart(g.name)), HbarOp.mult(chart(g.name))))
        out.append((HbarOp.deriv(chart, g), -(HbarOp.deriv(chart, g) + HbarOp.mult(lam))))
        sign = 1 if g.parity else -1  # (-1)^(a+1)
        out.append((HbarOp.mult(chart(dx.name)), HbarOp.deriv(chart, xs).scale(MINUS_I_HBAR * sign)))
        out.append((HbarOp.deriv(chart, dx).scale(MINUS_I_HBAR), HbarOp.mult(chart(xs.name))))
    return out


def suite_mx(ctx: Context):
    chart, vol = ctx.chart, ctx.vol
    pair = DualPair.forms_multivectors(chart)
    c1 = Check("mx.generator-images")
    for A, want in expected_generator_images(chart, vol):
        r = quantum_mx(A, pair, vol) - want
        c1.record(not r.terms, r)
    c2 = Check("mx.d-star")
    d = de_rham_op(chart).scale(MINUS_I_HBAR)
    r = quantum_mx(d, pair, vol) - divergence_op(chart, vol).scale(MINUS_I_HBAR * MINUS_I_HBAR)
    c2.record(not r.terms, r)
    c3 = Check("mx.delta-p-star")
    rule, closed = delta_P_star(ctx.pstruct, vol)
    r = rule - closed
    c3.record(not r.terms, r)
    c4, c5 = Check("mx.involution"), Check("mx.symbol")
    rng = ctx.rng("mx")
    ops = [random_operator(chart, _symbol_gens(ctx), rng, 2, ctx.budgets.corpus_degree, k % 2)
           for k in range(max(10, ctx.budgets.corpus_size // 5))]
    for A in ops:
        back = quantum_mx(quantum_mx(A, pair, vol), pair, vol, TO_TANGENT)
        c4.record(not (back - A).terms, back - A)
        r = symbol_mx_commutes(A, pair, vol)
        c5.record(not r, r)
    checks = [c1, c2, c3, c4, c5]
    c6 = Check("mx.pairing-oracle")
    if not ctx.even_base:
        c6.skip("the pairing oracle integrates over an even base only")
    else:
        gauss = GaussianVolume(chart, {g.name: 1 + k for k, g in enumerate(chart.base)},
                               {g.name: k - 1 for k, g in enumerate(chart.base)})
        fs = form_basis(chart, 2, [chart.one(), chart(chart.base[0].name)])
        gs = [substitute(f, {chart.dx_of(g): chart(chart.xs_of(g).name) for g in chart.base}) for f in fs]
        corpus = [(f, g) for f in fs[:6] for g in gs[:6]]
        for A in [de_rham_op(chart).scale(MINUS_I_HBAR), build_Delta_P(ctx.P)] + ops[:3]:
            sub = pairing_adjoint_oracle(A, pair, gauss, corpus)
            c6.cases += sub.cases
            c6.failures += sub.failures
            c6.witnesses += sub.witnesses[: max(0, c6.max_witnesses - len(c6.witnesses))]
        if c6.failures:
            c6.status = "fail"
    checks.append(c6)
    return checks


def suite_modular(ctx: Context):
    Pst = ctx.pstruct
    if not Pst.is_pinfty:
        return [Check("modular.closed").skip("[[P,P]] != 0"), Check("modular.gauge-law").skip("[[P,P]] != 0")]
    rng = ctx.rng("modular")
    fns = [random_function(ctx.chart, rng, ctx.budgets.corpus_degree, 0) for _ in range(max(10, ctx.budgets.corpus_size // 5))]
    closed, gauge = modular_checks(Pst, ctx.vol, [f for f in fns if f])
    closed.name, gauge.name = "modular.closed", "modular.gauge-law"
    return [closed, gauge]


def suite_thick(ctx: Context):
    chart = ctx.chart
    m = ctx.budgets.momentum_order
    c1 = Check("thick.linear-composition")
    rng = ctx.rng("thick")
    for k in range(max(10, ctx.budgets.corpus_size // 5)):
        phi = {g.name: chart(g.name) + random_function(chart, rng, 2, g.parity, 2) for g in chart.base}
        w = random_function(chart, rng, ctx.budgets.corpus_degree, k % 2 if not ctx.even_base else 0)
        r = thick_pullback(linear_genfun(chart, phi), w, m) - substitute(w, {chart[g]: v for g, v in phi.items()})
        c1.record(not r, r)
    c2 = check_phi_related(H_dP(ctx.P), H_d(chart), anchor_genfun(ctx.P), name="thick.anchor-related")
    c3 = check_phi_related(H_schouten(chart), H_P(ctx.P), dual_genfun(ctx.P), truncation=m, name="thick.dual-related")
    c4 = Check("thick.anchor-pullback")
    S = anchor_genfun(ctx.P)
    for (w,) in ctx.form_tuples("thick-anchor", max(10, ctx.budgets.corpus_size // 5), 1):
        r = thick_pullback(S, w, m) - classical_anchor_pullback(ctx.P, w)
        c4.record(not r, r)
    c5 = Check("thick.linfty-morphism")
    comps = ctx.pstruct.components()
    if not ctx.pstruct.is_pinfty:
        c5.skip("[[P,P]] != 0")
    elif comps.get(0) or comps.get(1):
        c5.skip("P has components of degree 0 or 1 (curved or unary brackets)")
    else:
        Sd = dual_genfun(ctx.P)
        src = hamiltonian_family(H_P(ctx.P), 3)
        tgt = hamiltonian_family(H_schouten(chart), 3)
        for fam in (src, tgt):
            fam.brackets.pop(0)
        md = MorphismData({k: polarize(lambda g: thick_pullback(Sd, g, m), k) for k in (1, 2, 3)}, src, tgt)
        corpus = morphism_corpus(ctx, max(6, ctx.budgets.corpus_size // 5))
        c5 = check_linfty_morphism(md, corpus, 3, name="thick.linfty-morphism")
    return [c1, c2, c3, c4, c5]


def morphism_corpus(ctx: Context, size: int):
    """Triples of even form monomials (degree <= 2): two with a dx factor and one
    base function, so that the Schouten terms of the n = 3 relation are nonzero."""
    chart = ctx.chart
    dx = {chart.dx_of(g) for g in chart.base}
    mons = [m for m in monomials(chart, form_gens(chart), 2, 1) if m.parity == 0]
    fiber = [m for m in mons if m.generators_used() & dx]
    base = [m for m in mons if not m.generators_used() & dx]
    triples = [[a, b, f] for a in fiber for b in fiber for f in base]
    rng = ctx.rng("morphism")
    return rng.sample(triples, min(size, len(triples)))


def suite_intertwine(ctx: Context):
    if not ctx.even_base:
        return [Check("intertwine.quantum").skip("kernel operators need a purely even base")]
    return [check_intertwining(ctx.pstruct, ctx.vol, ctx.F, name="intertwine.quantum")]


RUNNERS = {
    "pinfty": suite_pinfty,
    "koszul": suite_koszul,
    "jacobi": suite_jacobi,
    "symbols": suite_symbols,
    "quantum-brackets": suite_quantum_brackets,
    "mx": suite_mx,
    "modular": suite_modular,
    "thick": suite_thick,
    "intertwine": suite_intertwine,
}


def run_checks(ctx: Context, suite: str) -> list[Check]:
    if suite == "all":
        return list(itertools.chain.from_iterable(RUNNERS[s](ctx) for s in SUITES))
    if suite not in RUNNERS:
        raise KeyError(f"unknown suite {suite!r}")
    return RUNNERS[suite](ctx)
