"""Classical and quantum Mackenzie-Xu transformations, the pairing oracle and the
modular cocycle of a P-infinity structure."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

import sympy

from .brackets import (
    PStructure,
    VolumeData,
    canonical_schouten,
    divergence,
)
from .hbarops import HbarOp, build_D_dP, build_Delta_P, compose
from .report import Check
from .superalg import (
    MINUS_I_HBAR,
    ChartMismatch,
    ParityError,
    Scalar,
    SuperPoly,
    berezin_integral,
    exp_nilpotent,
    left_derivative,
    substitute,
)

TO_TANGENT = "cotangent-to-tangent"
TO_COTANGENT = "tangent-to-cotangent"

I_OVER_HBAR = Scalar({(-1, 1): Fraction(1)})


# --- classical ---------------------------------------------------------------------


def _role_gens(chart, role):
    return [g for g in chart.generators if g.role == role]


def classical_mx(expr: SuperPoly, direction: str = TO_TANGENT) -> SuperPoly:
    """Coordinate change between T*(Pi T*M) and T*(Pi TM).

    ``TO_TANGENT``: x -> x, x* -> pi, p -> -p, pi^a -> (-1)^{a+1} dx^a.
    ``TO_COTANGENT`` is the inverse map.
    """
    chart = expr.chart
    table = {}
    forbidden = []
    for g in chart.base:
        dx, xs = chart.dx_of(g), chart.xs_of(g)
        p = chart.momentum_of(g)
        pi_t, pi_c = chart.momentum_of(dx), chart.momentum_of(xs)
        sgn = 1 if g.parity else -1  # (-1)^{a+1}
        table[p] = -chart(p.name)
        if direction == TO_TANGENT:
            table[xs] = chart(pi_t.name)
            table[pi_c] = chart(dx.name) * sgn
            forbidden += [dx, pi_t]
        elif direction == TO_COTANGENT:
            table[pi_t] = chart(xs.name)
            table[dx] = chart(pi_c.name) * sgn
            forbidden += [xs, pi_c]
        else:
            raise ValueError(f"unknown direction {direction!r}")
    used = expr.generators_used()
    bad = [g.name for g in forbidden if g in used]
    if bad:
        raise ChartMismatch(f"expression uses {bad}, which do not belong to the source side")
    return substitute(expr, table)


# --- dual pairs and quantum MX --------------------------------------------------------


@dataclass
class DualPair:
    """Odd fiber coordinates u^a of E and w_a of E*, paired by ``u^a w_a``."""

    chart: object
    u: list
    w: list

    def __post_init__(self):
        self.u = [self.chart[g] for g in self.u]
        self.w = [self.chart[g] for g in self.w]
        if len(self.u) != len(self.w):
            raise ValueError("pairing must be a bijection")
        for a, b in zip(self.u, self.w):
            if a.parity != b.parity:
                raise ParityError(f"{a.name} and {b.name} must have equal parity")
        self._u = {g.order_index: k for k, g in enumerate(self.u)}
        self._w = {g.order_index: k for k, g in enumerate(self.w)}

    @classmethod
    def forms_multivectors(cls, chart):
        """E = Pi TM (fibers dx) and E* = Pi T*M (fibers x*)."""
        return cls(chart, [chart.dx_of(g) for g in chart.base], [chart.xs_of(g) for g in chart.base])

    def pairing(self) -> SuperPoly:
        """``sum_a u^a w_a``."""
        c = self.chart
        return sum((c(a.name) * c(b.name) for a, b in zip(self.u, self.w)), c.zero())

    def swapped(self) -> "DualPair":
        return DualPair(self.chart, self.w, self.u)


def _gen_image(pair: DualPair, vol: VolumeData, gi: int, is_derivative: bool, direction: str) -> HbarOp:
    chart = pair.chart
    g = chart.generators[gi]
    src, dst = (pair._u, pair.w) if direction == TO_COTANGENT else (pair._w, pair.u)
    if g.role == "base":
        if not is_derivative:
            return HbarOp.mult(chart(g.name))
        lam = left_derivative(vol.log_rho, g) if vol is not None else chart.zero()
        return -(HbarOp.deriv(chart, g) + HbarOp.mult(lam))
    if gi not in src:
        raise ChartMismatch(f"{g.name} is not a fiber coordinate of the source bundle")
    k = src[gi]
    partner = dst[k]
    sgn = -1 if g.parity else 1  # (-1)^u, u the parity of the fiber
    if direction == TO_COTANGENT:
        if not is_derivative:  # u -> -i hbar (-1)^u d/dw
            return HbarOp.deriv(chart, partner).scale(MINUS_I_HBAR * sgn)
        return HbarOp.mult(chart(partner.name)).scale(I_OVER_HBAR)  # d/du -> (i/hbar) w
    if not is_derivative:  # w -> -i hbar d/du
        return HbarOp.deriv(chart, partner).scale(MINUS_I_HBAR)
    return HbarOp.mult(chart(partner.name)).scale(I_OVER_HBAR * sgn)  # d/dw -> (i/hbar)(-1)^u u


def quantum_mx(A: HbarOp, pair: DualPair | None = None, vol: VolumeData | None = None,
               direction: str = TO_COTANGENT) -> HbarOp:
    """Adjoint of ``A`` relative to the oscillatory pairing, by generator rules.

    Each term ``c * X1...Xm`` (coefficient monomial followed by derivatives) maps to
    ``(-1)^{sum_{i<j} Xi Xj} Xm* ... X1*``.
    """
    chart = A.chart
    pair = pair or DualPair.forms_multivectors(chart)
    if vol is None:
        vol = VolumeData.trivial(chart)
    cache: dict = {}

    def image(gi, is_d):
        key = (gi, is_d)
        if key not in cache:
            cache[key] = _gen_image(pair, vol, gi, is_d, direction)
        return cache[key]

    odd = chart.odd
    out = HbarOp.zero(chart)
    word_cache: dict = {}
    for alpha, c in A.terms.items():
        for (m, h, ph), v in c.terms.items():
            word = [(i, False) for i, e in m for _ in range(e)] + [(i, True) for i, e in alpha for _ in range(e)]
            key = tuple(word)
            if key not in word_cache:
                sign = 1
                pars = [odd[i] for i, _ in word]
                acc = 0
                for p in pars:
                    if p and acc % 2:
                        sign = -sign
                    acc += p
                op = HbarOp.identity(chart)
                for i, d in reversed(word):
                    op = compose(op, image(i, d))
                word_cache[key] = op if sign > 0 else -op
            out = out + word_cache[key].scale(Scalar({(h, ph): v}))
    return out


def symbol_mx_commutes(A: HbarOp, pair=None, vol=None) -> SuperPoly:
    """``symb(A*) - classical_mx(symb A)`` (zero when the two agree)."""
    from .hbarops import principal_symbol

    return principal_symbol(quantum_mx(A, pair, vol)) - classical_mx(principal_symbol(A), TO_COTANGENT)


# --- pairing oracle -------------------------------------------------------------------


@dataclass
class GaussianVolume:
    """``log rho = sum_a (-x_a^2/(2 s_a) + b_a x_a)`` on an even base.

    Polynomial integrands then have finite moments, which makes the pairing a
    genuine number and integration by parts a valid reduction.
    """

    chart: object
    s: dict
    b: dict

    @property
    def volume(self) -> VolumeData:
        c = self.chart
        lam = c.zero()
        for g in c.base:
            x = c(g.name)
            lam = lam - x * x * Fraction(1, 2) / Fraction(self.s[g.name]) + x * Fraction(self.b[g.name])
        return VolumeData(lam)

    def moment(self, f: SuperPoly) -> Scalar:
        """``int rho f Dx / int rho Dx`` for f polynomial in the base coordinates."""
        chart = self.chart
        if not f.depends_only_on(chart.base):
            raise ValueError("base integrand contains fiber variables")
        memo: dict = {}
        base_idx = [g.order_index for g in chart.base]

        def mom(exps):
            if exps in memo:
                return memo[exps]
            for k, e in enumerate(exps):
                if e:
                    name = chart.generators[base_idx[k]].name
                    s, b = Fraction(self.s[name]), Fraction(self.b[name])
                    lower = list(exps)
                    lower[k] -= 1
                    val = s * b * mom(tuple(lower))
                    if e >= 2:
                        lower2 = list(lower)
                        lower2[k] -= 1
                        val += s * (e - 1) * mom(tuple(lower2))
                    memo[exps] = val
                    return val
            return Fraction(1)

        total: dict = {}
        for (m, h, ph), v in f.terms.items():
            d = dict(m)
            exps = tuple(d.get(i, 0) for i in base_idx)
            total[(h, ph)] = total.get((h, ph), 0) + v * mom(exps)
        return Scalar(total)


def pairing(f: SuperPoly, g: SuperPoly, pair: DualPair, gauss: GaussianVolume) -> Scalar:
    """``<f,g>_rho`` normalised by ``int rho Dx``."""
    chart = f.chart
    if any(x.parity for x in chart.base):
        raise ParityError("the pairing oracle needs a purely even base")
    kern = exp_nilpotent(-pair.pairing() * I_OVER_HBAR)
    fiber = berezin_integral(kern * f * g, list(pair.u) + list(pair.w))
    return gauss.moment(fiber)


def pairing_adjoint_oracle(A: HbarOp, pair: DualPair, gauss: GaussianVolume, corpus,
                           A_star: HbarOp | None = None, name="mx-pairing-oracle") -> Check:
    """Check ``<A f, g> = (-1)^{A f} <f, A* g>`` on (f, g) pairs."""
    check = Check(name)
    vol = gauss.volume
    if A_star is None:
        A_star = quantum_mx(A, pair, vol)
    for f, g in corpus:
        for pf, fh in f.homogeneous_parts().items():
            for pa, Ah in A.homogeneous_parts().items():
                As = _part_of_parity(A_star, pa)
                lhs = pairing(Ah(fh), g, pair, gauss)
                rhs = pairing(fh, As(g), pair, gauss)
                if pa * pf % 2:
                    rhs = -rhs
                r = lhs - rhs
                check.record(not r, f"<A f,g> - (-1)^(Af)<f,A* g> = {r}")
    return check


def _part_of_parity(L: HbarOp, p: int) -> HbarOp:
    return L.homogeneous_parts().get(p, HbarOp.zero(L.chart))


# --- Delta_P, modular class -------------------------------------------------------


def delta_P_star(P: PStructure, vol: VolumeData | None = None) -> tuple[HbarOp, HbarOp]:
    """``(Delta_P)*`` by the generator rules, and the closed form ``-i hbar d_P - i hbar delta(P)``."""
    chart = P.chart
    vol = vol or VolumeData.trivial(chart)
    rule = quantum_mx(build_Delta_P(P), DualPair.forms_multivectors(chart), vol)
    closed = build_D_dP(P, divergence(P.P, vol), check=False)
    return rule, closed


def modular_cocycle(P: PStructure, vol: VolumeData) -> SuperPoly:
    if not P.is_pinfty:
        raise ValueError("modular cocycle needs [[P,P]] = 0")
    return divergence(P.P, vol)


def modular_checks(P: PStructure, vol: VolumeData, gauge_fns) -> list[Check]:
    """d_P-closedness of delta(P) and the gauge law ``delta_{e^f rho}(P) - delta_rho(P) = d_P(f)``."""
    mu = modular_cocycle(P, vol)
    closed = Check("modular-closed")
    r = canonical_schouten(P.P, mu)
    closed.record(not r, r)
    gauge = Check("modular-gauge-law")
    for f in gauge_fns:
        lhs = divergence(P.P, vol.gauge(f)) - mu
        rhs = canonical_schouten(P.P, f)
        r = lhs - rhs
        gauge.record(not r, r)
    return [closed, gauge]


def even_monomial_basis(chart, degree_bound: int, nilpotent: bool = True):
    """Even monomials in x and x* of total degree <= bound (with an x* factor if ``nilpotent``)."""
    gens = list(chart.base) + [chart.xs_of(g) for g in chart.base]
    xs_idx = {chart.xs_of(g).order_index for g in chart.base}
    out = []
    for k in range(degree_bound + 1):
        for combo in combinations_with_replacement(gens, k):
            m = chart.one()
            for g in combo:
                m = m * chart(g.name)
            if not m or m.parity_or_none() != 0:
                continue
            (mono, _, _), = m.terms
            if nilpotent and not any(i in xs_idx for i, _ in mono):
                continue
            out.append(SuperPoly(chart, {(mono, 0, 0): Fraction(1)}))
    return out


def solve_linear(target: SuperPoly, images: list[SuperPoly]):
    """Rational coefficients ``c`` with ``sum c_k images_k = target``, or None."""
    keys = sorted({k for im in images for k in im.terms} | set(target.terms), key=repr)
    index = {k: r for r, k in enumerate(keys)}
    M = sympy.zeros(len(keys), len(images))
    for j, im in enumerate(images):
        for k, v in im.terms.items():
            M[index[k], j] = sympy.Rational(v.numerator, v.denominator)
    b = sympy.zeros(len(keys), 1)
    for k, v in target.terms.items():
        b[index[k], 0] = sympy.Rational(v.numerator, v.denominator)
    try:
        sol, params = M.gauss_jordan_solve(b)
    except ValueError:
        return None
    sol = sol.subs({p: 0 for p in params})
    return [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in sol]


def solve_modular_potential(P: PStructure, vol: VolumeData, degree_bound: int = 3, nilpotent: bool = True):
    """An even F with ``delta_rho(P) = d_P(F)`` among monomials up to ``degree_bound``, or None.

    None is a certificate that no such F exists in the searched span.
    """
    if not P.is_pinfty:
        raise ValueError("needs [[P,P]] = 0")
    mu = divergence(P.P, vol)
    chart = P.chart
    if not mu:
        return chart.zero()
    basis = even_monomial_basis(chart, degree_bound, nilpotent)
    images = [canonical_schouten(P.P, b) for b in basis]
    coeffs = solve_linear(mu, images)
    if coeffs is None:
        return None
    F = sum((b * c for b, c in zip(basis, coeffs) if c), chart.zero())
    assert canonical_schouten(P.P, F) == mu
    return F
