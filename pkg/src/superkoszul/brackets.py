"""Canonical Poisson and Schouten brackets, derived brackets, Koszul brackets,
the Lichnerowicz differential and the divergence of multivector fields."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

from .report import Check
from .superalg import (
    ChartMismatch,
    EVEN,
    ODD,
    ParityError,
    SuperPoly,
    left_derivative,
    restrict_zero,
)


def _split(F: SuperPoly):
    return F.homogeneous_parts().items()


def canonical_poisson(H: SuperPoly, G: SuperPoly, pairs=None) -> SuperPoly:
    """Canonical even Poisson bracket on a cotangent chart.

    ``{H,G} = (-1)^{a(H+1)} dH/dp_a dG/dx^a - (-1)^{aH} dH/dx^a dG/dp_a``,
    summed over every coordinate/momentum pairing of the chart (or over
    ``pairs`` when given as (coordinate, momentum) generators).
    """
    chart = H.chart
    if G.chart is not chart:
        raise ChartMismatch("operands live on different charts")
    if pairs is None:
        if not chart.momentum:
            raise ValueError("chart has no momentum pairing")
        pairs = [(chart.generators[q], chart.generators[p]) for q, p in chart.momentum.items()]
    out = chart.zero()
    if not G:
        return out
    for h, Hh in _split(H):
        for q, p in pairs:
            a = q.parity
            dHp = left_derivative(Hh, p)
            if dHp:
                dGq = left_derivative(G, q)
                if dGq:
                    t = dHp * dGq
                    out = out + (-t if (a * (h + 1)) % 2 else t)
            dHq = left_derivative(Hh, q)
            if dHq:
                dGp = left_derivative(G, p)
                if dGp:
                    t = dHq * dGp
                    out = out - (-t if (a * h) % 2 else t)
    return out


def _antifiber_pairs(chart):
    if not chart.antifiber:
        raise ValueError("chart has no antifiber pairing")
    return [(chart.generators[a], chart.generators[s]) for a, s in chart.antifiber.items()]


def canonical_schouten(F: SuperPoly, G: SuperPoly) -> SuperPoly:
    """Schouten bracket of multivector fields, symmetric version.

    ``[[F,G]] = (-1)^{a(F+1)} (dF/dx*_a dG/dx^a + (-1)^F dF/dx^a dG/dx*_a)``.
    """
    chart = F.chart
    if G.chart is not chart:
        raise ChartMismatch("operands live on different charts")
    pairs = _antifiber_pairs(chart)
    out = chart.zero()
    if not G:
        return out
    for f, Ff in _split(F):
        for x, xs in pairs:
            a = x.parity
            acc = chart.zero()
            dFs = left_derivative(Ff, xs)
            if dFs:
                acc = acc + dFs * left_derivative(G, x)
            dFx = left_derivative(Ff, x)
            if dFx:
                t = dFx * left_derivative(G, xs)
                acc = acc + (-t if f else t)
            out = out + (-acc if (a * (f + 1)) % 2 else acc)
    return out


# --- structures ------------------------------------------------------------------


@dataclass
class VolumeData:
    """Volume element rho on the base, stored as ``log_rho``."""

    log_rho: SuperPoly

    def __post_init__(self):
        chart = self.log_rho.chart
        if not self.log_rho.depends_only_on(chart.base):
            raise ValueError("log_rho must depend on base coordinates only")
        if self.log_rho.parity_or_none() != EVEN:
            raise ParityError("log_rho must be even")

    @classmethod
    def trivial(cls, chart):
        return cls(chart.zero())

    @property
    def chart(self):
        return self.log_rho.chart

    def gauge(self, f: SuperPoly) -> "VolumeData":
        """Volume element ``e^f rho``."""
        return VolumeData(self.log_rho + f)


@dataclass
class PStructure:
    """Even multivector P on (x, x*); a P-infinity structure when [[P,P]] = 0."""

    P: SuperPoly
    self_bracket: SuperPoly = field(init=False)

    def __post_init__(self):
        chart = self.P.chart
        if self.P.parity_or_none() != EVEN:
            raise ParityError("P must be even")
        allowed = list(chart.base) + [chart.xs_of(g) for g in chart.base]
        if not self.P.depends_only_on(allowed):
            raise ValueError("P must be a function of x and x* only")
        self.self_bracket = canonical_schouten(self.P, self.P)

    @property
    def chart(self):
        return self.P.chart

    @property
    def is_pinfty(self) -> bool:
        return not self.self_bracket

    def components(self) -> dict[int, SuperPoly]:
        """Split by degree in x* (P_0, P^a x*_a, ...)."""
        chart = self.chart
        return self.P.degree_in([chart.xs_of(g) for g in chart.base])

    def is_bivector(self) -> bool:
        return set(self.components()) <= {2}

    @property
    def curved(self) -> bool:
        return 0 in self.components()


@dataclass
class OddHamiltonian:
    H: SuperPoly
    self_bracket: SuperPoly = field(init=False)

    def __post_init__(self):
        if self.H.parity_or_none() != ODD and self.H:
            raise ParityError("H must be odd")
        self.self_bracket = canonical_poisson(self.H, self.H)

    @property
    def is_sinfty(self) -> bool:
        return not self.self_bracket


# --- derived brackets -----------------------------------------------------------


def _base_only(chart, args):
    for f in args:
        if not f.depends_only_on(chart.base):
            raise ValueError("argument contains fiber variables")


def derived_sign(k: int) -> int:
    """Sign ``(-1)^(k-1)`` attached to the k-ary bracket derived from P.

    With it the binary bracket of a bivector is the usual Poisson bracket
    (see :func:`poisson_bracket_of_bivector`); rescaling every k-ary bracket by
    ``(-1)^(k-1)`` preserves the higher Jacobi identities.
    """
    return 1 if k % 2 else -1


def higher_derived_bracket_P(P: PStructure | SuperPoly, args) -> SuperPoly:
    """``(-1)^(k-1) [[...[[P,f1]],...,fk]]`` restricted to x* = 0."""
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    _base_only(chart, args)
    v = reduce(canonical_schouten, args, Pv)
    v = restrict_zero(v, [chart.xs_of(g) for g in chart.base])
    return v if derived_sign(len(args)) > 0 else -v


def bivector_coefficient(P: SuperPoly, a, b) -> SuperPoly:
    """``P^{ab}`` for ``P = 1/2 P^{ab} x*_b x*_a``."""
    chart = P.chart
    a, b = chart[a], chart[b]
    v = left_derivative(left_derivative(P, chart.xs_of(a)), chart.xs_of(b))
    return -v if (a.parity * b.parity) % 2 == 0 else v


def poisson_bracket_of_bivector(P: SuperPoly, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """``{f,g} = -(-1)^{a(f+1)} P^{ab} df/dx^b dg/dx^a`` evaluated directly."""
    chart = P.chart
    out = chart.zero()
    for fp, fh in f.homogeneous_parts().items():
        for a in chart.base:
            dg = left_derivative(g, a)
            if not dg:
                continue
            for b in chart.base:
                df = left_derivative(fh, b)
                if not df:
                    continue
                t = bivector_coefficient(P, a, b) * df * dg
                out = out + (t if (a.parity * (fp + 1)) % 2 else -t)
    return out


def momenta(chart):
    return [g for g in chart.generators if g.role.endswith("momentum")]


def higher_derived_bracket_H(H: OddHamiltonian | SuperPoly, args, restrict=None) -> SuperPoly:
    """``{f1..fk}_H = {...{H,f1},...,fk} restricted to zero momenta``."""
    Hv = H.H if isinstance(H, OddHamiltonian) else H
    chart = Hv.chart
    v = reduce(canonical_poisson, args, Hv)
    return restrict_zero(v, momenta(chart) if restrict is None else restrict)


def H_d(chart) -> SuperPoly:
    """Hamiltonian lift ``dx^a p_a`` of the de Rham differential."""
    return sum((chart(chart.dx_of(g).name) * chart(chart.momentum_of(g).name) for g in chart.base),
               chart.zero())


def H_schouten(chart) -> SuperPoly:
    """``(-1)^a pi^a p_a`` on T*(Pi T*M), with ``pi^a`` conjugate to ``x*_a``.

    With this sign ``{{H,F},G}`` restricted to zero momenta is the Schouten
    bracket ``[[F,G]]``.
    """
    out = chart.zero()
    for g in chart.base:
        t = chart(chart.momentum_of(chart.xs_of(g)).name) * chart(chart.momentum_of(g).name)
        out = out + (-t if g.parity else t)
    return out


def P_on_pi(P: PStructure | SuperPoly) -> SuperPoly:
    """``P(x, pi)``: replace x*_a by the momentum pi_a conjugate to dx^a."""
    from .superalg import substitute

    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    return substitute(Pv, {chart.xs_of(g): chart(chart.momentum_of(chart.dx_of(g)).name) for g in chart.base})


def H_P(P: PStructure | SuperPoly) -> SuperPoly:
    """Odd Hamiltonian ``-{H_d, P(x,pi)}`` of the higher Koszul brackets."""
    Pv = P.P if isinstance(P, PStructure) else P
    return -canonical_poisson(H_d(Pv.chart), P_on_pi(Pv))


def H_dP(P: PStructure | SuperPoly) -> SuperPoly:
    """Hamiltonian lift ``{H_Sch, P}`` of the Lichnerowicz differential."""
    Pv = P.P if isinstance(P, PStructure) else P
    return canonical_poisson(H_schouten(Pv.chart), Pv)


def higher_koszul(P: PStructure | SuperPoly, args) -> SuperPoly:
    """Higher Koszul bracket of forms, derived from ``H_P``."""
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    allowed = list(chart.base) + [chart.dx_of(g) for g in chart.base]
    for a in args:
        if not a.depends_only_on(allowed):
            raise ValueError("higher Koszul brackets take differential forms")
    return higher_derived_bracket_H(H_P(Pv), args)


def bracket_from_table(table, alpha: SuperPoly, beta: SuperPoly) -> SuperPoly:
    """Odd symmetric bracket fixed by its values on generators and the Leibniz rule.

    ``[alpha,beta] = sum (-1)^{alpha v} [v,u] d alpha/du d beta/dv`` with left
    derivatives; ``table`` maps generator pairs (v, u) to ``[v,u]`` and omits
    zero entries.
    """
    chart = alpha.chart
    out = chart.zero()
    for ap, ah in alpha.homogeneous_parts().items():
        for (v, u), val in table.items():
            da = left_derivative(ah, u)
            if not da:
                continue
            db = left_derivative(beta, v)
            if db:
                t = val * da * db
                out = out + (-t if (ap * v.parity) % 2 else t)
    return out


def de_rham(f: SuperPoly) -> SuperPoly:
    chart = f.chart
    return sum((chart(chart.dx_of(g).name) * left_derivative(f, g) for g in chart.base), chart.zero())


def koszul_table(P: PStructure | SuperPoly) -> dict:
    """Koszul bracket of a bivector on the generators x^a, dx^a.

    ``[x,x] = 0``, ``[f,dg] = (-1)^f {f,g}``, ``[df,dg] = -(-1)^f d{f,g}``; the
    remaining entries follow from the symmetry ``[a,b] = (-1)^{ab} [b,a]``.
    """
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    table = {}
    for a in chart.base:
        for b in chart.base:
            pb = higher_derived_bracket_P(Pv, [chart(a.name), chart(b.name)])
            if not pb:
                continue
            da, db = chart.dx_of(a), chart.dx_of(b)
            v = pb if a.parity == 0 else -pb
            table[(a, db)] = v
            table[(db, a)] = v if ((b.parity + 1) * a.parity) % 2 == 0 else -v
            w = de_rham(pb)
            table[(da, db)] = -w if a.parity == 0 else w
    return table


def koszul_binary(P: PStructure, alpha: SuperPoly, beta: SuperPoly) -> SuperPoly:
    """Classical Koszul bracket of forms for a bivector P (generator table plus Leibniz)."""
    if not isinstance(P, PStructure):
        P = PStructure(P)
    if not P.is_bivector():
        raise ValueError("P must be a bivector")
    chart = P.chart
    allowed = list(chart.base) + [chart.dx_of(g) for g in chart.base]
    for a in (alpha, beta):
        if not a.depends_only_on(allowed):
            raise ValueError("the Koszul bracket takes differential forms")
    return bracket_from_table(koszul_table(P), alpha, beta)


def lichnerowicz(P: PStructure | SuperPoly, F: SuperPoly) -> SuperPoly:
    Pv = P.P if isinstance(P, PStructure) else P
    return canonical_schouten(Pv, F)


def divergence(T: SuperPoly, vol: VolumeData | None = None) -> SuperPoly:
    """``delta_rho T = sum_a (-1)^a (d/dx^a + d(log rho)/dx^a) dT/dx*_a``."""
    chart = T.chart
    lam = vol.log_rho if vol is not None else chart.zero()
    out = chart.zero()
    for g in chart.base:
        dT = left_derivative(T, chart.xs_of(g))
        if not dT:
            continue
        t = left_derivative(dT, g) + left_derivative(lam, g) * dT
        out = out + (-t if g.parity else t)
    return out


def vector_field_hamiltonian(X: dict, chart) -> SuperPoly:
    """``H_X = X^a p_a`` for a vector field given as {coordinate: coefficient}."""
    return sum((X[g] * chart(chart.momentum_of(g).name) for g in X), chart.zero())


def vector_field_multivector(X: dict, parity: int, chart) -> SuperPoly:
    """``P_X = (-1)^X X^a x*_a``."""
    P = sum((X[g] * chart(chart.xs_of(g).name) for g in X), chart.zero())
    return -P if parity else P


def apply_vector_field(X: dict, f: SuperPoly) -> SuperPoly:
    return sum((X[g] * left_derivative(f, g) for g in X), f.chart.zero())


def check_bv_generates(delta, bracket, corpus, name="bv-generation") -> Check:
    """``Delta(ab) = Delta(a)b + (-1)^a a Delta(b) + [a,b]`` on homogeneous pairs."""
    check = Check(name)
    for a, b in corpus:
        for pa, ah in a.homogeneous_parts().items():
            lhs = delta(ah * b)
            rhs = delta(ah) * b + (-1) ** pa * (ah * delta(b)) + bracket(ah, b)
            r = lhs - rhs
            check.record(not r, r)
    return check
