"""Formal hbar-differential operators in normal form.

An :class:`HbarOp` is a finite sum ``sum_alpha c_alpha * D^alpha`` where ``D^alpha``
is a product of plain left derivatives ``D_{g1}^{e1} D_{g2}^{e2} ...`` (the factor
on the right acts first) and every coefficient sits to the left.  Powers of hbar live
in the coefficients, so the momentum operator ``p^_a = -i hbar D_a`` is the term
``{(a,): -i*hbar}``.  In this form the total degree of a term is the hbar exponent of
its coefficient, and a term is hbar-differential when that exponent is at least the
number of derivatives.
"""
from __future__ import annotations

from .brackets import PStructure, VolumeData, canonical_schouten
from .superalg import (
    ChartMismatch,
    MINUS_I_HBAR,
    ParityError,
    Scalar,
    SuperPoly,
    _mono_derivative,
    left_derivative,
    to_text,
)


class DivisibilityError(ArithmeticError):
    """A commutator was not divisible by the expected power of hbar."""


class HbarOp:
    __slots__ = ("chart", "terms")

    def __init__(self, chart, terms=None):
        self.chart = chart
        self.terms = {a: c for a, c in (terms or {}).items() if c}

    # --- constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, chart):
        return cls(chart)

    @classmethod
    def identity(cls, chart):
        return cls(chart, {(): chart.one()})

    @classmethod
    def mult(cls, f: SuperPoly):
        """Multiplication by ``f``."""
        return cls(f.chart, {(): f})

    @classmethod
    def deriv(cls, chart, g):
        """Plain left derivative ``d/dg``."""
        i = chart.index(g)
        return cls(chart, {((i, 1),): chart.one()})

    @classmethod
    def momentum(cls, chart, g):
        """``p^_g = -i hbar d/dg``."""
        i = chart.index(g)
        return cls(chart, {((i, 1),): chart.const(MINUS_I_HBAR)})

    # --- linear structure ------------------------------------------------------
    def _check(self, other):
        if other.chart is not self.chart:
            raise ChartMismatch("operators live on different charts")

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for a, c in other.terms.items():
            v = t.get(a)
            t[a] = c if v is None else v + c
        return HbarOp(self.chart, t)

    def __neg__(self):
        return HbarOp(self.chart, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        """Multiply every coefficient by an even scalar."""
        return HbarOp(self.chart, {a: c * s for a, c in self.terms.items()})

    def __mul__(self, s):
        if isinstance(s, HbarOp):
            return compose(self, s)
        return self.scale(s)

    def __rmul__(self, s):
        return self.scale(s)

    def __matmul__(self, other):
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, HbarOp):
            return NotImplemented
        return self.chart is other.chart and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # --- inspection --------------------------------------------------------------
    def homogeneous_parts(self) -> dict[int, "HbarOp"]:
        parts: dict[int, dict] = {}
        mp = self.chart.mono_parity
        for a, c in self.terms.items():
            for p, ch in c.homogeneous_parts().items():
                q = (p + mp(a)) % 2
                d = parts.setdefault(q, {})
                d[a] = d[a] + ch if a in d else ch
        return {q: HbarOp(self.chart, t) for q, t in parts.items()}

    def parity_or_none(self):
        ps = list(self.homogeneous_parts())
        if len(ps) > 1:
            return None
        return ps[0] if ps else 0

    @property
    def parity(self) -> int:
        p = self.parity_or_none()
        if p is None:
            raise ParityError("inhomogeneous operator has no parity")
        return p

    def order(self) -> int:
        return max((sum(e for _, e in a) for a in self.terms), default=0)

    def degree_components(self) -> dict[int, "HbarOp"]:
        """Split by total degree (the hbar exponent of each coefficient term)."""
        out: dict[int, dict] = {}
        for a, c in self.terms.items():
            for (m, h, ph), v in c.terms.items():
                d = out.setdefault(h, {})
                piece = SuperPoly(self.chart, {(m, h, ph): v})
                d[a] = d[a] + piece if a in d else piece
        return {h: HbarOp(self.chart, t) for h, t in sorted(out.items())}

    def is_hbar_differential(self) -> bool:
        for a, c in self.terms.items():
            k = sum(e for _, e in a)
            if any(h < k for (_, h, _) in c.terms):
                return False
        return True

    def truncate(self, degree: int) -> "HbarOp":
        """Drop components of total degree above ``degree``."""
        return HbarOp(self.chart, {a: c.truncate_hbar(degree) for a, c in self.terms.items()})

    def hbar_range(self):
        hs = [h for c in self.terms.values() for (_, h, _) in c.terms]
        return (min(hs), max(hs)) if hs else (0, 0)

    # --- action ------------------------------------------------------------------
    def __call__(self, f: SuperPoly) -> SuperPoly:
        self._check(f)
        out = self.chart.zero()
        for a, c in self.terms.items():
            g = f
            for i, e in reversed(a):
                for _ in range(e):
                    g = left_derivative(g, self.chart.generators[i])
                    if not g:
                        break
                if not g:
                    break
            if g:
                out = out + c * g
        return out

    def __str__(self):
        return to_text_op(self)

    def __repr__(self):
        return f"HbarOp({to_text_op(self)})"


def to_text_op(L: HbarOp) -> str:
    """Deterministic text form ``(coef)*D[x1]*D[dx2]^2 + ...``."""
    if not L.terms:
        return "0"
    parts = []
    for a in sorted(L.terms, key=lambda a: (sum(e for _, e in a), a)):
        c = to_text(L.terms[a])
        ds = "*".join(
            f"D[{L.chart.generators[i].name}]" + (f"^{e}" if e > 1 else "") for i, e in a
        )
        parts.append(f"({c})" + (f"*{ds}" if ds else ""))
    return " + ".join(parts)


# --- composition -------------------------------------------------------------------


def _deriv_then(chart, gi: int, terms: dict) -> dict:
    """Terms of ``D_g o (sum c D^gamma)``."""
    g_odd = chart.odd[gi]
    out: dict = {}
    single = ((gi, 1),)
    for gam, c in terms.items():
        dc = _poly_derivative(c, gi)
        if dc:
            out[gam] = out[gam] + dc if gam in out else dc
        r = chart.mono_mul(single, gam)
        if r is None:
            continue
        sign, merged = r
        if g_odd:
            c = _odd_sign_pass(c)
        t = c if sign > 0 else -c
        out[merged] = out[merged] + t if merged in out else t
    return {a: c for a, c in out.items() if c}


def _poly_derivative(c: SuperPoly, gi: int) -> SuperPoly:
    chart = c.chart
    out: dict = {}
    for (m, h, ph), v in c.terms.items():
        r = _mono_derivative(chart, m, gi)
        if r is None:
            continue
        factor, rest = r
        SuperPoly._accumulate(out, (rest, h, ph), v * factor)
    return SuperPoly(chart, out)


def _odd_sign_pass(c: SuperPoly) -> SuperPoly:
    """``(-1)^{c}`` applied termwise: the sign of moving an odd derivative past c."""
    mp = c.chart.mono_parity
    return SuperPoly(c.chart, {k: (-v if mp(k[0]) else v) for k, v in c.terms.items()})


def compose(A: HbarOp, B: HbarOp, max_degree: int | None = None) -> HbarOp:
    """Normal-ordered product ``A o B``."""
    A._check(B)
    chart = A.chart
    out: dict = {}
    cache: dict = {}
    for a, ca in A.terms.items():
        if a not in cache:
            t = B.terms
            for i, e in reversed(a):
                for _ in range(e):
                    t = _deriv_then(chart, i, t)
            cache[a] = t
        for gam, c in cache[a].items():
            v = ca * c
            if max_degree is not None:
                v = v.truncate_hbar(max_degree)
            if v:
                out[gam] = out[gam] + v if gam in out else v
    return HbarOp(chart, out)


def commutator(A: HbarOp, B: HbarOp, check_divisible: bool = True) -> HbarOp:
    """Graded commutator ``AB - (-1)^{AB} BA`` (bilinear over homogeneous parts)."""
    out = HbarOp.zero(A.chart)
    for pa, Ah in A.homogeneous_parts().items():
        for pb, Bh in B.homogeneous_parts().items():
            t = compose(Ah, Bh)
            u = compose(Bh, Ah)
            out = out + (t + u if pa and pb else t - u)
    if check_divisible and A.is_hbar_differential() and B.is_hbar_differential():
        for alpha, c in out.terms.items():
            k = sum(e for _, e in alpha)
            if any(h < k + 1 for (_, h, _) in c.terms):
                raise DivisibilityError("commutator of hbar-differential operators is not divisible by hbar")
    return out


# --- symbols and brackets ------------------------------------------------------------


def principal_symbol(L: HbarOp) -> SuperPoly:
    """Top-order part of each homogeneous component, ``p^_a -> p_a``, hbar -> 0."""
    chart = L.chart
    if not L.is_hbar_differential():
        raise ValueError("operator is not hbar-differential")
    out = chart.zero()
    for a, c in L.terms.items():
        k = sum(e for _, e in a)
        top = c.hbar_part(k)
        if not top:
            continue
        # c hbar^k D^alpha = c (i)^k p^alpha
        mom = chart.one()
        for i, e in a:
            p = chart(chart.momentum_of(chart.generators[i]).name)
            for _ in range(e):
                mom = mom * p
        out = out + top * mom * (Scalar.i() ** k)
    return out


def apply_to_one(L: HbarOp) -> SuperPoly:
    return L.terms.get((), L.chart.zero())


def quantum_bracket(L: HbarOp, args) -> SuperPoly:
    """``(-i hbar)^{-n} [...[L,f1],...,fn](1)``; asserts the result has no negative hbar powers."""
    X = L
    for f in args:
        X = commutator(X, HbarOp.mult(f), check_divisible=False)
    v = apply_to_one(X)
    n = len(args)
    if n:
        v = v * (MINUS_I_HBAR ** n).inverse()
    if v and v.hbar_range()[0] < 0:
        raise DivisibilityError(f"{n}-fold commutator is not divisible by (-i hbar)^{n}")
    return v


def classical_bracket(L: HbarOp, args) -> SuperPoly:
    return quantum_bracket(L, args).hbar_part(0)


# --- standard operators ------------------------------------------------------------


def _split_momenta(chart, m):
    """Split a monomial into (coordinate part, momentum part, sign)."""
    mom_idx = set(chart.momentum.values())
    coord = tuple((i, e) for i, e in m if i not in mom_idx)
    mom = tuple((i, e) for i, e in m if i in mom_idx)
    r = chart.mono_mul(coord, mom)
    sign, _ = r
    return coord, mom, sign


def quantize_standard(Q: SuperPoly, plain: bool = False) -> HbarOp:
    """Standard (coefficients-left) quantization ``p_a -> -i hbar D_a``.

    With ``plain=True`` momenta go to ``D_a`` instead (no hbar factors).
    """
    chart = Q.chart
    back = {p: q for q, p in chart.momentum.items()}
    out: dict = {}
    for (m, h, ph), v in Q.terms.items():
        coord, mom, sign = _split_momenta(chart, m)
        alpha = tuple(sorted((back[i], e) for i, e in mom))
        # reorder the derivative multi-index into chart order, tracking sign
        s2 = _reorder_sign(chart, [(back[i], e) for i, e in mom])
        k = sum(e for _, e in mom)
        coef = SuperPoly(chart, {(coord, h, ph): v * sign * s2})
        if not plain and k:
            coef = coef * (MINUS_I_HBAR ** k)
        out[alpha] = out[alpha] + coef if alpha in out else coef
    return HbarOp(chart, out)


def _reorder_sign(chart, seq):
    acc = ()
    sign = 1
    for i, e in seq:
        r = chart.mono_mul(acc, ((i, e),))
        if r is None:
            raise ValueError("repeated odd derivative")
        s, acc = r
        sign *= s
    return sign


def de_rham_op(chart) -> HbarOp:
    """``d = dx^a D_{x^a}``."""
    return HbarOp(chart, {((g.order_index, 1),): chart(chart.dx_of(g).name) for g in chart.base})


def P_hat(P: PStructure | SuperPoly, plain: bool = False) -> HbarOp:
    """``P(x, -i hbar D/Ddx)`` (or ``P(x, D/Ddx)`` = i(P) when ``plain``)."""
    from .brackets import P_on_pi

    return quantize_standard(P_on_pi(P), plain=plain)


def interior_product(P) -> HbarOp:
    return P_hat(P, plain=True)


def build_Delta_P(P: PStructure | SuperPoly) -> HbarOp:
    """``Delta_P = -[d, P^]`` with ``P^ = P(x, -i hbar D/Ddx)``."""
    Pv = P.P if isinstance(P, PStructure) else P
    if Pv.parity_or_none() != 0:
        raise ParityError("P must be even")
    d = de_rham_op(Pv.chart)
    return -commutator(d, P_hat(Pv))


def koszul_bv_operator(P) -> HbarOp:
    """``-[d, i(P)]``; satisfies ``Delta_P = -hbar^2 * (this)`` for a bivector."""
    Pv = P.P if isinstance(P, PStructure) else P
    return -commutator(de_rham_op(Pv.chart), interior_product(Pv), check_divisible=False)


def lichnerowicz_op(P: PStructure | SuperPoly) -> HbarOp:
    """``d_P = [[P, -]]`` as a first-order operator on functions of (x, x*)."""
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    out: dict = {}
    for g in chart.base:
        xs = chart.xs_of(g)
        c1 = left_derivative(Pv, xs)
        c2 = left_derivative(Pv, g)
        if g.parity:
            c1, c2 = -c1, -c2
        if c1:
            out[((g.order_index, 1),)] = c1
        if c2:
            out[((xs.order_index, 1),)] = c2
    return HbarOp(chart, out)


def divergence_op(chart, vol: VolumeData | None = None) -> HbarOp:
    """``delta_rho = (-1)^a (D_a + d lambda/dx^a) D_{x*_a}``."""
    lam = vol.log_rho if vol is not None else chart.zero()
    out: dict = {}
    for g in chart.base:
        xs = chart.xs_of(g)
        s = -1 if g.parity else 1
        a2 = ((g.order_index, 1), (xs.order_index, 1))
        out[a2] = chart.one() * s
        la = left_derivative(lam, g)
        if la:
            out[((xs.order_index, 1),)] = la * s
    return HbarOp(chart, out)


def build_D_dP(P: PStructure | SuperPoly, F0: SuperPoly | None = None, check: bool = True) -> HbarOp:
    """``D = -i hbar d_P - i hbar F0``; raises if ``d_P(F0) != 0`` when ``check``."""
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    F0 = F0 if F0 is not None else chart.zero()
    if F0 and F0.parity_or_none() != 1:
        raise ParityError("F0 must be odd")
    if check and F0:
        r = canonical_schouten(Pv, F0)
        if r:
            raise ValueError(f"d_P(F0) = {to_text(r)} is not zero")
    return (lichnerowicz_op(Pv) + HbarOp.mult(F0)).scale(MINUS_I_HBAR)


def square(L: HbarOp) -> HbarOp:
    return compose(L, L)


def hleibniz_residual(L: HbarOp, fs, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """Left minus right side of the hbar-modified Leibniz identity for homogeneous inputs."""
    qb = quantum_bracket
    lhs = qb(L, list(fs) + [f * g])
    eps = (L.parity + sum(x.parity for x in fs)) * f.parity
    rhs = qb(L, list(fs) + [f]) * g
    t = f * qb(L, list(fs) + [g])
    rhs = rhs + (-t if eps % 2 else t)
    rhs = rhs + qb(L, list(fs) + [f, g]) * MINUS_I_HBAR
    return lhs - rhs
