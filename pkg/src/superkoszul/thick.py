"""Thick morphisms: generating functions, formal pullbacks, the anchor of a
P-infinity structure and its dual, Berezin-kernel quantum pullbacks and the
intertwining operator between Delta_P and the divergence."""
from __future__ import annotations

from dataclasses import dataclass, field

from .brackets import (
    PStructure,
    VolumeData,
    canonical_schouten,
    divergence,
)
from .hbarops import HbarOp, build_Delta_P, divergence_op
from .mx import I_OVER_HBAR, DualPair, TO_TANGENT, quantum_mx
from .report import Check
from .superalg import (
    HBAR,
    ChartMismatch,
    NotNilpotent,
    ParityError,
    Scalar,
    SuperPoly,
    berezin_integral,
    exp_nilpotent,
    left_derivative,
    restrict_zero,
    substitute,
    to_text,
)


# --- generating functions and pullbacks -------------------------------------------


@dataclass
class GenFunction:
    """Generating function ``S(x, q)`` of a thick morphism.

    ``target`` lists the target coordinates y^i and ``momenta`` their conjugates
    q_i, in matching order.  Source coordinates and target momenta live in one
    chart; target coordinates only ever appear in functions being pulled back.
    """

    S: SuperPoly
    target: list
    momenta: list
    source_momenta: list = field(default_factory=list)

    def __post_init__(self):
        c = self.S.chart
        self.target = [c[g] for g in self.target]
        self.momenta = [c[g] for g in self.momenta]
        self.source_momenta = [c[g] for g in self.source_momenta]
        if len(self.target) != len(self.momenta):
            raise ValueError("each target coordinate needs one momentum")

    @property
    def chart(self):
        return self.S.chart

    def momentum_degree(self) -> int:
        return self.S.max_degree_in(self.momenta)

    def target_values(self, q_values=None) -> dict:
        """``y^i = (-1)^i dS/dq_i``, optionally with q substituted."""
        out = {}
        for y, q in zip(self.target, self.momenta):
            v = left_derivative(self.S, q)
            if y.parity:
                v = -v
            if q_values is not None:
                v = substitute(v, q_values)
            out[y] = v
        return out


def _truncate_t(f: SuperPoly, t, order):
    parts = f.degree_in([t])
    return sum((v for k, v in parts.items() if k <= order), f.chart.zero())


def thick_pullback(Sg: GenFunction, g: SuperPoly, truncation: int = 4, max_steps: int | None = None) -> SuperPoly:
    """``Phi*[g] = g(y) + S(x,q) - y^i q_i`` at the joint fixed point
    ``q = dg/dy(y)``, ``y = (-1)^i dS/dq(x,q)``.

    The fixed point is found by iterating with ``g`` replaced by ``t*g``; each
    step fixes one more order in t and the result is truncated at ``t^truncation``
    before setting t = 1.
    """
    chart = Sg.chart
    if g.chart is not chart:
        raise ChartMismatch("g lives on another chart")
    if Sg.momentum_degree() <= 1:
        # y does not depend on q, and S(x,q) - y q reduces to S^0
        y = Sg.target_values()
        return substitute(g, y) + restrict_zero(Sg.S, Sg.momenta)
    if g.parity_or_none() not in (0, None) or g.parity_or_none() is None and g:
        raise ParityError("nonlinear thick pullback needs an even function")
    t = chart["t"]
    if Sg.S.generators_used() & {t} or g.generators_used() & {t}:
        raise ValueError("the auxiliary parameter t is reserved for the iteration")
    G = chart("t") * g
    q = {m: chart.zero() for m in Sg.momenta}
    steps = max_steps or truncation + 2
    for _ in range(steps):
        y = Sg.target_values(q)
        new_q = {m: _truncate_t(substitute(left_derivative(G, yi), y), t, truncation)
                 for yi, m in zip(Sg.target, Sg.momenta)}
        if new_q == q:
            break
        q = new_q
    else:
        raise RuntimeError("fixed-point iteration did not stabilise within the step budget")
    y = Sg.target_values(q)
    out = substitute(G, y) + substitute(Sg.S, q)
    for yi, m in zip(Sg.target, Sg.momenta):
        out = out - y[yi] * q[m]
    out = _truncate_t(out, t, truncation)
    return substitute(out, {t: chart.one()})


def linear_genfun(chart, phi: dict, S0: SuperPoly | None = None) -> GenFunction:
    """``S = S^0(x) + phi^i(x) q_i`` for a map given as {target generator: value}."""
    S = S0 if S0 is not None else chart.zero()
    target, moms = [], []
    for y, v in phi.items():
        y = chart[y]
        m = chart.momentum_of(y)
        S = S + v * chart(m.name)
        target.append(y)
        moms.append(m)
    return GenFunction(S, target, moms)


# --- anchor and its dual -------------------------------------------------------------


def anchor_sign(g) -> int:
    """Sign in the anchor ``dx^a = (-1)^a dP/dx*_a``.

    With it ``a*(dx^a) = [[P, x^a]]``, so the pullback intertwines d and d_P.
    """
    return -1 if g.parity else 1


def anchor_genfun(P: PStructure | SuperPoly) -> GenFunction:
    """``S = x^a q_a + (-1)^a dP/dx*_a pi_a`` for the anchor Pi T*M -> Pi TM.

    Target coordinates are (x, dx); their momenta (p, pi) play the role of q.
    """
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    S = chart.zero()
    target, moms, src = [], [], []
    for g in chart.base:
        p, dx = chart.momentum_of(g), chart.dx_of(g)
        pi = chart.momentum_of(dx)
        xs = chart.xs_of(g)
        S = S + chart(g.name) * chart(p.name) + left_derivative(Pv, xs) * chart(pi.name) * anchor_sign(g)
        target += [g, dx]
        moms += [p, pi]
        src += [p, chart.momentum_of(xs)]
    return GenFunction(S, target, moms, src)


def dual_genfun(P: PStructure | SuperPoly) -> GenFunction:
    """``S* = y^a p_a + (-1)^a dP/dx*_a(x, pi) y*_a`` for the dual thick morphism.

    Source coordinates (y, y*) are written x, x*; the target is Pi TM with
    coordinates (x, dx) and momenta (p, pi).
    """
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    S = chart.zero()
    target, moms, src = [], [], []
    for g in chart.base:
        p, dx, xs = chart.momentum_of(g), chart.dx_of(g), chart.xs_of(g)
        pi = chart.momentum_of(dx)
        dP = substitute(left_derivative(Pv, xs),
                        {chart.xs_of(h): chart(chart.momentum_of(chart.dx_of(h)).name) for h in chart.base})
        t = dP * chart(xs.name)
        S = S + chart(g.name) * chart(p.name) + (-t if g.parity else t)
        target += [g, dx]
        moms += [p, pi]
        src += [p, chart.momentum_of(xs)]
    return GenFunction(S, target, moms, src)


def phi_related_residual(H1: SuperPoly, H2: SuperPoly, Sg: GenFunction) -> SuperPoly:
    """``H1(x, dS/dx) - H2((-1)^i dS/dq_i, q)``.

    H1 lives on the source cotangent chart, whose momenta are
    ``Sg.source_momenta`` (conjugate, in order, to the source coordinates).
    """
    chart = Sg.chart
    sub1 = {}
    for m in Sg.source_momenta:
        coord = next(chart.generators[q] for q, mm in chart.momentum.items() if mm == m.order_index)
        sub1[m] = left_derivative(Sg.S, coord)
    lhs = substitute(H1, sub1)
    rhs = substitute(H2, Sg.target_values())
    return lhs - rhs


def check_phi_related(H1: SuperPoly, H2: SuperPoly, Sg: GenFunction, truncation: int | None = None,
                      name="phi-related") -> Check:
    check = Check(name)
    r = phi_related_residual(H1, H2, Sg)
    if truncation is not None:
        parts = r.degree_in(Sg.momenta)
        r = sum((v for k, v in parts.items() if k <= truncation), r.chart.zero())
    check.record(not r, r)
    return check


def classical_anchor_pullback(P: PStructure | SuperPoly, omega: SuperPoly) -> SuperPoly:
    """``a*(omega)``: substitute ``dx^a = (-1)^a dP/dx*_a``."""
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    allowed = list(chart.base) + [chart.dx_of(g) for g in chart.base]
    if not omega.depends_only_on(allowed):
        raise ValueError("omega must be a differential form")
    return substitute(omega, {chart.dx_of(g): left_derivative(Pv, chart.xs_of(g)) * anchor_sign(g) for g in chart.base})


# --- Berezin kernels ---------------------------------------------------------------


def dbar_factor(m: int) -> Scalar:
    """``(i hbar)^m (-1)^{m(m+1)/2}`` for m odd integration variables."""
    s = (Scalar.i() * HBAR) ** m
    return s if (m * (m + 1) // 2) % 2 == 0 else -s


def _dual_gen(chart, g):
    """Fiber generator paired with g: dx <-> x*, ud <-> us."""
    name = g.name
    for a, b in (("dx", "xs"), ("xs", "dx"), ("ud", "us"), ("us", "ud")):
        if name.startswith(a) and g.role != "base":
            return chart[b + name[len(a):]]
    raise ValueError(f"{name} has no dual fiber generator")


def _aux_of(chart, g):
    for a, b in (("dx", "ud"), ("xs", "us"), ("ud", "dx"), ("us", "xs")):
        if g.name.startswith(a):
            return chart[b + g.name[len(a):]]
    raise ValueError(f"no auxiliary partner for {g.name}")


@dataclass
class KernelOperator:
    """``f(x, v) |-> N * int Du Dbar w exp((i/hbar)(S(out; w) - <u, w>)) f(x, u)``.

    ``inputs``: fiber generators the argument is written in; ``slots``: the
    generators u it is renamed to under the integral; ``dummies``: the conjugate
    integration variables w (carrying the Dbar normalization); ``outputs``: the
    fiber generators of the result.  ``pair_order`` is "slot-dummy" for the
    pairing term ``u w`` and "dummy-slot" for ``w u``.
    """

    S: SuperPoly
    inputs: list
    slots: list
    dummies: list
    outputs: list
    pair_order: str = "slot-dummy"

    def __post_init__(self):
        c = self.S.chart
        for name in ("inputs", "slots", "dummies", "outputs"):
            setattr(self, name, [c[g] for g in getattr(self, name)])
        for g in self.slots + self.dummies:
            if not g.parity:
                raise ParityError(f"integration slot {g.name} must be odd")
        if any(g.parity for g in c.base):
            raise ParityError("kernel operators need a purely even base")

    @property
    def chart(self):
        return self.S.chart

    def pair_term(self) -> SuperPoly:
        c = self.chart
        if self.pair_order == "slot-dummy":
            return sum((c(u.name) * c(w.name) for u, w in zip(self.slots, self.dummies)), c.zero())
        return sum((c(w.name) * c(u.name) for u, w in zip(self.slots, self.dummies)), c.zero())

    def kernel(self) -> SuperPoly:
        phase = (self.S - self.pair_term()) * I_OVER_HBAR
        if phase.has_body():
            raise NotNilpotent("kernel phase has a body")
        return exp_nilpotent(phase)

    def normalization(self) -> Scalar:
        return dbar_factor(len(self.dummies))


def quantum_pullback(K: KernelOperator, f: SuperPoly) -> SuperPoly:
    chart = K.chart
    used = f.generators_used()
    stray = [g.name for g in used if g.role != "base" and g not in K.inputs]
    if stray:
        raise ValueError(f"argument depends on {stray}, which are not kernel inputs")
    rename = {a: chart(b.name) for a, b in zip(K.inputs, K.slots) if a != b}
    f2 = substitute(f, rename) if rename else f
    r = berezin_integral(K.kernel() * f2, list(K.slots) + list(K.dummies))
    return r * K.normalization()


def quantum_dual(K: KernelOperator, pairing: str = "kernel") -> KernelOperator:
    """Slot-swapped kernel with ``S*(w2; u1) = S(u1; w2)``.

    ``pairing="kernel"`` pairs the new slot and dummy as ``u1 w1`` (adjoint for the
    pairing ``int exp(-(i/hbar) u1 w1) f1 g1`` on the output side of K).
    ``pairing="induced"`` keeps the slot-dummy order ``w1 u1``; this is the adjoint
    for the single pairing between functions on Pi TM and on Pi T*M, used in both
    directions (see :func:`kernel_adjoint_residuals`).
    """
    chart = K.chart
    new_inputs = [_dual_gen(chart, g) for g in K.outputs]  # w1
    new_outputs = [_dual_gen(chart, g) for g in K.inputs]  # w2
    taken = set(new_outputs)
    new_dummies = [g if g not in taken else _aux_of(chart, g) for g in K.outputs]  # u1
    taken |= set(new_dummies)
    new_slots = [g if g not in taken else _aux_of(chart, g) for g in new_inputs]
    sub = {}
    for old, new in zip(K.outputs, new_dummies):
        if old != new:
            sub[old] = chart(new.name)
    for old, new in zip(K.dummies, new_outputs):
        if old != new:
            sub[old] = chart(new.name)
    S = substitute(K.S, sub) if sub else K.S
    if pairing == "kernel":
        order = "dummy-slot" if K.pair_order == "slot-dummy" else "slot-dummy"
    elif pairing == "induced":
        order = K.pair_order
    else:
        raise ValueError(f"unknown pairing {pairing!r}")
    return KernelOperator(S, new_inputs, new_slots, new_dummies, new_outputs, order)


def kernel_adjoint_residuals(K: KernelOperator, Kd: KernelOperator, gauss, fs, gs, pairing="kernel"):
    """Residuals of the adjoint law between K (Pi TM -> Pi T*M) and its dual Kd.

    ``pairing="kernel"``: ``<K f, g>' = <f, Kd g>`` where <,>' pairs Pi T*M with
    Pi TM through ``exp(-(i/hbar) x* dx)``.
    ``pairing="induced"``: ``<g, K f> = (-1)^{fg} <f, Kd g>`` with the one pairing
    ``exp(-(i/hbar) dx x*)``.
    """
    from .mx import pairing as pair_int

    chart = K.chart
    pF = DualPair.forms_multivectors(chart)
    out = []
    for f in fs:
        Kf = quantum_pullback(K, f)
        for g in gs:
            rhs = pair_int(f, quantum_pullback(Kd, g), pF, gauss)
            if pairing == "kernel":
                lhs = pair_int(Kf, g, pF.swapped(), gauss)
            else:
                lhs = pair_int(g, Kf, pF, gauss)
                if f.parity * g.parity:
                    rhs = -rhs
            out.append(lhs - rhs)
    return out


def pairing_kernel(chart) -> KernelOperator:
    """Kernel with ``S = u1 w2`` on Pi TM: the identity operator."""
    dx = [chart.dx_of(g) for g in chart.base]
    ud = [_aux_of(chart, g) for g in dx]
    xs = [chart.xs_of(g) for g in chart.base]
    S = sum((chart(a.name) * chart(b.name) for a, b in zip(dx, xs)), chart.zero())
    return KernelOperator(S, dx, ud, xs, dx)


def anchor_kernel(P: PStructure | SuperPoly) -> KernelOperator:
    """The ordinary pullback by the anchor written as a kernel operator.

    ``f(x, dy) |-> int D(dy) Dbar y* exp((i/hbar)((-1)^a dP/dx*_a y*_a - dy^a y*_a)) f``
    with y* realised by the dummies ``us``.
    """
    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    S = chart.zero()
    for g in chart.base:
        us = _aux_of(chart, chart.xs_of(g))
        S = S + left_derivative(Pv, chart.xs_of(g)) * chart(us.name) * anchor_sign(g)
    dx = [chart.dx_of(g) for g in chart.base]
    return KernelOperator(S, dx, dx, [_aux_of(chart, chart.xs_of(g)) for g in chart.base],
                          [chart.xs_of(g) for g in chart.base])


def form_basis(chart, max_degree: int = 3, coeffs=None):
    """Monomials ``c(x) dx^I`` with |I| <= max_degree, for c in ``coeffs`` (default 1, x^a)."""
    from itertools import combinations

    dxs = [chart(chart.dx_of(g).name) for g in chart.base]
    coeffs = coeffs or [chart.one()] + [chart(g.name) for g in chart.base]
    out = []
    for k in range(min(max_degree, len(dxs)) + 1):
        for combo in combinations(dxs, k):
            m = chart.one()
            for d in combo:
                m = m * d
            for c in coeffs:
                out.append(c * m)
    return out


def anchor_dual_kernel(P: PStructure | SuperPoly) -> KernelOperator:
    """``g(x, dx) |-> int D(dx) Dbar x* exp((i/hbar)((-1)^a dP/dx*_a(x, x*) y*_a - dx^a x*_a)) g``."""
    return quantum_dual(anchor_kernel(P), pairing="induced")


def intertwiner(P: PStructure, vol: VolumeData | None = None, F: SuperPoly | None = None):
    """The operator ``(e^{-F} a*)*`` from forms to multivector fields, as a callable.

    Without F this is the dual anchor kernel.  With F it is that kernel preceded by
    the quantum MX image of multiplication by ``e^{-F}``.
    """
    chart = P.chart
    vol = vol or VolumeData.trivial(chart)
    K = anchor_dual_kernel(P)
    if F is None or not F:
        return lambda w: quantum_pullback(K, w)
    if F.has_body():
        raise NotNilpotent("the correction e^{-F} needs F without a body")
    if F.parity_or_none() != 0:
        raise ParityError("F must be even")
    pre = quantum_mx(HbarOp.mult(exp_nilpotent(-F)), DualPair.forms_multivectors(chart), vol, TO_TANGENT)
    return lambda w: quantum_pullback(K, pre(w))


def intertwining_residuals(P: PStructure, vol: VolumeData, F: SuperPoly | None, corpus) -> list[SuperPoly]:
    """``I(Delta_P w) - (-hbar^2 delta)(I w)`` for each form w, with I from :func:`intertwiner`."""
    chart = P.chart
    I_op = intertwiner(P, vol, F)
    delta = divergence_op(chart, vol).scale(Scalar({(2, 0): -1}))
    D = build_Delta_P(P)
    return [I_op(D(w)) - delta(I_op(w)) for w in corpus]


def check_intertwining(P: PStructure, vol: VolumeData | None = None, F: SuperPoly | None = None,
                       corpus=None, name="intertwining") -> Check:
    chart = P.chart
    vol = vol or VolumeData.trivial(chart)
    check = Check(name)
    if not P.is_pinfty:
        return check.skip("[[P,P]] != 0")
    mu = divergence(P.P, vol)
    if mu and F is None:
        return check.skip(f"modular obstruction: delta(P) = {to_text(mu)} and no F given")
    if F is not None:
        r = mu - canonical_schouten(P.P, F)
        if r:
            return check.skip(f"delta(P) - d_P(F) = {to_text(r)} is not zero")
    corpus = corpus if corpus is not None else form_basis(chart)
    for r in intertwining_residuals(P, vol, F, corpus):
        check.record(not r, r)
    return check
