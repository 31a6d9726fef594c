"""L-infinity combinatorics: shuffles, Koszul signs, higher Jacobi identities in
both versions, brackets of a homological vector field, L-infinity morphism
relations and polarization of nonlinear maps."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable

from .report import Check
from .superalg import Chart, SuperPoly, left_derivative, restrict_zero

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"


# --- permutations --------------------------------------------------------------------


def shuffles(k: int, l: int) -> list[tuple[int, ...]]:
    """All (k,l)-shuffles of 1..k+l as tuples ``(sigma(1), ..., sigma(k+l))``."""
    n = k + l
    out = []
    for first in itertools.combinations(range(1, n + 1), k):
        rest = tuple(i for i in range(1, n + 1) if i not in first)
        out.append(first + rest)
    return out


def perm_sign(perm) -> int:
    s = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def koszul_sign(perm, parities) -> int:
    """Sign of reordering ``a_1..a_n`` into ``a_{perm(1)}..a_{perm(n)}`` (1-based)."""
    if len(perm) != len(parities):
        raise ValueError("permutation and parities differ in length")
    s = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j] and parities[p[i] - 1] and parities[p[j] - 1]:
                s = -s
    return s


# --- bracket families --------------------------------------------------------------


@dataclass
class BracketFamily:
    """Multilinear brackets ``l_k`` (``brackets[k](list_of_args)``) in one of the two versions."""

    brackets: dict
    version: str = SYMMETRIC
    parity: Callable = field(default=lambda f: f.parity)

    def __post_init__(self):
        if self.version not in (SYMMETRIC, ANTISYMMETRIC):
            raise ValueError(f"unknown version {self.version!r}")

    def __call__(self, k: int, args):
        fn = self.brackets.get(k)
        if fn is None:
            return None
        return fn(list(args))

    @property
    def max_arity(self):
        return max(self.brackets, default=0)


def _zero_like(args, fallback):
    for a in args:
        return a.chart.zero() if hasattr(a, "chart") else 0
    return fallback


def jacobi_sum(family: BracketFamily, args, n: int | None = None):
    """``sum_{k+l=n} sum_{Sh(k,l)} sign * l_{l+1}(l_k(a_s(1..k)), a_s(k+1..n))``.

    Symmetric version: sign = eps(sigma).  Antisymmetric: sign(sigma) eps(sigma) (-1)^{kl}.
    Missing brackets count as zero.
    """
    args = list(args)
    n = len(args) if n is None else n
    pars = [family.parity(a) for a in args]
    total = None
    for k in range(0, n + 1):
        l = n - k
        if k not in family.brackets or (l + 1) not in family.brackets:
            continue
        for sh in shuffles(k, l):
            eps = koszul_sign(sh, pars)
            if family.version == ANTISYMMETRIC:
                eps *= perm_sign(sh) * (-1 if (k * l) % 2 else 1)
            inner = family(k, [args[i - 1] for i in sh[:k]])
            if inner is None or not inner:
                continue
            val = family(l + 1, [inner] + [args[i - 1] for i in sh[k:]])
            if val is None:
                continue
            term = val if eps > 0 else -val
            total = term if total is None else total + term
    if total is None:
        return _zero_like(args, 0)
    return total


def check_higher_jacobi(family: BracketFamily, corpus, n_max: int, name="higher-jacobi") -> Check:
    """Every corpus tuple (truncated to n args) for n = 0..n_max makes the shuffle sum vanish."""
    check = Check(name)
    for n in range(0, n_max + 1):
        for tup in corpus:
            if len(tup) < n:
                continue
            r = jacobi_sum(family, tup[:n], n)
            check.record(not r, f"n={n}: {r}")
    return check


def pinfty_family(P) -> BracketFamily:
    """Higher Poisson brackets of a P-infinity structure (antisymmetric version)."""
    from .brackets import PStructure, higher_derived_bracket_P

    Pv = P.P if isinstance(P, PStructure) else P
    chart = Pv.chart
    arities = range(0, Pv.max_degree_in([chart.xs_of(g) for g in chart.base]) + 1)
    return BracketFamily({k: (lambda args, P=Pv: higher_derived_bracket_P(P, args)) for k in arities},
                         ANTISYMMETRIC)


def hamiltonian_family(H, max_arity: int) -> BracketFamily:
    """Higher derived brackets of an odd Hamiltonian (symmetric version)."""
    from .brackets import higher_derived_bracket_H

    return BracketFamily({k: (lambda args, H=H: higher_derived_bracket_H(H, args)) for k in range(max_arity + 1)},
                         SYMMETRIC)


# --- homological vector fields ------------------------------------------------------


def linear_chart(parities, prefix="xi") -> Chart:
    """Chart of linear coordinates ``xi1, xi2, ...`` on a super vector space."""
    return Chart([(f"{prefix}{k + 1}", p, "base") for k, p in enumerate(parities)])


@dataclass
class VectorField:
    """``X = sum X^k d/dxi^k`` on a linear chart; ``coeffs`` maps generator index -> SuperPoly."""

    chart: Chart
    coeffs: dict

    def __post_init__(self):
        self.coeffs = {k: v for k, v in self.coeffs.items() if v}

    @classmethod
    def constant(cls, chart, vec: dict):
        """Constant field for a vector ``{generator name: rational}``."""
        return cls(chart, {chart.index(g): chart.const(Fraction(c)) for g, c in vec.items()})

    def parity_or_none(self):
        ps = set()
        for k, c in self.coeffs.items():
            for p, part in c.homogeneous_parts().items():
                if part:
                    ps.add((p + self.chart.odd[k]) % 2)
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def apply(self, f: SuperPoly) -> SuperPoly:
        out = self.chart.zero()
        for k, c in self.coeffs.items():
            out = out + c * left_derivative(f, self.chart.generators[k])
        return out

    def bracket(self, other: "VectorField") -> "VectorField":
        """Graded commutator ``XY - (-1)^{XY} YX``."""
        px, py = self.parity_or_none(), other.parity_or_none()
        if px is None or py is None:
            raise ValueError("commutator needs homogeneous fields")
        out = {}
        for k, c in other.coeffs.items():
            out[k] = out.get(k, self.chart.zero()) + self.apply(c)
        for k, c in self.coeffs.items():
            t = other.apply(c)
            out[k] = out.get(k, self.chart.zero()) + (t if px * py else -t)
        return VectorField(self.chart, out)

    def at_zero(self) -> dict:
        """Value at the origin as ``{generator name: Fraction}`` (must be a number)."""
        gens = list(self.chart.generators)
        out = {}
        for k, c in self.coeffs.items():
            v = restrict_zero(c, gens)
            for (m, h, ph), x in v.terms.items():
                if h or ph:
                    raise ValueError("non-rational value")
                out[self.chart.generators[k].name] = x
        return out

    def square(self) -> "VectorField":
        """``Q^2 = 1/2 [Q, Q]`` for odd Q."""
        b = self.bracket(self)
        return VectorField(self.chart, {k: c * Fraction(1, 2) for k, c in b.coeffs.items()})


def as_vector(chart, u) -> dict:
    """``{name: Fraction}`` from a dict or a linear SuperPoly ``sum u^i xi^i``."""
    if isinstance(u, dict):
        return {chart[g].name: Fraction(c) for g, c in u.items() if c}
    if u.chart is not chart:
        raise ValueError("vector lives on another chart")
    out = {}
    for (m, h, ph), c in u.terms.items():
        if h or ph or len(m) != 1 or m[0][1] != 1:
            raise ValueError("argument is not a constant vector")
        out[chart.generators[m[0][0]].name] = c
    return out


def vector_poly(chart, vec: dict) -> SuperPoly:
    out = chart.zero()
    for g, c in vec.items():
        out = out + chart(g) * Fraction(c)
    return out


def vector_parity(chart, vec: dict):
    ps = {chart[g].parity for g, c in vec.items() if c}
    if len(ps) > 1:
        return None
    return ps.pop() if ps else 0


def brackets_from_Q(Q: VectorField, args, version: str = SYMMETRIC) -> SuperPoly:
    """``l_k(u_1..u_k) = [...[Q,u_1],...,u_k](0)`` with vectors as constant fields.

    Vectors are linear SuperPolys ``sum u^i xi^i`` (or ``{name: rational}`` dicts);
    the result is returned the same way.  In the antisymmetric version an element
    x of L = Pi V enters as ``iota(x) = (-1)^x x^i d/dxi^i`` and the result is
    multiplied by ``(-1)^eps``, ``eps = sum_i x_i (k - i)``; x is given by its
    coordinates, its parity in L being opposite to the coordinate parity.
    """
    chart = Q.chart
    X = Q
    eps = 0
    k = len(args)
    for i, u in enumerate(args, start=1):
        u = as_vector(chart, u)
        field_ = VectorField.constant(chart, u)
        if version == ANTISYMMETRIC:
            xp = (vector_parity(chart, u) + 1) % 2
            if xp:
                field_ = VectorField(chart, {j: -c for j, c in field_.coeffs.items()})
            eps += xp * (k - i)
        X = X.bracket(field_)
    val = {g: c for g, c in X.at_zero().items() if c}
    if version == ANTISYMMETRIC and val:
        lp = (vector_parity(chart, val) + 1) % 2
        if (eps + lp) % 2:
            val = {g: -c for g, c in val.items()}
    return vector_poly(chart, val)


def family_from_Q(Q: VectorField, max_arity: int, version: str = SYMMETRIC) -> BracketFamily:
    """Brackets of Q on linear SuperPoly vectors; parity is the coordinate parity
    (symmetric) or the opposite one (antisymmetric)."""
    def par(u):
        p = u.parity
        return p if version == SYMMETRIC else (p + 1) % 2

    def vec_parity(u):
        return par(u) if u else 0

    return BracketFamily({k: (lambda args, Q=Q: brackets_from_Q(Q, args, version)) for k in range(max_arity + 1)},
                         version, parity=vec_parity)


def Q_from_brackets(chart, structure: dict) -> VectorField:
    """Homological field of symmetric odd brackets given on basis vectors.

    Components are ``(-1)^k/k! l_k(xi, ..., xi)``.  The sign makes
    :func:`brackets_from_Q` (graded commutators, verbatim) recover the table; it is
    the rescaling ``l_k -> (-1)^k l_k``, which preserves the higher Jacobi identities.

    ``structure[k]`` maps a sorted tuple of generator names (with repetition for even
    ones) to the output vector ``{name: rational}``; values on other orderings follow
    by symmetry.
    """
    gens = list(chart.generators)
    for k, table in structure.items():
        for key, out in table.items():
            if len(key) != k or tuple(sorted(key)) != tuple(key):
                raise ValueError(f"key {key} must be a sorted {k}-tuple")
            odd_keys = [g for g in key if chart[g].parity]
            if len(set(odd_keys)) != len(odd_keys):
                raise ValueError(f"repeated odd argument in {key}")
            want = (sum(chart[g].parity for g in key) + 1) % 2
            if any(chart[o].parity != want for o, c in out.items() if c):
                raise ValueError(f"bracket on {key} must have parity {want}")
    coeffs: dict = {}
    for k, table in structure.items():
        for idx in itertools.product(range(len(gens)), repeat=k):
            key = tuple(sorted(gens[i].name for i in idx))
            if key not in table:
                continue
            names = [gens[i].name for i in idx]
            pars = [gens[i].parity for i in idx]
            # reorder the argument list into the sorted key, Koszul sign
            order = sorted(range(k), key=lambda j: (names[j], j))
            perm = tuple(j + 1 for j in order)
            s = koszul_sign(perm, pars)
            # pull the coordinates out: prod_j (-1)^{xi_j (1 + sum_{m<j} e_m)}
            acc = 0
            for j in range(k):
                if pars[j] and (1 + acc) % 2:
                    s = -s
                acc += pars[j]
            mono = chart.one()
            for i in idx:
                mono = mono * chart(gens[i].name)
            if not mono:
                continue
            for out, c in table[key].items():
                o = chart.index(out)
                coeffs[o] = coeffs.get(o, chart.zero()) + mono * (Fraction(c) * s * (-1) ** k / factorial(k))
    return VectorField(chart, coeffs)


# --- morphisms -----------------------------------------------------------------


@dataclass
class MorphismData:
    """Taylor components ``phi[k](list_of_args)`` of an L-infinity morphism (symmetric version)."""

    taylor: dict
    source: BracketFamily
    target: BracketFamily

    def phi(self, k, args):
        fn = self.taylor.get(k)
        return None if fn is None else fn(list(args))


def _sum(vals):
    vals = [v for v in vals if v is not None]
    if not vals:
        return None
    out = vals[0]
    for v in vals[1:]:
        out = out + v
    return out


def morphism_residual(md: MorphismData, args) -> object:
    """Left minus right side of the displayed relation for n = len(args) <= 3 (even arguments)."""
    n = len(args)
    l, lp, phi = md.source, md.target, md.phi
    u = list(args)
    if n == 1:
        lhs = [phi(1, [l(1, u)]) if l(1, u) is not None else None]
        rhs = [lp(1, [phi(1, u)])]
    elif n == 2:
        u1, u2 = u
        lhs = [_apply(phi, 1, [l(2, [u1, u2])]),
               _apply(phi, 2, [l(1, [u1]), u2]),
               _apply(phi, 2, [l(1, [u2]), u1])]
        rhs = [_apply(lp, 1, [phi(2, [u1, u2])]),
               _apply(lp, 2, [phi(1, [u1]), phi(1, [u2])])]
    elif n == 3:
        u1, u2, u3 = u
        lhs = [_apply(phi, 1, [l(3, [u1, u2, u3])]),
               _apply(phi, 2, [l(2, [u1, u2]), u3]),
               _apply(phi, 2, [l(2, [u1, u3]), u2]),
               _apply(phi, 2, [l(2, [u2, u3]), u1]),
               _apply(phi, 3, [l(1, [u1]), u2, u3]),
               _apply(phi, 3, [l(1, [u2]), u1, u3]),
               _apply(phi, 3, [l(1, [u3]), u1, u2])]
        rhs = [_apply(lp, 1, [phi(3, [u1, u2, u3])]),
               _apply(lp, 2, [phi(1, [u1]), phi(2, [u2, u3])]),
               _apply(lp, 2, [phi(1, [u2]), phi(2, [u1, u3])]),
               _apply(lp, 2, [phi(1, [u3]), phi(2, [u1, u2])]),
               _apply(lp, 3, [phi(1, [u1]), phi(1, [u2]), phi(1, [u3])])]
    else:
        raise ValueError("only the relations for n <= 3 are implemented")
    L, R = _sum(lhs), _sum(rhs)
    if L is None and R is None:
        return 0
    if L is None:
        return -R
    if R is None:
        return L
    return L - R


def _apply(fn, k, args):
    if any(a is None for a in args):
        return None
    return fn(k, args) if not isinstance(fn, BracketFamily) else fn(k, args)


def check_linfty_morphism(md: MorphismData, corpus, n_max: int = 3, name="linfty-morphism") -> Check:
    if n_max > 3:
        raise ValueError("n_max must be at most 3")
    for fam in (md.source, md.target):
        if 0 in fam.brackets:
            raise ValueError("curved families (nonzero 0-ary bracket) are not supported")
    check = Check(name)
    for n in range(1, n_max + 1):
        for tup in corpus:
            if len(tup) < n:
                continue
            for a in tup[:n]:
                if md.source.parity(a) != 0:
                    raise ValueError("the displayed relations are for even arguments")
            r = morphism_residual(md, tup[:n])
            check.record(not r, f"n={n}: {r}")
    return check


# --- polarization ------------------------------------------------------------------


def polarize(f: Callable, k: int, chart=None):
    """k-linear symmetric map from a nonlinear map on SuperPoly values.

    ``polarize(f, k)(u_1..u_k)`` is the coefficient of ``e_1*...*e_k`` in
    ``f(e_1 u_1 + ... + e_k u_k)``, where e_i is the auxiliary parameter s_i for an
    even u_i and th_i for an odd one (so every e_i u_i is even).  Coefficients are
    extracted by left derivatives in argument order, with the sign of moving each
    e_i past the earlier arguments.  On the diagonal this is k! times the degree-k
    Taylor term of f.  f must be even.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")

    def phi(args):
        args = list(args)
        if len(args) != k:
            raise ValueError(f"expected {k} arguments")
        c = chart or (args[0].chart if args else None)
        if k == 0:
            return f(c.zero())
        if f"s{k}" not in c or f"th{k}" not in c:
            raise ValueError("not enough auxiliary parameters for this arity")
        pars = [a.parity for a in args]
        es = [c[f"th{i + 1}"] if p else c[f"s{i + 1}"] for i, p in enumerate(pars)]
        x = c.zero()
        for e, a in zip(es, args):
            x = x + c(e.name) * a
        val = f(x)
        sign = 1
        for i, e in enumerate(es):
            val = left_derivative(val, e)
            if pars[i] and sum(pars[:i]) % 2:
                sign = -sign
        val = restrict_zero(val, es)
        return val if sign > 0 else -val

    return phi
