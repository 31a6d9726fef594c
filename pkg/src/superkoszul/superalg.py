"""Exact Z2-graded polynomial algebra over truncated hbar-series.

A :class:`Chart` fixes an ordered list of named generators with parities.
A :class:`SuperPoly` is a finite sum of terms ``c * i^ph * hbar^h * m`` where
``m`` is a monomial written in chart order, ``c`` is a :class:`fractions.Fraction`
and ``ph`` is 0 or 1 (``i^2 = -1`` is folded into the sign of ``c``).

Monomials are tuples of ``(generator_index, exponent)`` pairs sorted by index;
odd generators never carry an exponent above 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from numbers import Rational
from typing import Iterable, Mapping

EVEN, ODD = 0, 1

ROLES = (
    "base",
    "antifiber",
    "tangent-fiber",
    "base-momentum",
    "antifiber-momentum",
    "tangent-fiber-momentum",
    "auxiliary",
)


class ChartMismatch(ValueError):
    pass


class ParityError(ValueError):
    pass


class NotNilpotent(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    parity: int
    role: str
    order_index: int

    def __str__(self):
        return self.name


class Chart:
    """Ordered generator universe.

    ``pairings`` links a coordinate to its conjugate momentum (used by the
    canonical Poisson bracket and by principal symbols).  ``antifiber`` links
    a base coordinate ``x^a`` to ``x*_a`` and ``tangent`` links it to ``dx^a``.
    """

    def __init__(self, generators, pairings=None, antifiber=None, tangent=None):
        self.generators: tuple[Generator, ...] = tuple(
            Generator(name, int(par) % 2, role, k)
            for k, (name, par, role) in enumerate(generators)
        )
        self._by_name = {g.name: g for g in self.generators}
        if len(self._by_name) != len(self.generators):
            raise ValueError("generator names must be unique")
        for g in self.generators:
            if g.role not in ROLES:
                raise ValueError(f"unknown role {g.role!r} for {g.name}")
        self.odd = tuple(g.parity for g in self.generators)
        self.momentum = self._link(pairings or {}, same_parity=True)
        self.antifiber = self._link(antifiber or {})
        self.tangent = self._link(tangent or {})
        for a, b in self.antifiber.items():
            if self.odd[b] != (self.odd[a] + 1) % 2:
                raise ParityError(f"antifiber of {self.generators[a]} must have flipped parity")
        for a, b in self.tangent.items():
            if self.odd[b] != (self.odd[a] + 1) % 2:
                raise ParityError(f"tangent fiber of {self.generators[a]} must have flipped parity")
        self._mul_cache: dict = {}
        self.base = tuple(g for g in self.generators if g.role == "base")

    def _link(self, mapping, same_parity=False):
        out = {}
        for a, b in mapping.items():
            ia, ib = self[a].order_index, self[b].order_index
            if same_parity and self.odd[ia] != self.odd[ib]:
                raise ParityError(f"{a} and its momentum {b} must share parity")
            if ia in out:
                raise ValueError(f"{a} paired twice")
            out[ia] = ib
        return out

    @classmethod
    def standard(cls, parities, names=None, n_aux=4):
        """Coordinates on the standard bundles over a base with given parities.

        For each base coordinate ``x`` (named ``x1, x2, ...`` unless ``names``
        is given) this creates ``dx`` (tangent fiber), ``xs`` (antifiber x*),
        their odd-fiber dummies ``ud``/``us`` used as integration slots, and
        momenta ``p`` (for x), ``pi`` (for dx), ``ps`` (for x*).  Auxiliary
        even parameters ``t, s1..s{n_aux}`` and odd ones ``th1..th{n_aux}`` come last.
        """
        parities = [int(p) % 2 for p in parities]
        names = list(names) if names is not None else [f"x{k + 1}" for k in range(len(parities))]
        if len(names) != len(parities):
            raise ValueError("names and parities differ in length")
        suffixes = [n[1:] if n.startswith("x") else n for n in names]
        gens = []
        for n, a in zip(names, parities):
            gens.append((n, a, "base"))
        for s, a in zip(suffixes, parities):
            gens.append((f"dx{s}", a + 1, "tangent-fiber"))
        for s, a in zip(suffixes, parities):
            gens.append((f"xs{s}", a + 1, "antifiber"))
        for s, a in zip(suffixes, parities):
            gens.append((f"ud{s}", a + 1, "auxiliary"))
        for s, a in zip(suffixes, parities):
            gens.append((f"us{s}", a + 1, "auxiliary"))
        for s, a in zip(suffixes, parities):
            gens.append((f"p{s}", a, "base-momentum"))
        for s, a in zip(suffixes, parities):
            gens.append((f"pi{s}", a + 1, "tangent-fiber-momentum"))
        for s, a in zip(suffixes, parities):
            gens.append((f"ps{s}", a + 1, "antifiber-momentum"))
        gens.append(("t", 0, "auxiliary"))
        for k in range(n_aux):
            gens.append((f"s{k + 1}", 0, "auxiliary"))
        for k in range(n_aux):
            gens.append((f"th{k + 1}", 1, "auxiliary"))
        pairings = {}
        for n, s in zip(names, suffixes):
            pairings[n] = f"p{s}"
            pairings[f"dx{s}"] = f"pi{s}"
            pairings[f"xs{s}"] = f"ps{s}"
        chart = cls(
            gens,
            pairings=pairings,
            antifiber={n: f"xs{s}" for n, s in zip(names, suffixes)},
            tangent={n: f"dx{s}" for n, s in zip(names, suffixes)},
        )
        chart.suffixes = suffixes
        return chart

    def __getitem__(self, name) -> Generator:
        if isinstance(name, Generator):
            if self.generators[name.order_index] != name:
                raise ChartMismatch(f"{name} is not a generator of this chart")
            return name
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def __contains__(self, name):
        return name in self._by_name

    def __len__(self):
        return len(self.generators)

    def index(self, g) -> int:
        return self[g].order_index

    def names(self, role=None):
        return [g.name for g in self.generators if role is None or g.role == role]

    def by_role(self, role):
        return [g for g in self.generators if g.role == role]

    # convenient views over the standard layout
    def xs_of(self, g) -> Generator:
        return self.generators[self.antifiber[self.index(g)]]

    def dx_of(self, g) -> Generator:
        return self.generators[self.tangent[self.index(g)]]

    def momentum_of(self, g) -> Generator:
        return self.generators[self.momentum[self.index(g)]]

    def __call__(self, name) -> "SuperPoly":
        """The generator ``name`` as a SuperPoly."""
        g = self[name]
        return SuperPoly(self, {(((g.order_index, 1),), 0, 0): Fraction(1)})

    def one(self) -> "SuperPoly":
        return SuperPoly(self, {((), 0, 0): Fraction(1)})

    def zero(self) -> "SuperPoly":
        return SuperPoly(self, {})

    def const(self, value) -> "SuperPoly":
        if isinstance(value, Scalar):
            return SuperPoly(self, {((), h, ph): c for (h, ph), c in value.terms.items()})
        return SuperPoly(self, {((), 0, 0): Fraction(value)}) if value else self.zero()

    def mono_mul(self, a, b):
        """Product of two monomials: ``(sign, monomial)`` or ``None`` if it vanishes."""
        if not a:
            return 1, b
        if not b:
            return 1, a
        key = (a, b)
        hit = self._mul_cache.get(key)
        if hit is not None or key in self._mul_cache:
            return hit
        odd = self.odd
        sign = 1
        res = None
        odd_a = [i for i, _ in a if odd[i]]
        ok = True
        if odd_a:
            for j, _ in b:
                if odd[j]:
                    for i in odd_a:
                        if i == j:
                            ok = False
                            break
                        if i > j:
                            sign = -sign
                    if not ok:
                        break
        if ok:
            d = dict(a)
            for j, e in b:
                d[j] = d.get(j, 0) + e
            res = (sign, tuple(sorted(d.items())))
        self._mul_cache[key] = res
        return res

    def mono_parity(self, m) -> int:
        odd = self.odd
        return sum(odd[i] for i, _ in m) % 2


def _scalar_mul(h1, p1, c1, h2, p2, c2):
    ph = p1 + p2
    c = c1 * c2
    if ph == 2:
        ph = 0
        c = -c
    return h1 + h2, ph, c


class Scalar:
    """Exact coefficient: a finite series in hbar with Gaussian-rational terms.

    ``terms`` maps ``(hbar_exponent, i_phase)`` with ``i_phase`` in {0, 1} to a
    Fraction; higher powers of i are folded (i^2 = -1).  ``hbar_truncation``
    drops every exponent above the bound.
    """

    __slots__ = ("terms", "hbar_truncation")

    def __init__(self, terms=None, hbar_truncation=None):
        self.hbar_truncation = hbar_truncation
        self.terms = {}
        for (h, ph), c in (terms or {}).items():
            ph %= 4
            if ph >= 2:
                ph -= 2
                c = -c
            if hbar_truncation is not None and h > hbar_truncation:
                continue
            c = Fraction(c)
            if c:
                k = (h, ph)
                v = self.terms.get(k, 0) + c
                if v:
                    self.terms[k] = v
                else:
                    self.terms.pop(k, None)

    @classmethod
    def of(cls, value):
        if isinstance(value, Scalar):
            return value
        return cls({(0, 0): Fraction(value)})

    @classmethod
    def hbar(cls, power=1):
        return cls({(power, 0): 1})

    @classmethod
    def i(cls):
        return cls({(0, 1): 1})

    def _trunc(self, other):
        bounds = [b for b in (self.hbar_truncation, getattr(other, "hbar_truncation", None)) if b is not None]
        return min(bounds) if bounds else None

    def __add__(self, other):
        other = Scalar.of(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return Scalar(t, self._trunc(other))

    __radd__ = __add__

    def __neg__(self):
        return Scalar({k: -c for k, c in self.terms.items()}, self.hbar_truncation)

    def __sub__(self, other):
        return self + (-Scalar.of(other))

    def __rsub__(self, other):
        return Scalar.of(other) - self

    def __mul__(self, other):
        if isinstance(other, SuperPoly):
            return NotImplemented
        other = Scalar.of(other)
        t: dict = {}
        for (h1, p1), c1 in self.terms.items():
            for (h2, p2), c2 in other.terms.items():
                h, ph, c = _scalar_mul(h1, p1, c1, h2, p2, c2)
                t[(h, ph)] = t.get((h, ph), 0) + c
        return Scalar(t, self._trunc(other))

    __rmul__ = __mul__

    def inverse(self):
        if len(self.terms) != 1:
            raise ZeroDivisionError("only single-term scalars are invertible")
        ((h, ph), c), = self.terms.items()
        # (c i^ph hbar^h)^-1 = c^-1 i^-ph hbar^-h ; i^-1 = -i
        return Scalar({(-h, ph): (1 / c) * (-1 if ph else 1)})

    def __truediv__(self, other):
        return self * Scalar.of(other).inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Scalar.of(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar.of(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def min_hbar(self):
        return min((h for h, _ in self.terms), default=None)

    def __repr__(self):
        return f"Scalar({_format_terms([(((), h, ph), c) for (h, ph), c in sorted(self.terms.items())], None)})"


HBAR = Scalar.hbar()
I = Scalar.i()
MINUS_I_HBAR = Scalar({(1, 1): -1})


def _coerce_scalar_terms(value):
    if isinstance(value, Scalar):
        return value.terms
    if isinstance(value, (int, Fraction)) or isinstance(value, Rational):
        return {(0, 0): Fraction(value)}
    raise TypeError(f"cannot use {type(value).__name__} as a scalar")


class SuperPoly:
    """Canonical Z2-graded polynomial with Scalar coefficients."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping | None = None):
        self.chart = chart
        self.terms = {k: v for k, v in (terms or {}).items() if v}
        self._hash = None

    # --- construction helpers -------------------------------------------------
    @staticmethod
    def _accumulate(acc, key, c):
        v = acc.get(key, 0) + c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)

    def _check(self, other):
        if other.chart is not self.chart:
            raise ChartMismatch("operands live on different charts")

    def _lift(self, other):
        if isinstance(other, SuperPoly):
            self._check(other)
            return other
        return self.chart.const(Scalar.of(other))

    # --- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            self._accumulate(t, k, c)
        return SuperPoly(self.chart, t)

    __radd__ = __add__

    def __neg__(self):
        return SuperPoly(self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, SuperPoly):
            terms = _coerce_scalar_terms(other)
            out: dict = {}
            for (m, h1, p1), c1 in self.terms.items():
                for (h2, p2), c2 in terms.items():
                    h, ph, c = _scalar_mul(h1, p1, c1, h2, p2, c2)
                    self._accumulate(out, (m, h, ph), c)
            return SuperPoly(self.chart, out)
        return mul(self, other)

    def __rmul__(self, other):
        # scalars are even, so left and right scalar multiplication agree
        return self.__mul__(other)

    def __truediv__(self, other):
        return self * Scalar.of(other).inverse()

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are only defined for scalars")
        if n >= 2 and self.parity_or_none() == ODD:
            raise ParityError("integer powers are only defined for even elements")
        out = self.chart.one()
        for _ in range(n):
            out = out * self
        return out

    # --- comparisons ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, SuperPoly):
            return self.chart is other.chart and self.terms == other.terms
        if isinstance(other, (int, Fraction, Scalar)):
            return self.terms == self.chart.const(Scalar.of(other)).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    # --- inspection ------------------------------------------------------------
    def parity_or_none(self):
        ps = {self.chart.mono_parity(m) for (m, _, _) in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else EVEN

    @property
    def parity(self) -> int:
        p = self.parity_or_none()
        if p is None:
            raise ParityError("inhomogeneous element has no parity")
        return p

    def homogeneous_parts(self) -> dict[int, "SuperPoly"]:
        parts: dict[int, dict] = {0: {}, 1: {}}
        for k, c in self.terms.items():
            parts[self.chart.mono_parity(k[0])][k] = c
        return {p: SuperPoly(self.chart, t) for p, t in parts.items() if t}

    def generators_used(self) -> set[Generator]:
        return {self.chart.generators[i] for (m, _, _) in self.terms for i, _ in m}

    def depends_only_on(self, gens) -> bool:
        allowed = {self.chart.index(g) for g in gens}
        return all(i in allowed for (m, _, _) in self.terms for i, _ in m)

    def has_body(self) -> bool:
        """True if some monomial contains no odd generator."""
        odd = self.chart.odd
        return any(not any(odd[i] for i, _ in m) for (m, _, _) in self.terms)

    def coeff(self, monomial) -> Scalar:
        out: dict = {}
        for (m, h, ph), c in self.terms.items():
            if m == monomial:
                out[(h, ph)] = c
        return Scalar(out)

    def monomials(self) -> set:
        return {m for (m, _, _) in self.terms}

    def hbar_range(self):
        hs = [h for (_, h, _) in self.terms]
        return (min(hs), max(hs)) if hs else (0, 0)

    def hbar_part(self, k: int) -> "SuperPoly":
        """Coefficient of hbar^k (an hbar-free SuperPoly)."""
        return SuperPoly(self.chart, {(m, 0, ph): c for (m, h, ph), c in self.terms.items() if h == k})

    def truncate_hbar(self, order: int) -> "SuperPoly":
        return SuperPoly(self.chart, {k: c for k, c in self.terms.items() if k[1] <= order})

    def mod_hbar(self) -> "SuperPoly":
        """Reduction mod hbar; negative hbar powers are an error."""
        lo, _ = self.hbar_range()
        if lo < 0:
            raise ValueError("negative hbar powers survive reduction mod hbar")
        return self.hbar_part(0)

    def degree_in(self, gens) -> dict[int, "SuperPoly"]:
        """Split by total degree in the given generators."""
        idx = {self.chart.index(g) for g in gens}
        parts: dict[int, dict] = {}
        for k, c in self.terms.items():
            d = sum(e for i, e in k[0] if i in idx)
            parts.setdefault(d, {})[k] = c
        return {d: SuperPoly(self.chart, t) for d, t in sorted(parts.items())}

    def max_degree_in(self, gens) -> int:
        parts = self.degree_in(gens)
        return max(parts) if parts else 0

    def map_coefficients(self, fn) -> "SuperPoly":
        return SuperPoly(self.chart, {k: fn(c) for k, c in self.terms.items()})

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"SuperPoly({to_text(self)})"


# --- operations -----------------------------------------------------------------


def mul(a: SuperPoly, b: SuperPoly) -> SuperPoly:
    if a.chart is not b.chart:
        raise ChartMismatch("operands live on different charts")
    chart = a.chart
    out: dict = {}
    mm = chart.mono_mul
    for (m1, h1, p1), c1 in a.terms.items():
        for (m2, h2, p2), c2 in b.terms.items():
            r = mm(m1, m2)
            if r is None:
                continue
            sign, m = r
            h, ph, c = _scalar_mul(h1, p1, c1, h2, p2, c2)
            SuperPoly._accumulate(out, (m, h, ph), c if sign > 0 else -c)
    return SuperPoly(chart, out)


def _mono_derivative(chart: Chart, m, gi):
    """Left derivative of a monomial by generator ``gi``: ``(factor, monomial)`` or None."""
    odd = chart.odd
    sign = 1
    for pos, (i, e) in enumerate(m):
        if i == gi:
            if odd[i]:
                rest = m[:pos] + m[pos + 1:]
                return sign, rest
            rest = m[:pos] + (((i, e - 1),) if e > 1 else ()) + m[pos + 1:]
            return e, rest
        if odd[i] and odd[gi]:
            sign = -sign
    return None


def left_derivative(f: SuperPoly, g) -> SuperPoly:
    chart = f.chart
    gi = chart.index(g)
    out: dict = {}
    for (m, h, ph), c in f.terms.items():
        r = _mono_derivative(chart, m, gi)
        if r is None:
            continue
        factor, rest = r
        SuperPoly._accumulate(out, (rest, h, ph), c * factor)
    return SuperPoly(chart, out)


def substitute(f: SuperPoly, assignment: Mapping) -> SuperPoly:
    """Simultaneous substitution of generators by SuperPoly values.

    Each value must be homogeneous of the same parity as the generator it replaces
    (the zero element is accepted for any generator).
    """
    chart = f.chart
    table: dict[int, SuperPoly] = {}
    for g, v in assignment.items():
        gen = chart[g]
        if not isinstance(v, SuperPoly):
            v = chart.const(Scalar.of(v))
        if v.chart is not chart:
            raise ChartMismatch("substituted value lives on another chart")
        if v and v.parity_or_none() != gen.parity:
            raise ParityError(f"value for {gen.name} must have parity {gen.parity}")
        table[gen.order_index] = v
    if not table:
        return f
    powers: dict = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = table[i] ** e if e > 1 else table[i]
        return powers[key]

    out = chart.zero()
    acc: dict = {}
    # group terms by the substituted part of the monomial
    for (m, h, ph), c in f.terms.items():
        fixed = tuple((i, e) for i, e in m if i not in table)
        if len(fixed) == len(m):
            SuperPoly._accumulate(acc, (m, h, ph), c)
            continue
        prod = SuperPoly(chart, {((), h, ph): c})
        for i, e in m:
            if i in table:
                prod = prod * power(i, e)
            else:
                prod = prod * SuperPoly(chart, {(((i, e),), 0, 0): Fraction(1)})
            if not prod:
                break
        out = out + prod
    return out + SuperPoly(chart, acc)


def restrict_zero(f: SuperPoly, gens) -> SuperPoly:
    """Set the given generators to zero."""
    chart = f.chart
    idx = {chart.index(g) for g in gens}
    return SuperPoly(chart, {k: c for k, c in f.terms.items() if not any(i in idx for i, _ in k[0])})


def berezin_integral(f: SuperPoly, gens) -> SuperPoly:
    """Iterated Berezin integral; ``∫Dθ θ = 1``, the last measure acts first.

    ``berezin_integral(f, [a, b])`` is ``∫Da Db f = ∂_a(∂_b f)`` with left
    derivatives.
    """
    chart = f.chart
    gens = [chart[g] for g in gens]
    for g in gens:
        if g.parity != ODD:
            raise ParityError(f"Berezin integration over even generator {g.name}")
    for g in reversed(gens):
        f = left_derivative(f, g)
    return f


def exp_nilpotent(f: SuperPoly, max_order: int | None = None) -> SuperPoly:
    """``sum f^k / k!``, terminating by nilpotence or at ``max_order``."""
    chart = f.chart
    if f.has_body() and max_order is None:
        raise NotNilpotent("argument has a nonzero body; pass max_order to truncate")
    if f.parity_or_none() == ODD:
        return chart.one() + f
    out = chart.one()
    term = chart.one()
    k = 0
    while True:
        k += 1
        if max_order is not None and k > max_order:
            break
        term = term * f * Fraction(1, k)
        if not term:
            break
        out = out + term
        if max_order is None and k > 4 * len(chart) + 8:
            raise NotNilpotent("exponential series did not terminate")
    return out


# --- text form -------------------------------------------------------------------


def _format_coeff(c: Fraction, h: int, ph: int):
    parts = []
    if ph:
        parts.append("i")
    if h == 1:
        parts.append("hbar")
    elif h:
        parts.append(f"hbar^{h}")
    return c, parts


def _format_terms(items, chart):
    if not items:
        return "0"
    out = []
    for (m, h, ph), c in items:
        c, parts = _format_coeff(c, h, ph)
        for i, e in m:
            name = chart.generators[i].name
            parts.append(name if e == 1 else f"{name}^{e}")
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if parts:
            body = "*".join(parts)
            text = body if a == 1 else f"{a}*{body}"
        else:
            text = str(a)
        out.append((sign, text))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, text in out[1:]:
        s += f" {sign} {text}"
    return s


def sort_key(key):
    m, h, ph = key
    return (sum(e for _, e in m), m, h, ph)


def to_text(f: SuperPoly) -> str:
    """Deterministic, order-stable text form (parsable by :func:`superkoszul.expr.parse`)."""
    items = sorted(f.terms.items(), key=lambda kv: sort_key(kv[0]))
    return _format_terms(items, f.chart)


def gens(chart: Chart, names: Iterable[str]) -> list[SuperPoly]:
    return [chart(n) for n in names]


def koszul_sign_swap(pa: int, pb: int) -> int:
    return -1 if (pa & pb) else 1


def inv_factorial(k: int) -> Fraction:
    return Fraction(1, factorial(k))
