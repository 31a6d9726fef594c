"""Seeded corpora: random homogeneous polynomials, forms, multivectors, operators,
and catalogs of P-infinity data used by the tests and the CLI."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .expr import parse
from .hbarops import HbarOp, quantize_standard
from .superalg import Chart, Scalar, SuperPoly

DEFAULT_SEED = 20240611


def rng_for(seed: int, label: str) -> random.Random:
    """Independent stream per (seed, label); string seeding is stable across runs."""
    return random.Random(f"{seed}:{label}")


def monomials(chart: Chart, gens, max_degree: int, min_degree: int = 0):
    """All nonvanishing monomials in ``gens`` (odd ones at most once) as SuperPolys."""
    gens = [chart[g] for g in gens]
    out = []
    for d in range(min_degree, max_degree + 1):
        for combo in itertools.combinations_with_replacement(gens, d):
            if any(combo.count(g) > 1 for g in combo if g.parity):
                continue
            m = chart.one()
            for g in combo:
                m = m * chart(g.name)
            if m:
                out.append(m)
    return out


def random_poly(chart: Chart, gens, rng: random.Random, max_degree: int = 3, n_terms: int = 3,
                parity: int | None = 0, coeff_range: int = 3, min_degree: int = 0) -> SuperPoly:
    """Random combination of monomials of the requested parity (None: any)."""
    pool = monomials(chart, gens, max_degree, min_degree)
    if parity is not None:
        pool = [m for m in pool if m.parity == parity]
    if not pool:
        return chart.zero()
    out = chart.zero()
    for m in rng.sample(pool, min(n_terms, len(pool))):
        c = 0
        while c == 0:
            c = rng.randint(-coeff_range, coeff_range)
        out = out + m * c
    return out


def base_gens(chart):
    return [g.name for g in chart.base]


def form_gens(chart):
    return base_gens(chart) + [chart.dx_of(g).name for g in chart.base]


def multivector_gens(chart):
    return base_gens(chart) + [chart.xs_of(g).name for g in chart.base]


def random_function(chart, rng, max_degree=3, parity=0, n_terms=3):
    return random_poly(chart, base_gens(chart), rng, max_degree, n_terms, parity)


def random_form(chart, rng, max_degree=3, parity=0, n_terms=3):
    return random_poly(chart, form_gens(chart), rng, max_degree, n_terms, parity)


def random_multivector(chart, rng, max_degree=3, parity=0, n_terms=3):
    return random_poly(chart, multivector_gens(chart), rng, max_degree, n_terms, parity)


def homogeneous_corpus(make, rng, size: int, parities=(0, 1)):
    """``size`` nonzero samples, parities cycling through ``parities``."""
    out = []
    k = 0
    while len(out) < size:
        f = make(rng, parities[k % len(parities)])
        k += 1
        if f:
            out.append(f)
        if k > 50 * size:
            break
    return out


# --- bivectors and P-infinity structures ------------------------------------------


def random_bivector(chart: Chart, rng: random.Random, coeff_degree: int = 2, density: float = 0.7) -> SuperPoly:
    """Even bivector ``sum_{a<=b} c_ab(x) x*_a x*_b`` with random coefficients (not Poisson in general)."""
    base = list(chart.base)
    out = chart.zero()
    for i, a in enumerate(base):
        for b in base[i:]:
            xa, xb = chart.xs_of(a), chart.xs_of(b)
            mono = chart(xa.name) * chart(xb.name)
            if not mono or rng.random() > density:
                continue
            par = (xa.parity + xb.parity) % 2
            c = random_poly(chart, base_gens(chart), rng, coeff_degree, 2, par)
            out = out + c * mono
    return out


def nambu_bivector(chart: Chart, C: SuperPoly) -> SuperPoly:
    """Poisson bivector ``sum_cyclic dC/dx^k x*_i x*_j`` of a function C on a 3D even base."""
    from .superalg import left_derivative

    if len(chart.base) != 3 or any(g.parity for g in chart.base):
        raise ValueError("Nambu bivectors need a 3-dimensional even base")
    x = list(chart.base)
    out = chart.zero()
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out = out + left_derivative(C, x[k]) * chart(chart.xs_of(x[i]).name) * chart(chart.xs_of(x[j]).name)
    return out


def random_pinfty(chart: Chart, rng: random.Random, curved: bool = False, degree: int = 3) -> SuperPoly:
    """Seeded P-infinity datum on an even base of dimension 1..3.

    dim 1: any function; dim 2: ``f(x) x*_1 x*_2``; dim 3: Nambu bivector of a
    random C, plus ``c C`` when curved (C is a Casimir).
    """
    n = len(chart.base)
    if any(g.parity for g in chart.base):
        raise ValueError("random_pinfty draws even-base data; mixed bases use the catalog")
    if n == 1:
        return random_function(chart, rng, degree, 0)
    if n == 2:
        f = random_function(chart, rng, degree - 1, 0)
        P = f * chart("xs1") * chart("xs2")
        if curved:
            P = P + chart.const(rng.randint(1, 3))
        return P
    if n == 3:
        C = random_function(chart, rng, degree, 0)
        P = nambu_bivector(chart, C)
        if curved:
            P = P + C * rng.choice([-2, -1, 1, 2])
        return P
    raise ValueError("base dimension must be 1, 2 or 3")


@dataclass
class Instance:
    """Named P-infinity datum: chart parities, P, log rho and optional modular potential F."""

    name: str
    parities: tuple
    P: str
    log_rho: str = "0"
    F: str | None = None
    pinfty: bool = True

    def chart(self) -> Chart:
        return Chart.standard(self.parities)

    def build(self, chart=None):
        c = chart or self.chart()
        F = parse(self.F, c) if self.F else None
        return c, parse(self.P, c), parse(self.log_rho, c), F


CATALOG = [
    Instance("constant-bivector-2d", (0, 0), "xs1*xs2"),
    Instance("linear-so3", (0, 0, 0), "x3*xs1*xs2 + x1*xs2*xs3 + x2*xs3*xs1"),
    Instance("bivector-3d", (0, 0, 0), "x3*xs1*xs2"),
    Instance("curved-3d", (0, 0, 0), "x3^2/2 + x3*xs1*xs2"),
    Instance("sum-3d", (0, 0, 0), "x1*xs2*xs3 + x2^2*xs1*xs3"),
    Instance("nonunimodular-volume", (0, 0, 0), "x3*xs1*xs2 + x1*xs2*xs3", log_rho="x3"),
    Instance("modular-obstruction", (0, 0, 0), "x3*xs1*xs2 + x1*x3*xs2*xs3/2"),
    Instance("modular-potential", (0, 0, 0), "x3^2/2 + x3*xs1*xs2", log_rho="x1", F="-xs2*xs3"),
    Instance("mixed-cubic", (0, 0, 1), "xs3^3"),
    Instance("mixed-quartic", (0, 0, 1), "xs1*xs2*xs3^2"),
    Instance("mixed-curved", (0, 0, 1), "x1*xs3^4 + xs3^2"),
    Instance("mixed-two-odd", (0, 1, 1), "xs2^2*xs3^2 + x1*xs2^3"),
    Instance("broken-bivector", (0, 0, 0), "x2*xs1*xs2 + xs2*xs3", pinfty=False),
]


def catalog(name: str) -> Instance:
    for inst in CATALOG:
        if inst.name == name:
            return inst
    raise KeyError(name)


# --- operators ---------------------------------------------------------------------


def random_operator(chart: Chart, gens, rng: random.Random, order: int = 2, coeff_degree: int = 2,
                    parity: int = 0, lower: bool = True) -> HbarOp:
    """hbar-differential operator: standard quantization of a random symbol in ``gens``
    and their momenta, plus an optional hbar times a lower-order operator."""
    coords = [chart[g].name for g in gens]
    moms = [chart.momentum_of(g).name for g in gens]
    out = chart.zero()
    for k in range(0, order + 1):
        mons = monomials(chart, moms, k, k)
        rng.shuffle(mons)
        for m in mons[:2]:
            want = (m.parity + parity) % 2
            c = random_poly(chart, coords, rng, coeff_degree, 2, want)
            out = out + c * m
    A = quantize_standard(out)
    if lower and order > 0:
        B = random_operator(chart, gens, rng, order - 1, coeff_degree, parity, lower=False)
        A = A + B * Scalar.hbar()
    return A
