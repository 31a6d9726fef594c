"""Search for modular potentials F with delta_rho(P) = d_P(F) on catalog and random data.

Reports, per instance, whether delta_rho(P) vanishes, an F found by linear
algebra over a monomial span, or a certificate that no F exists in that span.
"""
import argparse

from superkoszul.brackets import PStructure, VolumeData, divergence
from superkoszul.corpus import CATALOG, random_function, random_pinfty, rng_for
from superkoszul.mx import solve_modular_potential
from superkoszul.superalg import Chart, to_text


def describe(P, vol, degree):
    mu = divergence(P.P, vol)
    if not mu:
        return "unimodular"
    F = solve_modular_potential(P, vol, degree)
    if F is None:
        return f"no F up to degree {degree}: delta = {to_text(mu)}"
    return f"F = {to_text(F)}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--random", type=int, default=10)
    args = ap.parse_args()

    for inst in CATALOG:
        if not inst.pinfty:
            continue
        c, P, lr, _ = inst.build()
        print(f"{inst.name:24s} {describe(PStructure(P), VolumeData(lr), args.degree)}")
    c = Chart.standard((0, 0, 0))
    for i in range(args.random):
        rng = rng_for(2, f"search{i}")
        P = random_pinfty(c, rng)
        vol = VolumeData(random_function(c, rng, 2, 0))
        print(f"random-{i:<17d} {describe(PStructure(P), vol, args.degree)}")


if __name__ == "__main__":
    main()
