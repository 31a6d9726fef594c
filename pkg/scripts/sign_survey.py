"""Compare the Koszul bracket on generators with its alternative sign conventions.

For seeded bivectors this prints, per pair (a, b), the computed [x^a, dx^b] and
[dx^a, dx^b] next to P^{ab} and dP^{ab}, and tallies which overall sign each
source of the bracket (generator table, higher Koszul bracket of H_P, classical
2-bracket of Delta_P) agrees with.
"""
import argparse
from collections import Counter

from superkoszul.brackets import PStructure, bivector_coefficient, de_rham, higher_koszul, koszul_binary
from superkoszul.corpus import random_bivector, rng_for
from superkoszul.hbarops import build_Delta_P, classical_bracket
from superkoszul.superalg import Chart, to_text


def classify(got, ref):
    if not ref:
        return "zero"
    if got == ref:
        return "+"
    if got == -ref:
        return "-"
    return "other"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--show", type=int, default=3)
    args = ap.parse_args()

    c = Chart.standard((0,) * args.dim)
    tally = Counter()
    for i in range(args.n):
        P = random_bivector(c, rng_for(1, f"survey{i}"))
        D = build_Delta_P(P)
        for a in c.base:
            for b in c.base:
                Pab = bivector_coefficient(P, a, b)
                x, dxa, dxb = c(a.name), c(c.dx_of(a).name), c(c.dx_of(b).name)
                sources = {
                    "table": (koszul_binary(PStructure(P), x, dxb), koszul_binary(PStructure(P), dxa, dxb)),
                    "H_P": (higher_koszul(P, [x, dxb]), higher_koszul(P, [dxa, dxb])),
                    "Delta_P": (classical_bracket(D, [x, dxb]), classical_bracket(D, [dxa, dxb])),
                }
                for src, (u, v) in sources.items():
                    tally[(src, "[x,dx] vs P^ab", classify(u, Pab))] += 1
                    tally[(src, "[dx,dx] vs dP^ab", classify(v, de_rham(Pab)))] += 1
                if i < args.show and Pab:
                    u, v = sources["table"]
                    print(f"P={to_text(P)}  a={a.name} b={b.name}: [x,dx]={to_text(u)}  P^ab={to_text(Pab)}  "
                          f"[dx,dx]={to_text(v)}  dP^ab={to_text(de_rham(Pab))}")
    print()
    for key in sorted(tally):
        print(*key, tally[key], sep="  ")


if __name__ == "__main__":
    main()
