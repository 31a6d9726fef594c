"""Command-line front end: ``superkoszul <suite> --manifest m.json``.

Manifest schema (JSON, version 1)::

    {
      "schema_version": 1,
      "base": [{"name": "x1", "parity": 0}, ...],   # or "parities": [0, 0, 1]
      "P": "x3*xs1*xs2",                            # even multivector in x, xs
      "log_rho": "0",                               # base function
      "F": null,                                    # optional even function of x, xs
      "budgets": {"hbar_order": 4, "momentum_order": 4, "corpus_degree": 2, "corpus_size": 50},
      "seed": 20240611
    }

With named base coordinates ``q`` the fiber generators are ``dxq`` and ``xsq``.

Exit codes: 0 all non-skipped checks pass, 1 some check fails, 2 usage or manifest error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .brackets import VolumeData
from .corpus import DEFAULT_SEED
from .expr import ParseError, parse
from .report import Report
from .suites import SUITES, Budgets, Context, run_checks
from .superalg import Chart, ParityError

EXAMPLE_MANIFEST = Path(__file__).parent / "data" / "example_manifest.json"
MANIFEST_KEYS = {"schema_version", "base", "parities", "P", "log_rho", "F", "budgets", "seed"}


class ManifestError(ValueError):
    pass


@dataclass
class Manifest:
    parities: list
    names: list
    P: str
    log_rho: str = "0"
    F: str | None = None
    budgets: Budgets = field(default_factory=Budgets)
    seed: int = DEFAULT_SEED

    def context(self, seed=None, budgets=None) -> Context:
        chart = Chart.standard(self.parities, self.names)
        P = parse(self.P, chart)
        vol = VolumeData(parse(self.log_rho, chart))
        F = parse(self.F, chart) if self.F else None
        return Context(chart, P, vol, F, self.seed if seed is None else seed, budgets or self.budgets)


def _expr(field_name, text, chart):
    if not isinstance(text, str):
        raise ManifestError(f"{field_name}: expected an expression string")
    try:
        return parse(text, chart)
    except ParseError as e:
        raise ManifestError(f"{field_name}: {e}") from None


def manifest_from_dict(data: dict) -> Manifest:
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")
    unknown = set(data) - MANIFEST_KEYS
    if unknown:
        raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")
    if data.get("schema_version", 1) != 1:
        raise ManifestError(f"unsupported schema_version {data.get('schema_version')!r}")
    if "base" in data:
        base = data["base"]
        if not isinstance(base, list) or not all(isinstance(b, dict) for b in base):
            raise ManifestError("base: expected a list of {name, parity} objects")
        names = [b.get("name") for b in base]
        parities = [b.get("parity") for b in base]
    elif "parities" in data:
        parities = data["parities"]
        names = None
    else:
        raise ManifestError("manifest needs 'base' or 'parities'")
    if not isinstance(parities, list) or not parities or any(p not in (0, 1) for p in parities):
        raise ManifestError("base parities must be a nonempty list of 0/1")
    if names is not None:
        if any(not isinstance(n, str) or not n.isidentifier() for n in names) or len(set(names)) != len(names):
            raise ManifestError("base names must be distinct identifiers")
    try:
        chart = Chart.standard(parities, names)
    except ValueError as e:
        raise ManifestError(f"base: {e}") from None
    if "P" not in data:
        raise ManifestError("manifest needs 'P'")
    P = _expr("P", data["P"], chart)
    mv = list(chart.base) + [chart.xs_of(g) for g in chart.base]
    if not P.depends_only_on(mv):
        raise ManifestError("P must be a function of the base and antifiber coordinates")
    if P.parity_or_none() != 0:
        raise ManifestError("P must be even")
    log_rho = data.get("log_rho", "0")
    lr = _expr("log_rho", log_rho, chart)
    if not lr.depends_only_on(chart.base):
        raise ManifestError("log_rho must depend on base coordinates only")
    if lr.parity_or_none() != 0:
        raise ManifestError("log_rho must be even")
    F = data.get("F")
    if F is not None:
        Fp = _expr("F", F, chart)
        if not Fp.depends_only_on(mv):
            raise ManifestError("F must be a function of the base and antifiber coordinates")
        if Fp.parity_or_none() != 0:
            raise ManifestError("F must be even")
    b = data.get("budgets", {})
    if not isinstance(b, dict):
        raise ManifestError("budgets must be an object")
    allowed = set(Budgets().as_dict())
    if set(b) - allowed:
        raise ManifestError(f"unknown budgets: {sorted(set(b) - allowed)}")
    if any(not isinstance(v, int) or v < 1 for v in b.values()):
        raise ManifestError("budgets must be positive integers")
    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int):
        raise ManifestError("seed must be an integer")
    return Manifest(list(parities), names, data["P"], log_rho, F, Budgets(**b), seed)


def parse_manifest(path) -> Manifest:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ManifestError(f"cannot read manifest: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"JSON syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return manifest_from_dict(data)


def run_suite(m: Manifest, suite: str, seed=None, budgets: Budgets | None = None) -> Report:
    if suite != "all" and suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}")
    ctx = m.context(seed, budgets)
    report = Report(suite, budgets=ctx.budgets.as_dict(), seed=ctx.seed)
    report.extend(run_checks(ctx, suite))
    return report


def build_parser():
    ap = argparse.ArgumentParser(prog="superkoszul", description="Run verification suites on a manifest.")
    ap.add_argument("suite", choices=list(SUITES) + ["all"])
    ap.add_argument("--manifest", required=True, help="JSON manifest path ('example' for the bundled one)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--hbar-order", type=int)
    ap.add_argument("--momentum-order", type=int)
    ap.add_argument("--report", choices=["json", "text"], default="text")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = EXAMPLE_MANIFEST if args.manifest == "example" else args.manifest
    try:
        m = parse_manifest(path)
    except ManifestError as e:
        print(f"superkoszul: manifest error: {e}", file=sys.stderr)
        return 2
    budgets = Budgets(**m.budgets.as_dict())
    for name in ("hbar_order", "momentum_order"):
        v = getattr(args, name)
        if v is not None:
            if v < 1:
                print(f"superkoszul: --{name.replace('_', '-')} must be positive", file=sys.stderr)
                return 2
            setattr(budgets, name, v)
    try:
        report = run_suite(m, args.suite, args.seed, budgets)
    except (ParityError, ValueError) as e:
        print(f"superkoszul: {e}", file=sys.stderr)
        return 2
    if args.report == "json":
        print(report.to_json())
    else:
        print(report.to_text(color=bool(os.environ.get("SUPERKOSZUL_COLOR"))))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
