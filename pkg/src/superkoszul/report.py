"""Check results and suite reports shared by the verifiers and the CLI."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"
SCHEMA_VERSION = 1


@dataclass
class Check:
    """Outcome of one verification over a corpus."""

    name: str
    status: str = PASS
    cases: int = 0
    failures: int = 0
    witnesses: list[str] = field(default_factory=list)
    reason: str | None = None

    max_witnesses = 3

    def record(self, ok: bool, witness=None):
        self.cases += 1
        if not ok:
            self.failures += 1
            self.status = FAIL
            if witness is not None and len(self.witnesses) < self.max_witnesses:
                self.witnesses.append(str(witness))
        return ok

    def skip(self, reason: str):
        self.status = SKIPPED
        self.reason = reason
        return self

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def as_dict(self):
        d = {"name": self.name, "status": self.status, "cases": self.cases, "failures": self.failures}
        if self.witnesses:
            d["witnesses"] = list(self.witnesses)
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    seed: int | None = None

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks):
        for c in checks:
            self.add(c)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def sorted_checks(self):
        return sorted(self.checks, key=lambda c: c.name)

    def as_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "budgets": dict(sorted(self.budgets.items())),
            "status": PASS if self.ok else FAIL,
            "checks": [c.as_dict() for c in self.sorted_checks()],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)

    def to_text(self, color=False) -> str:
        paint = {PASS: "\x1b[32m", FAIL: "\x1b[31m", SKIPPED: "\x1b[33m"}
        lines = [f"suite: {self.suite}  seed: {self.seed}"]
        if self.budgets:
            lines.append("budgets: " + ", ".join(f"{k}={v}" for k, v in sorted(self.budgets.items())))
        for c in self.sorted_checks():
            tag = c.status.upper()
            if color:
                tag = f"{paint[c.status]}{tag}\x1b[0m"
            line = f"[{tag}] {c.name} ({c.cases} cases, {c.failures} failures)"
            if c.reason:
                line += f" -- {c.reason}"
            lines.append(line)
            for w in c.witnesses:
                lines.append(f"    witness: {w}")
        lines.append(f"result: {PASS if self.ok else FAIL}")
        return "\n".join(lines)
