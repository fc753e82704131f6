"""Verification reports: named checks with counts and a witness on failure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    name: str
    checks: int = 0
    failures: int = 0
    witness: Any = None

    @property
    def passed(self):
        return self.failures == 0

    def record(self, ok, witness=None):
        """Count one instance; keep the first failing witness (called if callable)."""
        self.checks += 1
        if not ok:
            self.failures += 1
            if self.witness is None:
                self.witness = witness() if callable(witness) else witness
        return ok

    def bulk(self, total, bad, witness=None):
        self.checks += int(total)
        self.failures += int(bad)
        if bad and self.witness is None:
            self.witness = witness() if callable(witness) else witness

    def to_json(self):
        out = {"name": self.name, "passed": self.passed, "checks": self.checks, "failures": self.failures}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    suite: str
    site: str = ""
    max_degree: int = 0
    results: list = field(default_factory=list)

    def check(self, name):
        for c in self.results:
            if c.name == name:
                return c
        c = Check(name)
        self.results.append(c)
        return c

    def extend(self, other):
        for c in other.results:
            mine = self.check(c.name)
            mine.checks += c.checks
            mine.failures += c.failures
            if mine.witness is None:
                mine.witness = c.witness
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.results)

    @property
    def checks(self):
        return sum(c.checks for c in self.results)

    def __getitem__(self, name):
        for c in self.results:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self):
        return [c.name for c in self.results]

    def to_json(self):
        return {
            "suite": self.suite,
            "site": self.site,
            "max_degree": self.max_degree,
            "passed": self.passed,
            "checks": self.checks,
            "results": [c.to_json() for c in self.results],
        }

    def to_text(self):
        lines = [f"suite {self.suite} site={self.site} D={self.max_degree}"]
        for c in self.results:
            status = "PASS" if c.passed else "FAIL"
            line = f"  {status} {c.name}: {c.checks} checks"
            if not c.passed:
                line += f", {c.failures} failures, witness {c.witness}"
            lines.append(line)
        lines.append(f"{'PASS' if self.passed else 'FAIL'} ({self.checks} checks)")
        return "\n".join(lines)
