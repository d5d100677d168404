"""Structured outcomes of identity and residual suites."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["CaseResult", "ResidualReport", "timed_report"]


@dataclass
class CaseResult:
    id: str
    residual: float
    tol: float
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.ok,
            "notes": self.notes,
        }


@dataclass
class ResidualReport:
    suite: str
    cases: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)

    def add(self, id: str, residual: float, tol: float, notes: str = "") -> CaseResult:
        c = CaseResult(id, float(residual), float(tol), notes)
        self.cases.append(c)
        return c

    def add_exact(self, id: str, is_zero: bool, notes: str = "") -> CaseResult:
        # exact symbolic checks report residual 0.0 or 1.0 against tol 0
        return self.add(id, 0.0 if is_zero else 1.0, 0.0, notes)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cases)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.cases), default=0.0)

    def sort_cases(self):
        self.cases.sort(key=lambda c: c.id)

    def to_dict(self) -> dict:
        self.sort_cases()
        return {
            "suite": self.suite,
            "pass": self.ok,
            "n_cases": len(self.cases),
            "max_residual": self.max_residual,
            "cases": [c.to_dict() for c in self.cases],
            "config": self.config,
            "warnings": sorted(self.warnings),
            "wall_time_s": self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str)


class timed_report:
    """Context manager stamping wall time onto a report."""

    def __init__(self, report: ResidualReport):
        self.report = report

    def __enter__(self) -> ResidualReport:
        self._t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time = time.perf_counter() - self._t0
        return False
