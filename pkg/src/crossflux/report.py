"""Structured pass/fail result emitted by every numerical checker."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Report:
    """Outcome of one quantitative check.

    `measured` holds the raw numbers the verdict was computed from, so a
    failing report can be inspected without rerunning anything.  `anchor`
    is a stable human-readable identifier of the estimate being checked.
    """

    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: float = 0.0
    anchor: str = ""

    def to_json_dict(self) -> dict:
        clean = {}
        for key, val in self.measured.items():
            clean[key] = float(val)
        return {
            "check": self.name,
            "pass": bool(self.passed),
            "measured": clean,
            "tolerance": float(self.tolerance),
            "paper_anchor": self.anchor,
        }
