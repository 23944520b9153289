"""Structured evidence returned by every check."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import CoarseError


class InvariantError(CoarseError, AssertionError):
    """An internal consistency guarantee was broken."""


@dataclass(frozen=True)
class Evidence:
    """One claim with the concrete tuple and values that support or refute it."""

    claim: str
    witness: tuple = ()
    values: tuple = ()


@dataclass
class CheckReport:
    name: str
    passed: bool
    evidence: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not self.passed and not self.evidence:
            raise InvariantError(f"{self.name}: failing report without a witness")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "verdict": self.verdict,
            "evidence": [jsonable(e) for e in self.evidence],
            "counts": dict(sorted(self.counts.items())),
            "notes": list(self.notes),
        }


class EvidenceLog:
    """Collects evidence up to a cap while counting every violation."""

    def __init__(self, max_evidence: int | None = 1000):
        self.items: list = []
        self.total = 0
        self.max_evidence = max_evidence

    def add(self, claim: str, witness: tuple = (), values: tuple = ()) -> None:
        self.total += 1
        if self.max_evidence is None or len(self.items) < self.max_evidence:
            self.items.append(Evidence(claim, tuple(witness), tuple(values)))

    @property
    def truncated(self) -> bool:
        return self.total > len(self.items)


def jsonable(obj: Any) -> Any:
    """Convert library values to plain JSON data with exact rational strings."""
    # local import keeps reports free of a hard cycle with model
    from .model import Atom, LatticePoint, VectorPoint, format_rational

    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, LatticePoint):
        return [obj.a, obj.b]
    if isinstance(obj, VectorPoint):
        return [format_rational(c) for c in obj.coords]
    if isinstance(obj, Atom):
        return obj.id
    if isinstance(obj, Evidence):
        return {"claim": obj.claim, "witness": jsonable(obj.witness), "values": jsonable(obj.values)}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return repr(obj)
