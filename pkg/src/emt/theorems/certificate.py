from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckCertificate:
    """Outcome of one numerical check, with the numbers that decided it."""

    name: str
    passed: bool
    witness: dict[str, float] = field(default_factory=dict)
    tolerance: float = 0.0
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "witness", {k: float(v) for k, v in self.witness.items()})

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        wit = ", ".join(f"{k}={v:.6g}" for k, v in self.witness.items())
        return f"[{status}] {self.name}: {wit}" + (f" ({self.notes})" if self.notes else "")


def finite_or(v: float, default: float) -> float:
    return v if math.isfinite(v) else default
