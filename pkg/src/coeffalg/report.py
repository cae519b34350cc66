from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class VerificationReport:
    """Outcome of a verification routine.

    ``residuals`` holds the gating quantities: for an applicable report the
    verdict is true iff every residual is at most ``eq_tol``.  ``info`` holds
    diagnostic values that do not gate the verdict (unitality, ranks, minimum
    eigenvalues, ...).  ``witnesses`` maps a residual name to the basis
    indices at which the maximum was attained.
    """

    verdict: bool
    residuals: dict[str, float] = field(default_factory=dict)
    witnesses: dict[str, tuple] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    applicable: bool = True

    @classmethod
    def from_residuals(cls, residuals, eq_tol, **kwargs) -> "VerificationReport":
        residuals = {k: float(v) for k, v in residuals.items()}
        verdict = all(v <= eq_tol for v in residuals.values())
        return cls(verdict=verdict, residuals=residuals, **kwargs)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failed(self, eq_tol) -> list[str]:
        return [k for k, v in self.residuals.items() if v > eq_tol]

    def merge(self, other: "VerificationReport", prefix: str) -> None:
        """Fold another report's residuals/witnesses/info in under ``prefix``."""
        for k, v in other.residuals.items():
            self.residuals[f"{prefix}.{k}"] = v
        for k, v in other.witnesses.items():
            self.witnesses[f"{prefix}.{k}"] = v
        for k, v in other.info.items():
            self.info[f"{prefix}.{k}"] = v
        self.errors.extend(f"{prefix}: {e}" for e in other.errors)

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "verdict": self.verdict,
            "residuals": dict(self.residuals),
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
            "info": dict(self.info),
            "errors": list(self.errors),
        }
