"""Outcome records for identity checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .scalars import Backend, Scalar, to_json


@dataclass
class CheckReport:
    """Residuals of a group of identities evaluated on one input."""

    name: str
    residuals: Dict[str, Scalar]
    backend: Backend
    inputs: Dict[str, Any] = field(default_factory=dict)

    @property
    def residual(self) -> Scalar:
        return max((abs(v) for v in self.residuals.values()), default=0)

    @property
    def passed(self) -> bool:
        return all(self.backend.passes(v) for v in self.residuals.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not self.backend.passes(v)]

    def to_dict(self) -> dict:
        return {
            "kind": "check",
            "name": self.name,
            "inputs": self.inputs,
            "backend": self.backend.name,
            "residual": _num(self.backend, self.residual),
            "residuals": {k: _num(self.backend, v) for k, v in self.residuals.items()},
            "pass": self.passed,
        }


@dataclass
class CorrespondenceResult:
    """One correspondence statement reduced to an exact identity."""

    name: str
    config: Dict[str, Any]
    backend: Backend
    eigenvalue: Optional[Scalar] = None
    residual: Scalar = 0
    details: Dict[str, Scalar] = field(default_factory=dict)
    skipped: Optional[str] = None
    # diagnostics reported alongside the verdict but not part of it
    probes: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return self.backend.passes(self.residual) and all(
            self.backend.passes(v) for v in self.details.values()
        )

    def to_dict(self) -> dict:
        out = {
            "kind": "correspondence",
            "name": self.name,
            "inputs": self.config,
            "backend": self.backend.name,
        }
        if self.skipped:
            out["skipped"] = self.skipped
            return out
        out["eigenvalue"] = None if self.eigenvalue is None else _num(self.backend, self.eigenvalue)
        out["residual"] = _num(self.backend, self.residual)
        out["residuals"] = {k: _num(self.backend, v) for k, v in self.details.items()}
        if self.probes:
            out["probes"] = {k: _probe_json(self.backend, v) for k, v in self.probes.items()}
        out["pass"] = self.passed
        return out


def _num(backend: Backend, v):
    return to_json(backend.convert(v))


def _probe_json(backend: Backend, v):
    if isinstance(v, (str, bool)) or v is None:
        return v
    return _num(backend, v)


def max_residual(*values) -> Scalar:
    return max((abs(v) for v in values), default=0)
