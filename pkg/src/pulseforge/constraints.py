"""Hardware parameter constraints and the per-backend amplitude lookup table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from pulseforge.ir import PulseParams

TWO_PI = 2 * math.pi

# Amplitude windows that still give a full oscillation period, per backend.
AMPLITUDE_LUT: dict[str, tuple[float, float]] = {
    "ibmq_guadalupe": (0.1, 0.4),
}


@dataclass(frozen=True)
class ConstraintSpec:
    amplitude_range: tuple[float, float] = (-1.0, 1.0)
    angle_range: tuple[float, float] = (0.0, TWO_PI)
    duration_range: tuple[int, int] = (256, 1024)
    duration_granularity: int = 16
    name: str = "default"

    def __post_init__(self):
        lo, hi = self.amplitude_range
        if not -1.0 <= lo < hi <= 1.0:
            raise ValueError(f"amplitude range must satisfy -1 <= lo < hi <= 1, got {lo, hi}")
        dlo, dhi = self.duration_range
        if dlo > dhi or dlo < 0:
            raise ValueError(f"bad duration range {self.duration_range}")
        if self.duration_granularity < 1:
            raise ValueError("duration granularity must be >= 1")

    def snap_duration(self, duration: float) -> int:
        g = self.duration_granularity
        return int(round(duration / g)) * g

    def duration_grid(self) -> list[int]:
        g = self.duration_granularity
        lo, hi = self.duration_range
        first = -(-lo // g) * g
        return list(range(first, hi + 1, g))


def constraint_spec_for(backend_name: str | None) -> ConstraintSpec:
    """LUT entry for ``backend_name``; unknown names get amplitude [-1, 1]."""
    if backend_name in AMPLITUDE_LUT:
        return ConstraintSpec(amplitude_range=AMPLITUDE_LUT[backend_name], name=backend_name)
    return ConstraintSpec()


@dataclass(frozen=True)
class Violation:
    field: str
    code: str
    value: float
    bound: tuple

    def __str__(self) -> str:
        return f"{self.code}: {self.field}={self.value:g} violates {list(self.bound)}"


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


class ConstraintViolation(ValueError):
    def __init__(self, result: ValidationResult, where: str = ""):
        self.result = result
        msg = "; ".join(str(v) for v in result.violations)
        super().__init__(f"{where}: {msg}" if where else msg)


def validate_params(
    params: PulseParams, spec: ConstraintSpec, pinned_duration: int | None = None
) -> ValidationResult:
    """Check one pulse against ``spec``, reporting every violated bound.

    A duration equal to ``pinned_duration`` (the calibrated pulse length) is
    exempt from the range check but still has to respect the granularity.
    """
    out = ValidationResult()
    lo, hi = spec.amplitude_range
    if not lo <= params.amplitude <= hi:
        out.violations.append(
            Violation("amplitude", "amplitude-out-of-range", params.amplitude, (lo, hi))
        )
    alo, ahi = spec.angle_range
    angle = params.angle % TWO_PI
    if not alo <= angle <= ahi:
        out.violations.append(Violation("angle", "angle-out-of-range", angle, (alo, ahi)))
    g = spec.duration_granularity
    if params.duration % g:
        out.violations.append(
            Violation("duration", "duration-granularity", params.duration, (g,))
        )
    dlo, dhi = spec.duration_range
    if params.duration != pinned_duration and not dlo <= params.duration <= dhi:
        out.violations.append(
            Violation("duration", "duration-out-of-range", params.duration, (dlo, dhi))
        )
    return out
