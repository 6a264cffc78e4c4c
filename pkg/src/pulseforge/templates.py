"""Parameterized pulse templates and the common ansatz interface.

Pulse ids 1-6 are three template families, each with a fixed-CR-amplitude
twin:

=====  =============  ===========================  ============
id     name           per layer                    params / L
=====  =============  ===========================  ============
1 / 2  HE             N two-param SQPs, CR chain   5N-3 / 4N-2
3 / 4  DECAY          N three-param SQPs, CR chain 6N-3 / 5N-2
5 / 6  BLOCK          dressed-CR blocks, shared    9N-7 / 8N-6
                      dressing on the common qubit
=====  =============  ===========================  ============

Ids 7-12 (``RAND_k``) are random layouts with the parameter and CR budget of
id ``k-6``. Gate baselines share the same interface so every metric accepts
either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from pulseforge import gates
from pulseforge.constraints import ConstraintSpec, ConstraintViolation, validate_params
from pulseforge.device import DeviceModel, device_for
from pulseforge.ir import Channel, Envelope, Instruction, PulseParams, Schedule, pulse_depth
from pulseforge.sim import EFFECTIVE, PropagationLevel, cr_envelope, evolve_schedule, schedule_unitary

TWO_PI = 2 * math.pi

FAMILY_IDS = {
    1: "HE",
    2: "HE_fixCR",
    3: "DECAY",
    4: "DECAY_fixCR",
    5: "BLOCK",
    6: "BLOCK_fixCR",
    **{k: f"RAND_{k}" for k in range(7, 13)},
}
NAME_TO_ID = {v: k for k, v in FAMILY_IDS.items()}
STRUCTURAL = ("DRESSED_2Q", "BLOCKPULSE_2Q", "PULSE_1Q")
PULSE_TEMPLATES = tuple(FAMILY_IDS.values()) + STRUCTURAL
ALL_TEMPLATES = PULSE_TEMPLATES + gates.GATE_BASELINES

FIXABLE_FIELDS = frozenset({"cr_amplitude", "cr_angle", "cr_duration", "sqp_duration"})
PULSE_FIELDS = ("amplitude", "angle", "duration")

# (params per layer, depth per layer) as functions of N
_TABLE = {
    1: (lambda n: 5 * n - 3, lambda n: n),
    2: (lambda n: 2 * (2 * n - 1), lambda n: n),
    3: (lambda n: 6 * n - 3, lambda n: 4),
    4: (lambda n: 5 * n - 2, lambda n: 4),
    5: (lambda n: 9 * n - 7, lambda n: 2 * n - 1),
    6: (lambda n: 8 * n - 6, lambda n: 2 * n - 1),
}


class TemplateError(ValueError):
    pass


def canonical_template_id(template) -> str:
    """Accept ``3``, ``"3"``, ``"DECAY"`` or ``"decay"``; return the canonical name."""
    if isinstance(template, (int, np.integer)) or (isinstance(template, str) and template.isdigit()):
        k = int(template)
        if k not in FAMILY_IDS:
            raise TemplateError(f"unknown pulse id {k}")
        return FAMILY_IDS[k]
    if not isinstance(template, str):
        raise TemplateError(f"unknown template {template!r}")
    by_upper = {name.upper(): name for name in ALL_TEMPLATES}
    try:
        return by_upper[template.upper()]
    except KeyError:
        raise TemplateError(f"unknown template {template!r}") from None


@dataclass(frozen=True)
class TemplateSpec:
    id: str
    n_qubits: int
    n_layers: int = 1
    fixed_fields: frozenset = field(default_factory=frozenset)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "id", canonical_template_id(self.id))
        object.__setattr__(self, "fixed_fields", frozenset(self.fixed_fields))
        unknown = self.fixed_fields - FIXABLE_FIELDS
        if unknown:
            raise TemplateError(f"cannot fix {sorted(unknown)}; choose from {sorted(FIXABLE_FIELDS)}")
        if self.n_qubits < 1 or self.n_layers < 1:
            raise TemplateError("n_qubits and n_layers must be >= 1")
        if self.is_random and self.seed is None:
            object.__setattr__(self, "seed", 0)
        needs_pairs = self.family_id is not None or self.id in ("DRESSED_2Q", "BLOCKPULSE_2Q")
        if needs_pairs and self.n_qubits < 2:
            raise TemplateError(f"{self.id} needs at least two qubits")
        if self.id in ("DRESSED_2Q", "BLOCKPULSE_2Q") and self.n_qubits != 2:
            raise TemplateError(f"{self.id} is a two-qubit template")

    @property
    def family_id(self) -> int | None:
        return NAME_TO_ID.get(self.id)

    @property
    def is_gate(self) -> bool:
        return self.id in gates.GATE_BASELINES

    @property
    def is_random(self) -> bool:
        return self.id.startswith("RAND_")

    @property
    def match_id(self) -> int | None:
        return self.family_id - 6 if self.is_random else None

    @property
    def effective_fixed_fields(self) -> frozenset:
        fid = self.match_id if self.is_random else self.family_id
        if fid in (2, 4, 6):
            return self.fixed_fields | {"cr_amplitude"}
        return self.fixed_fields

    @property
    def label(self) -> str:
        if not self.fixed_fields:
            return self.id
        return self.id + "".join(f"+fix_{f}" for f in sorted(self.fixed_fields))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "n_qubits": self.n_qubits,
            "n_layers": self.n_layers,
            "fixed_fields": sorted(self.fixed_fields),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> TemplateSpec:
        return cls(
            data["id"],
            data["n_qubits"],
            data.get("n_layers", 1),
            frozenset(data.get("fixed_fields", ())),
            data.get("seed"),
        )


@dataclass(frozen=True)
class PulseSlot:
    """One pulse of a template; ``free`` lists the fields taken from theta."""

    kind: str
    qubits: tuple[int, ...]
    free: tuple[str, ...]


@dataclass(frozen=True)
class ParamSlot:
    op: int
    kind: str
    field: str


@dataclass
class ParameterVector:
    values: np.ndarray
    layout: tuple[ParamSlot, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.layout),):
            raise ValueError("parameter vector length does not match its layout")

    def __len__(self) -> int:
        return len(self.layout)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


# -- blueprints ---------------------------------------------------------------


def _free(kind: str, fixed: frozenset, arity: int = 3) -> tuple[str, ...]:
    if kind == "sqp":
        fields = PULSE_FIELDS[:arity]
        if "sqp_duration" in fixed:
            fields = tuple(f for f in fields if f != "duration")
        return fields
    return tuple(f for f in PULSE_FIELDS if f"cr_{f}" not in fixed)


def _he_layer(n, fixed, sqp_arity):
    ops = [PulseSlot("sqp", (q,), _free("sqp", fixed, sqp_arity)) for q in range(n)]
    ops += [PulseSlot("cr", (q, q + 1), _free("cr", fixed)) for q in range(n - 1)]
    return ops


def _block_layer(n, fixed):
    sqp = _free("sqp", fixed, 2)
    cr = _free("cr", fixed)
    ops = [
        PulseSlot("sqp", (0,), sqp),
        PulseSlot("sqp", (1,), sqp),
        PulseSlot("cr", (0, 1), cr),
        PulseSlot("sqp", (0,), sqp),
        PulseSlot("sqp", (1,), sqp),
    ]
    # later blocks reuse the previous block's dressing on the shared qubit
    for q in range(1, n - 1):
        ops += [
            PulseSlot("sqp", (q + 1,), sqp),
            PulseSlot("cr", (q, q + 1), cr),
            PulseSlot("sqp", (q,), sqp),
            PulseSlot("sqp", (q + 1,), sqp),
        ]
    return ops


def _blockpulse_2q(fixed):
    sqp = _free("sqp", fixed, 2)
    cr = _free("cr", fixed)
    column = [PulseSlot("sqp", (0,), sqp), PulseSlot("sqp", (1,), sqp)]
    return column + [PulseSlot("cr", (0, 1), cr)] + column + [PulseSlot("cr", (0, 1), cr)] + column


def _random_blueprint(spec: TemplateSpec) -> list[PulseSlot]:
    n, layers = spec.n_qubits, spec.n_layers
    rng = np.random.default_rng(spec.seed)
    match = TemplateSpec(FAMILY_IDS[spec.match_id], n, layers, spec.fixed_fields)
    total = len(parameter_layout(match))
    fixed = spec.effective_fixed_fields
    cr_free = _free("cr", fixed)
    n_cr = (n - 1) * layers
    budget = total - n_cr * len(cr_free)
    # budget = 2a + 3b with a, b >= 0
    choices = [b for b in range(budget // 3 + 1) if (budget - 3 * b) % 2 == 0]
    assert choices, f"infeasible SQP budget {budget}"
    n3 = int(rng.choice(choices))
    n2 = (budget - 3 * n3) // 2
    ops = [PulseSlot("cr", (int(q), int(q) + 1), cr_free) for q in rng.integers(0, n - 1, size=n_cr)]
    ops += [PulseSlot("sqp", (int(q),), PULSE_FIELDS[:2]) for q in rng.integers(0, n, size=n2)]
    ops += [PulseSlot("sqp", (int(q),), PULSE_FIELDS) for q in rng.integers(0, n, size=n3)]
    order = rng.permutation(len(ops))
    return [ops[i] for i in order]


@lru_cache(maxsize=1024)
def blueprint(spec: TemplateSpec) -> tuple[PulseSlot, ...]:
    """Ordered pulse slots of a pulse template (empty for gate baselines)."""
    if spec.is_gate:
        return ()
    n, fixed = spec.n_qubits, spec.effective_fixed_fields
    if spec.is_random:
        return tuple(_random_blueprint(spec))
    layer: list[PulseSlot]
    fid = spec.family_id
    if fid in (1, 2):
        layer = _he_layer(n, fixed, 2)
    elif fid in (3, 4):
        layer = _he_layer(n, fixed, 3)
    elif fid in (5, 6) or spec.id == "DRESSED_2Q":
        layer = _block_layer(n, fixed)
    elif spec.id == "BLOCKPULSE_2Q":
        layer = _blockpulse_2q(fixed)
    elif spec.id == "PULSE_1Q":
        layer = [PulseSlot("sqp", (q,), _free("sqp", fixed, 2)) for q in range(n)]
    else:
        raise TemplateError(f"no blueprint for {spec.id}")
    return tuple(layer * spec.n_layers)


@lru_cache(maxsize=1024)
def parameter_layout(spec: TemplateSpec) -> tuple[ParamSlot, ...]:
    if spec.is_gate:
        ops = gates.gate_ops(spec.id, spec.n_qubits)
        return tuple(ParamSlot(i, "gate", "angle") for i, op in enumerate(ops) if op.param is not None)
    return tuple(
        ParamSlot(i, slot.kind, f) for i, slot in enumerate(blueprint(spec)) for f in slot.free
    )


def n_params(spec: TemplateSpec) -> int:
    return len(parameter_layout(spec))


def n_cr(spec: TemplateSpec) -> int:
    return sum(slot.kind == "cr" for slot in blueprint(spec))


def param_count(template, n_qubits: int, n_layers: int = 1) -> tuple[int, int, int]:
    """Cost-table formulas for pulse ids 1-6: ``(n_params, n_cr, depth)``."""
    fid = NAME_TO_ID.get(canonical_template_id(template))
    if fid not in _TABLE:
        raise TemplateError(f"no cost formula for template {template!r}")
    if n_qubits < 2 or n_layers < 1:
        raise TemplateError("cost formulas need N >= 2 and L >= 1")
    params, depth = _TABLE[fid]
    return params(n_qubits) * n_layers, (n_qubits - 1) * n_layers, depth(n_qubits) * n_layers


def random_pulse_template(match_id: int, n_qubits: int, n_layers: int = 1, seed: int = 0) -> TemplateSpec:
    if match_id not in range(1, 7):
        raise TemplateError(f"match_id must be in 1..6, got {match_id}")
    return TemplateSpec(f"RAND_{match_id + 6}", n_qubits, n_layers, seed=seed)


# -- parameters -----------------------------------------------------------------


def parameter_bounds(spec: TemplateSpec, constraints: ConstraintSpec | None = None):
    """Lower/upper bound arrays; angles span [0, 2pi)."""
    c = constraints or ConstraintSpec()
    lo, hi = [], []
    for slot in parameter_layout(spec):
        if slot.field == "amplitude":
            a, b = c.amplitude_range
        elif slot.field == "duration":
            a, b = c.duration_range
        else:
            a, b = 0.0, TWO_PI
        lo.append(a)
        hi.append(b)
    return np.array(lo, dtype=float), np.array(hi, dtype=float)


def sample_parameters(
    spec: TemplateSpec,
    constraints: ConstraintSpec | None = None,
    rng=None,
    amplitude_range: tuple[float, float] | None = None,
    interior: dict | None = None,
) -> ParameterVector:
    """Draw one parameter vector uniformly from the constraint box.

    Durations are drawn from the granularity grid. ``amplitude_range``
    overrides the amplitude window; ``interior`` maps a field name to a margin
    kept from both ends of its range (used for finite-difference probes).
    """
    c = constraints or ConstraintSpec()
    rng = np.random.default_rng(rng)
    layout = parameter_layout(spec)
    interior = interior or {}
    grid = np.array(c.duration_grid())
    if "duration" in interior:
        m = interior["duration"]
        grid = grid[(grid >= c.duration_range[0] + m) & (grid <= c.duration_range[1] - m)]
    a_lo, a_hi = amplitude_range or c.amplitude_range
    if "amplitude" in interior:
        a_lo, a_hi = a_lo + interior["amplitude"], a_hi - interior["amplitude"]
    values = np.empty(len(layout))
    for i, slot in enumerate(layout):
        if slot.field == "amplitude":
            values[i] = rng.uniform(a_lo, a_hi)
        elif slot.field == "duration":
            values[i] = grid[rng.integers(len(grid))]
        else:
            values[i] = rng.uniform(0.0, TWO_PI)
    return ParameterVector(values, layout)


# -- instantiation --------------------------------------------------------------


def _fixed_value(kind: str, name: str, device: DeviceModel) -> float:
    if kind == "sqp":
        return {"amplitude": device.cal_amplitude, "angle": 0.0, "duration": device.cal_duration}[name]
    return {
        "amplitude": device.cr_default_amplitude,
        "angle": 0.0,
        "duration": device.cr_default_duration,
    }[name]


def instantiate(
    spec: TemplateSpec,
    theta,
    device: DeviceModel | None = None,
    snap: bool = True,
    constraints: ConstraintSpec | None = None,
) -> Schedule:
    """Build the pulse schedule of ``spec`` at parameters ``theta``.

    Pulses are packed as soon as every qubit they touch is free. Durations
    snap to the granularity grid; with ``snap=False`` they are only rounded to
    whole ticks. If ``constraints`` is given every pulse is validated.
    """
    if spec.is_gate:
        raise TemplateError(f"{spec.id} is a gate baseline, not a pulse template")
    device = device_for(spec.n_qubits, device)
    grid = constraints or ConstraintSpec()
    theta = np.asarray(theta, dtype=float)
    slots = blueprint(spec)
    layout = parameter_layout(spec)
    if theta.shape != (len(layout),):
        raise ValueError(f"{spec.label} takes {len(layout)} parameters, got shape {theta.shape}")
    sqp_env = Envelope("gaussian", drag_beta=device.drag_beta)
    cr_env = cr_envelope(device)
    free_at = [0] * spec.n_qubits
    instructions = []
    k = 0
    for slot in slots:
        values = {}
        for name in PULSE_FIELDS:
            if name in slot.free:
                values[name] = theta[k]
                k += 1
            else:
                values[name] = _fixed_value(slot.kind, name, device)
        d = values["duration"]
        duration = grid.snap_duration(d) if snap and "duration" in slot.free else int(round(d))
        params = PulseParams(values["amplitude"], values["angle"], duration)
        if slot.kind == "sqp":
            channel, env, kind = Channel.drive(slot.qubits[0]), sqp_env, "play_sqp"
        else:
            device.coefficients(*slot.qubits)
            channel, env, kind = Channel.control(*slot.qubits), cr_env, "play_cr"
        if constraints is not None:
            pinned = device.cal_duration if "duration" not in slot.free else None
            result = validate_params(params, constraints, pinned_duration=pinned)
            if not result:
                raise ConstraintViolation(result, where=f"{spec.label} pulse {len(instructions)}")
        start = max(free_at[q] for q in slot.qubits)
        for q in slot.qubits:
            free_at[q] = start + duration
        instructions.append(Instruction(kind, channel, start, params, env))
    metadata = {
        "template": spec.to_dict(),
        "n_layers": spec.n_layers,
        "free_fields": [list(s.free) for s in slots],
    }
    return Schedule(spec.n_qubits, tuple(instructions), metadata)


def structural_counts(schedule: Schedule) -> tuple[int, int, int]:
    """``(n_params, n_cr, depth)`` read back from an instantiated schedule."""
    free = schedule.metadata["free_fields"]
    n_p = sum(len(f) for f in free)
    n_c = sum(ins.kind == "play_cr" for ins in schedule.instructions)
    return n_p, n_c, pulse_depth(schedule)


# -- common ansatz interface ----------------------------------------------------


def ansatz_state(
    spec: TemplateSpec,
    theta,
    device: DeviceModel | None = None,
    snap: bool = True,
    level: PropagationLevel = EFFECTIVE,
) -> np.ndarray:
    """Output state from ``|0...0>`` for any template or gate baseline."""
    theta = np.asarray(theta, dtype=float)
    if spec.is_gate:
        return gates.gate_state(spec.id, spec.n_qubits, theta)
    device = device_for(spec.n_qubits, device)
    return evolve_schedule(instantiate(spec, theta, device, snap=snap), device, level=level)


def ansatz_unitary(spec: TemplateSpec, theta, device: DeviceModel | None = None, snap: bool = True):
    if spec.is_gate:
        return gates.gate_unitary(spec.id, spec.n_qubits, np.asarray(theta, dtype=float))
    device = device_for(spec.n_qubits, device)
    return schedule_unitary(instantiate(spec, theta, device, snap=snap), device)


def ansatz_duration(spec: TemplateSpec, theta, device: DeviceModel | None = None) -> int:
    if spec.is_gate:
        return gates.gate_duration(spec.id, spec.n_qubits, device_for(spec.n_qubits, device))
    return instantiate(spec, theta, device).duration


def duration_bounds(
    spec: TemplateSpec, device: DeviceModel | None = None, constraints: ConstraintSpec | None = None
) -> tuple[int, int]:
    """Shortest and longest schedule over the constraint box."""
    if spec.is_gate:
        d = ansatz_duration(spec, None, device)
        return d, d
    lo, hi = parameter_bounds(spec, constraints)
    return ansatz_duration(spec, lo, device), ansatz_duration(spec, hi, device)
