"""Pulse-schedule intermediate representation.

All times are integer ``dt`` ticks. A schedule is a flat list of timed
instructions on drive channels ``d{q}`` and control channels ``u{c}{t}``.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

SCHEMA_VERSION = 1
TWO_PI = 2 * math.pi

INSTRUCTION_KINDS = ("play_sqp", "play_cr", "delay")
ENVELOPE_KINDS = ("gaussian", "gaussian_square")


class ShapeError(ValueError):
    """Envelope parameters that cannot produce a valid waveform."""


class ScheduleError(ValueError):
    pass


class ScheduleParseError(ValueError):
    """Malformed schedule document; the message names the offending field."""


def normalize_angle(angle: float) -> float:
    a = math.fmod(float(angle), TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negatives
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class PulseParams:
    amplitude: float
    angle: float = 0.0
    duration: int = 160
    frequency_offset: float = 0.0

    def __post_init__(self):
        if isinstance(self.duration, bool) or not isinstance(self.duration, numbers.Integral):
            raise TypeError(f"duration must be an integer number of dt, got {self.duration!r}")
        object.__setattr__(self, "duration", int(self.duration))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "angle", normalize_angle(self.angle))
        object.__setattr__(self, "frequency_offset", float(self.frequency_offset))


@dataclass(frozen=True)
class Envelope:
    """Pulse envelope.

    ``sigma=None`` resolves to ``duration / 4`` for a gaussian and to
    ``rise_fall / 2`` for a gaussian_square. ``drag_beta`` is metadata only.
    """

    kind: str = "gaussian"
    sigma: float | None = None
    rise_fall: float = 0.0
    drag_beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ShapeError(f"unknown envelope kind {self.kind!r}")
        if self.sigma is not None and self.sigma <= 0:
            raise ShapeError(f"sigma must be positive, got {self.sigma}")
        if self.rise_fall < 0:
            raise ShapeError(f"rise_fall must be nonnegative, got {self.rise_fall}")

    def resolved_sigma(self, duration: int) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        if self.kind == "gaussian":
            return max(duration / 4.0, 1e-12)
        return max(self.rise_fall / 2.0, 1e-12)


@lru_cache(maxsize=8192)
def _samples_cached(kind: str, sigma: float, rise_fall: float, duration: int) -> np.ndarray:
    t = np.arange(duration, dtype=float)
    if kind == "gaussian":
        s = np.exp(-((t - duration / 2.0) ** 2) / (2 * sigma**2))
    else:
        rf = rise_fall
        s = np.ones(duration)
        rise = t < rf
        fall = t >= duration - rf
        s[rise] = np.exp(-((rf - t[rise]) ** 2) / (2 * sigma**2))
        s[fall] = np.exp(-((t[fall] - (duration - rf - 1)) ** 2) / (2 * sigma**2))
    s.setflags(write=False)
    return s


def envelope_samples(envelope: Envelope, duration: int) -> np.ndarray:
    """Envelope values at ticks ``0 .. duration-1`` (read-only array)."""
    duration = int(duration)
    if duration < 0:
        raise ShapeError(f"negative duration {duration}")
    if envelope.kind == "gaussian_square" and 2 * envelope.rise_fall > duration:
        raise ShapeError(
            f"gaussian_square flat top would be negative: 2*{envelope.rise_fall} > {duration}"
        )
    return _samples_cached(
        envelope.kind,
        envelope.resolved_sigma(duration),
        float(envelope.rise_fall),
        duration,
    )


def envelope_area(envelope: Envelope, duration: int) -> float:
    return float(envelope_samples(envelope, duration).sum())


@dataclass(frozen=True, order=True)
class Channel:
    """``drive`` channels carry one qubit, ``control`` channels (control, target)."""

    type: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.type == "drive" and len(self.qubits) != 1:
            raise ScheduleError("drive channel takes exactly one qubit")
        if self.type == "control" and (
            len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]
        ):
            raise ScheduleError("control channel takes two distinct qubits")
        if self.type not in ("drive", "control"):
            raise ScheduleError(f"unknown channel type {self.type!r}")

    @classmethod
    def drive(cls, q: int) -> Channel:
        return cls("drive", (q,))

    @classmethod
    def control(cls, c: int, t: int) -> Channel:
        return cls("control", (c, t))

    @property
    def sort_key(self) -> tuple:
        return (0 if self.type == "drive" else 1, self.qubits)

    def __str__(self) -> str:
        prefix = "d" if self.type == "drive" else "u"
        return prefix + "".join(str(q) for q in self.qubits)


@dataclass(frozen=True)
class Instruction:
    kind: str
    channel: Channel
    start: int
    params: PulseParams
    envelope: Envelope = field(default_factory=Envelope)

    def __post_init__(self):
        if self.kind not in INSTRUCTION_KINDS:
            raise ScheduleError(f"unknown instruction kind {self.kind!r}")
        if self.kind == "play_sqp" and self.channel.type != "drive":
            raise ScheduleError("play_sqp must target a drive channel")
        if self.kind == "play_cr" and self.channel.type != "control":
            raise ScheduleError("play_cr must target a control channel")
        if isinstance(self.start, bool) or not isinstance(self.start, numbers.Integral):
            raise TypeError(f"start must be an integer tick, got {self.start!r}")
        if self.start < 0:
            raise ScheduleError(f"negative start time {self.start}")

    @property
    def duration(self) -> int:
        return self.params.duration

    @property
    def stop(self) -> int:
        return self.start + self.params.duration


@dataclass(frozen=True)
class Schedule:
    n_qubits: int
    instructions: tuple[Instruction, ...] = ()
    metadata: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        check_schedule(self)

    def ordered(self) -> list[Instruction]:
        """Instructions by start time, ties broken by channel index."""
        return sorted(self.instructions, key=lambda ins: (ins.start, ins.channel.sort_key))

    @property
    def duration(self) -> int:
        return schedule_duration(self)


def check_schedule(schedule: Schedule) -> None:
    """Raise :class:`ScheduleError` on overlap, bad qubits or negative starts."""
    busy: dict[Channel, list[tuple[int, int]]] = {}
    for ins in schedule.instructions:
        for q in ins.channel.qubits:
            if not 0 <= q < schedule.n_qubits:
                raise ScheduleError(f"channel {ins.channel} outside {schedule.n_qubits} qubits")
        busy.setdefault(ins.channel, []).append((ins.start, ins.stop))
    for ch, spans in busy.items():
        spans.sort()
        for (s0, e0), (s1, _) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ScheduleError(f"overlapping instructions on channel {ch} at t={s1}")


def schedule_duration(schedule: Schedule) -> int:
    return max((ins.stop for ins in schedule.instructions), default=0)


def pulse_depth(schedule: Schedule) -> int:
    """Longest chain of non-delay pulses linked through shared qubits."""
    depth = [0] * schedule.n_qubits
    for ins in schedule.ordered():
        if ins.kind == "delay":
            continue
        level = max(depth[q] for q in ins.channel.qubits) + 1
        for q in ins.channel.qubits:
            depth[q] = level
    return max(depth, default=0)


# -- serialization -----------------------------------------------------------


def schedule_to_dict(schedule: Schedule) -> dict:
    rows = []
    for ins in schedule.instructions:
        rows.append(
            {
                "kind": ins.kind,
                "channel": {"type": ins.channel.type, "qubits": list(ins.channel.qubits)},
                "start": ins.start,
                "duration": ins.params.duration,
                "amplitude": ins.params.amplitude,
                "angle": ins.params.angle,
                "frequency_offset": ins.params.frequency_offset,
                "envelope": {
                    "kind": ins.envelope.kind,
                    "sigma": ins.envelope.sigma,
                    "rise_fall": ins.envelope.rise_fall,
                    "drag_beta": ins.envelope.drag_beta,
                },
            }
        )
    return {
        "version": SCHEMA_VERSION,
        "n_qubits": schedule.n_qubits,
        "instructions": rows,
        "metadata": dict(schedule.metadata),
    }


def serialize_schedule(schedule: Schedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2, sort_keys=True)


def _require(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise ScheduleParseError(f"{where}: expected an object")
    if key not in obj:
        raise ScheduleParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScheduleParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScheduleParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def schedule_from_dict(doc: dict) -> Schedule:
    version = _require(doc, "version", "schedule")
    if version != SCHEMA_VERSION:
        raise ScheduleParseError(f"schedule.version: unsupported version {version!r}")
    n_qubits = _integer(_require(doc, "n_qubits", "schedule"), "schedule.n_qubits")
    rows = _require(doc, "instructions", "schedule")
    if not isinstance(rows, list):
        raise ScheduleParseError("schedule.instructions: expected a list")
    instructions = []
    for i, row in enumerate(rows):
        where = f"instructions[{i}]"
        ch = _require(row, "channel", where)
        ch_type = _require(ch, "type", f"{where}.channel")
        qubits = _require(ch, "qubits", f"{where}.channel")
        if not isinstance(qubits, list):
            raise ScheduleParseError(f"{where}.channel.qubits: expected a list")
        qubits = [_integer(q, f"{where}.channel.qubits") for q in qubits]
        env = row.get("envelope", {})
        sigma = env.get("sigma")
        try:
            envelope = Envelope(
                kind=env.get("kind", "gaussian"),
                sigma=None if sigma is None else _number(sigma, f"{where}.envelope.sigma"),
                rise_fall=_number(env.get("rise_fall", 0.0), f"{where}.envelope.rise_fall"),
                drag_beta=_number(env.get("drag_beta", 0.0), f"{where}.envelope.drag_beta"),
            )
            params = PulseParams(
                amplitude=_number(_require(row, "amplitude", where), f"{where}.amplitude"),
                angle=_number(_require(row, "angle", where), f"{where}.angle"),
                duration=_integer(_require(row, "duration", where), f"{where}.duration"),
                frequency_offset=_number(
                    row.get("frequency_offset", 0.0), f"{where}.frequency_offset"
                ),
            )
            instructions.append(
                Instruction(
                    kind=_require(row, "kind", where),
                    channel=Channel(ch_type, tuple(qubits)),
                    start=_integer(_require(row, "start", where), f"{where}.start"),
                    params=params,
                    envelope=envelope,
                )
            )
        except ScheduleParseError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScheduleParseError(f"{where}: {exc}") from exc
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ScheduleParseError("schedule.metadata: expected an object")
    try:
        return Schedule(n_qubits, tuple(instructions), metadata)
    except ScheduleError as exc:
        raise ScheduleParseError(f"schedule: {exc}") from exc


def deserialize_schedule(text: str) -> Schedule:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return schedule_from_dict(doc)
