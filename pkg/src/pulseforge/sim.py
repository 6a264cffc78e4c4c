"""Evolve pulse schedules under the drive and cross-resonance Hamiltonians.

Two-level qubits in the rotating frame, on resonance. An SQP with drive
phase ``phi`` rotates about ``(cos phi, sin phi, 0)``; its rotation angle is
fixed by the calibration anchor (``cal_amplitude`` over ``cal_duration``
gives a pi pulse) times the envelope area ratio. A CR pulse on
(control, target) evolves under

    H = a_x ZX + a_y ZY + a_z ZZ + b_x IX + b_y IY + b_z IZ

scaled by amplitude * envelope area, with the X/Y pairs rotated by ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from pulseforge.constraints import ConstraintSpec, ConstraintViolation, validate_params
from pulseforge.device import DeviceModel
from pulseforge.ir import Envelope, Instruction, PulseParams, Schedule, envelope_area, envelope_samples
from pulseforge.qcore import PAULI, CapacityError, apply_embedded_unitary, zero_state

MAX_UNITARY_QUBITS = 10

_ZX = np.kron(PAULI["Z"], PAULI["X"])
_ZY = np.kron(PAULI["Z"], PAULI["Y"])
_ZZ = np.kron(PAULI["Z"], PAULI["Z"])
_IX = np.kron(PAULI["I"], PAULI["X"])
_IY = np.kron(PAULI["I"], PAULI["Y"])
_IZ = np.kron(PAULI["I"], PAULI["Z"])


@dataclass(frozen=True)
class PropagationLevel:
    level: str = "effective_unitary"
    steps_per_dt: int = 1

    def __post_init__(self):
        if self.level not in ("effective_unitary", "time_stepped"):
            raise ValueError(f"unknown propagation level {self.level!r}")
        if self.steps_per_dt < 1:
            raise ValueError("steps_per_dt must be >= 1")


EFFECTIVE = PropagationLevel()
TIME_STEPPED = PropagationLevel("time_stepped")


def calibration_envelope(device: DeviceModel) -> Envelope:
    return Envelope("gaussian", drag_beta=device.drag_beta)


def sqp_rate(device: DeviceModel) -> float:
    """Rotation angle per unit (amplitude x envelope area)."""
    area = envelope_area(calibration_envelope(device), device.cal_duration)
    return math.pi / (device.cal_amplitude * area)


def sqp_rotation_angle(params: PulseParams, envelope: Envelope, device: DeviceModel) -> float:
    return sqp_rate(device) * params.amplitude * envelope_area(envelope, params.duration)


def _check_hard_limits(params: PulseParams) -> None:
    if not -1.0 <= params.amplitude <= 1.0:
        raise ValueError(f"amplitude {params.amplitude} outside the AWG range [-1, 1]")
    if params.duration < 0:
        raise ValueError(f"negative duration {params.duration}")


def sqp_unitary(params: PulseParams, envelope: Envelope, device: DeviceModel) -> np.ndarray:
    """``exp(-i theta/2 (cos phi X + sin phi Y))``."""
    _check_hard_limits(params)
    theta = sqp_rotation_angle(params, envelope, device)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    phase = np.exp(1j * params.angle)
    return np.array([[c, -1j * s / phase], [-1j * s * phase, c]])


def sqp_generator(angle: float) -> np.ndarray:
    return 0.5 * (math.cos(angle) * PAULI["X"] + math.sin(angle) * PAULI["Y"])


def rotated_coefficients(coeffs, angle: float) -> tuple[float, ...]:
    ax, ay, az, bx, by, bz = coeffs
    c, s = math.cos(angle), math.sin(angle)
    return (c * ax - s * ay, s * ax + c * ay, az, c * bx - s * by, s * bx + c * by, bz)


def cr_generator(angle: float, coeffs) -> np.ndarray:
    """Effective CR Hamiltonian per unit amplitude-area, control (x) target."""
    ax, ay, az, bx, by, bz = rotated_coefficients(coeffs, angle)
    return ax * _ZX + ay * _ZY + az * _ZZ + bx * _IX + by * _IY + bz * _IZ


def _pauli_vector_exp(n: np.ndarray, scale: float) -> np.ndarray:
    """``exp(-i scale n.sigma)`` for a real 3-vector ``n``."""
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        return np.eye(2, dtype=complex)
    phi = scale * norm
    nx, ny, nz = n / norm
    s = math.sin(phi)
    return math.cos(phi) * np.eye(2) - 1j * s * np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]])


def cr_unitary(
    params: PulseParams, envelope: Envelope, coeffs, device: DeviceModel | None = None
) -> np.ndarray:
    """Closed-form ``exp(-i A H_eff)`` with ``A = amplitude * area``.

    ``H_eff = Z (x) A2 + I (x) B2`` is block diagonal in the control qubit, so
    each block is a single-qubit exponential.
    """
    _check_hard_limits(params)
    area = params.amplitude * envelope_area(envelope, params.duration)
    ax, ay, az, bx, by, bz = rotated_coefficients(coeffs, params.angle)
    a_vec = np.array([ax, ay, az])
    b_vec = np.array([bx, by, bz])
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = _pauli_vector_exp(b_vec + a_vec, area)
    u[2:, 2:] = _pauli_vector_exp(b_vec - a_vec, area)
    return u


def cr_envelope(device: DeviceModel) -> Envelope:
    return Envelope("gaussian_square", rise_fall=device.cr_rise_fall)


def _time_stepped(generator: np.ndarray, samples: np.ndarray, scale: float, steps: int) -> np.ndarray:
    u = np.eye(generator.shape[0], dtype=complex)
    for s in samples:
        step = expm(-1j * (scale * s / steps) * generator)
        for _ in range(steps):
            u = step @ u
    return u


def instruction_unitary(
    ins: Instruction, device: DeviceModel, level: PropagationLevel = EFFECTIVE
) -> tuple[np.ndarray | None, tuple[int, ...]]:
    """Unitary of one instruction and the qubits it acts on (``None`` for delays)."""
    if ins.kind == "delay":
        return None, ins.channel.qubits
    p, env = ins.params, ins.envelope
    if ins.kind == "play_sqp":
        if level.level == "effective_unitary":
            return sqp_unitary(p, env, device), ins.channel.qubits
        _check_hard_limits(p)
        u = _time_stepped(
            sqp_generator(p.angle),
            envelope_samples(env, p.duration),
            sqp_rate(device) * p.amplitude,
            level.steps_per_dt,
        )
        return u, ins.channel.qubits
    coeffs = device.coefficients(*ins.channel.qubits)
    if level.level == "effective_unitary":
        return cr_unitary(p, env, coeffs, device), ins.channel.qubits
    _check_hard_limits(p)
    u = _time_stepped(
        cr_generator(p.angle, coeffs), envelope_samples(env, p.duration), p.amplitude, level.steps_per_dt
    )
    return u, ins.channel.qubits


def _check_constraints(schedule: Schedule, device: DeviceModel, constraints: ConstraintSpec):
    for i, ins in enumerate(schedule.instructions):
        if ins.kind == "delay":
            continue
        pinned = device.cal_duration if ins.kind == "play_sqp" else None
        result = validate_params(ins.params, constraints, pinned_duration=pinned)
        if not result:
            raise ConstraintViolation(result, where=f"instruction {i} on {ins.channel}")


def evolve_schedule(
    schedule: Schedule,
    device: DeviceModel,
    init: np.ndarray | None = None,
    level: PropagationLevel = EFFECTIVE,
    constraints: ConstraintSpec | None = None,
) -> np.ndarray:
    """Apply the schedule to ``init`` (default ``|0...0>``).

    Instructions run in start-time order, ties broken by channel index. If
    ``constraints`` is given every pulse is validated first.
    """
    if schedule.n_qubits > device.n_qubits:
        raise ValueError(
            f"schedule needs {schedule.n_qubits} qubits, device has {device.n_qubits}"
        )
    state = zero_state(schedule.n_qubits) if init is None else np.asarray(init, dtype=complex)
    if state.shape != (2**schedule.n_qubits,):
        raise ValueError(f"initial state does not match {schedule.n_qubits} qubits")
    if constraints is not None:
        _check_constraints(schedule, device, constraints)
    for ins in schedule.ordered():
        u, targets = instruction_unitary(ins, device, level)
        if u is not None:
            state = apply_embedded_unitary(state, u, targets)
    return state


def schedule_unitary(
    schedule: Schedule, device: DeviceModel, level: PropagationLevel = EFFECTIVE
) -> np.ndarray:
    n = schedule.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise CapacityError(f"{n} qubits exceeds unitary cap {MAX_UNITARY_QUBITS}")
    dim = 2**n
    ops = [instruction_unitary(ins, device, level) for ins in schedule.ordered()]
    cols = []
    for j in range(dim):
        col = np.zeros(dim, dtype=complex)
        col[j] = 1.0
        for u, targets in ops:
            if u is not None:
                col = apply_embedded_unitary(col, u, targets)
        cols.append(col)
    return np.array(cols).T


def operator_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius norm of ``u - v`` (global phase included)."""
    return float(np.linalg.norm(u - v))
