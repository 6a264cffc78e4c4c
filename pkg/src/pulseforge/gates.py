"""Gate-level baseline circuits used for comparison against pulse templates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from pulseforge.device import DeviceModel, load_device
from pulseforge.qcore import CapacityError, apply_embedded_unitary, zero_state

GATE_BASELINES = ("RZ", "RX", "RXRZ", "ZYZ", "RXCX2Q", "UNIVERSAL2Q", "TWOLOCAL", "REALAMP")
TWO_QUBIT_ONLY = ("RXCX2Q", "UNIVERSAL2Q")
DEFAULT_REPS = 3


def rz(theta):
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


# control (x) target ordering
CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

_ROTATIONS = {"rz": rz, "rx": rx, "ry": ry}
_FIXED = {"cx": CX, "cz": CZ}


@dataclass(frozen=True)
class GateOp:
    name: str
    qubits: tuple[int, ...]
    param: int | None = None

    def matrix(self, theta) -> np.ndarray:
        if self.param is None:
            return _FIXED[self.name]
        return _ROTATIONS[self.name](theta[self.param])


class _Builder:
    def __init__(self):
        self.ops: list[GateOp] = []
        self.n_params = 0

    def rot(self, name, q):
        self.ops.append(GateOp(name, (q,), self.n_params))
        self.n_params += 1

    def fixed(self, name, c, t):
        self.ops.append(GateOp(name, (c, t)))


@lru_cache(maxsize=256)
def gate_ops(name: str, n_qubits: int, reps: int = DEFAULT_REPS) -> tuple[GateOp, ...]:
    """Gate list of a baseline circuit; rotation parameters are numbered in order."""
    b = _Builder()
    if name in TWO_QUBIT_ONLY and n_qubits != 2:
        raise ValueError(f"{name} is a two-qubit circuit, got n_qubits={n_qubits}")
    if name in ("TWOLOCAL", "REALAMP") and n_qubits < 2:
        raise ValueError(f"{name} needs at least two qubits")
    qs = range(n_qubits)
    if name == "RZ":
        for q in qs:
            b.rot("rz", q)
    elif name == "RX":
        for q in qs:
            b.rot("rx", q)
    elif name == "RXRZ":
        for q in qs:
            b.rot("rx", q)
            b.rot("rz", q)
    elif name == "ZYZ":
        for q in qs:
            b.rot("rz", q)
            b.rot("ry", q)
            b.rot("rz", q)
    elif name == "RXCX2Q":
        b.rot("rx", 0)
        b.rot("rx", 1)
        b.fixed("cx", 0, 1)
        b.rot("rx", 0)
        b.rot("rx", 1)
    elif name == "UNIVERSAL2Q":
        # local ZYZ layers around the three-CNOT core (15 rotations, 3 CNOTs)
        for q in (0, 1):
            b.rot("rz", q)
            b.rot("ry", q)
            b.rot("rz", q)
        b.fixed("cx", 1, 0)
        b.rot("rz", 0)
        b.rot("ry", 1)
        b.fixed("cx", 0, 1)
        b.rot("ry", 1)
        b.fixed("cx", 1, 0)
        for q in (0, 1):
            b.rot("rz", q)
            b.rot("ry", q)
            b.rot("rz", q)
    elif name == "TWOLOCAL":
        # Ry rotation layers, full CZ entanglement
        for _ in range(reps):
            for q in qs:
                b.rot("ry", q)
            for c, t in combinations(qs, 2):
                b.fixed("cz", c, t)
        for q in qs:
            b.rot("ry", q)
    elif name == "REALAMP":
        # Ry rotation layers, reverse-linear CX entanglement
        for _ in range(reps):
            for q in qs:
                b.rot("ry", q)
            for c in reversed(range(n_qubits - 1)):
                b.fixed("cx", c, c + 1)
        for q in qs:
            b.rot("ry", q)
    else:
        raise ValueError(f"unknown gate baseline {name!r}")
    return tuple(b.ops)


def gate_param_count(name: str, n_qubits: int) -> int:
    return sum(op.param is not None for op in gate_ops(name, n_qubits))


def gate_state(name: str, n_qubits: int, theta, init=None) -> np.ndarray:
    state = zero_state(n_qubits) if init is None else np.asarray(init, dtype=complex)
    for op in gate_ops(name, n_qubits):
        state = apply_embedded_unitary(state, op.matrix(theta), op.qubits)
    return state


def gate_unitary(name: str, n_qubits: int, theta) -> np.ndarray:
    if n_qubits > 10:
        raise CapacityError(f"{n_qubits} qubits exceeds unitary cap 10")
    dim = 2**n_qubits
    return np.array([gate_state(name, n_qubits, theta, init=col) for col in np.eye(dim)]).T


def gate_duration(name: str, n_qubits: int, device: DeviceModel | None = None) -> int:
    """Critical-path duration with ASAP scheduling per qubit."""
    device = device or load_device()
    free = [0] * n_qubits
    for op in gate_ops(name, n_qubits):
        start = max(free[q] for q in op.qubits)
        stop = start + device.gate_duration(op.name)
        for q in op.qubits:
            free[q] = stop
    return max(free, default=0)


def gate_baseline(name: str, n_qubits: int, theta, device: DeviceModel | None = None):
    """Return ``(unitary, duration_dt, param_layout)`` of a baseline circuit.

    ``param_layout`` lists ``(gate_index, gate_name, qubits)`` per parameter.
    """
    ops = gate_ops(name, n_qubits)
    theta = np.asarray(theta, dtype=float)
    n_params = sum(op.param is not None for op in ops)
    if theta.shape != (n_params,):
        raise ValueError(f"{name} on {n_qubits} qubits takes {n_params} parameters")
    layout = [(i, op.name, op.qubits) for i, op in enumerate(ops) if op.param is not None]
    return gate_unitary(name, n_qubits, theta), gate_duration(name, n_qubits, device), layout
