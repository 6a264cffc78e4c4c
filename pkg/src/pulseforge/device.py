"""Device model: topology, calibration anchors and cross-resonance coefficients."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from pulseforge.constraints import ConstraintSpec, constraint_spec_for

DEFAULT_DEVICE = "ideal2l.json"

# (a_x, a_y, a_z, b_x, b_y, b_z) in rad/dt per unit amplitude
DEFAULT_CR_COEFFICIENTS = (3.0e-3, 0.0, 2.0e-4, 1.0e-3, 0.0, 1.0e-4)

DEFAULT_GATE_DURATIONS = {"rz": 0, "rx": 320, "ry": 320, "u3": 320, "cx": 1056, "cz": 1056}


class TopologyError(ValueError):
    """A two-qubit pulse was requested on an uncoupled pair."""


@dataclass(frozen=True)
class DeviceModel:
    n_qubits: int
    edges: tuple[tuple[int, int], ...]
    cr_coefficients: dict = field(hash=False)
    dt_ns: float = 0.222
    cal_amplitude: float = 0.2
    cal_duration: int = 160
    drag_beta: float = 0.0
    cr_default_amplitude: float = 0.3
    cr_default_duration: int = 512
    cr_rise_fall: int = 16
    single_gate_durations: dict = field(default_factory=lambda: dict(DEFAULT_GATE_DURATIONS), hash=False)
    backend: str = "ideal"

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(int(q) for q in e) for e in self.edges))
        for c, t in self.edges:
            if not (0 <= c < self.n_qubits and 0 <= t < self.n_qubits) or c == t:
                raise ValueError(f"edge {(c, t)} invalid for {self.n_qubits} qubits")
        if self.cal_duration % 16:
            raise ValueError(f"cal_duration {self.cal_duration} is not a multiple of 16")
        if self.dt_ns <= 0:
            raise ValueError("dt_ns must be positive")
        if self.cal_amplitude == 0:
            raise ValueError("cal_amplitude must be nonzero")
        coeffs = {}
        for key, vec in self.cr_coefficients.items():
            edge = _parse_edge(key)
            if len(vec) != 6:
                raise ValueError(f"CR coefficients for {edge} need 6 entries")
            coeffs[edge] = tuple(float(v) for v in vec)
        object.__setattr__(self, "cr_coefficients", coeffs)

    @classmethod
    def linear(cls, n_qubits: int, **overrides) -> DeviceModel:
        edges = tuple((q, q + 1) for q in range(n_qubits - 1))
        coeffs = {e: DEFAULT_CR_COEFFICIENTS for e in edges}
        return cls(n_qubits=n_qubits, edges=edges, cr_coefficients=coeffs, **overrides)

    def coefficients(self, control: int, target: int) -> tuple[float, ...]:
        try:
            return self.cr_coefficients[(control, target)]
        except KeyError:
            raise TopologyError(f"qubits ({control}, {target}) are not a coupled pair") from None

    def has_edge(self, control: int, target: int) -> bool:
        return (control, target) in self.cr_coefficients

    def restrict(self, n_qubits: int) -> DeviceModel:
        """Sub-device on qubits ``0 .. n_qubits-1``."""
        if n_qubits > self.n_qubits:
            raise ValueError(f"device has {self.n_qubits} qubits, asked for {n_qubits}")
        if n_qubits == self.n_qubits:
            return self
        edges = tuple(e for e in self.edges if max(e) < n_qubits)
        data = self.to_dict()
        data["n_qubits"] = n_qubits
        data["edges"] = [list(e) for e in edges]
        data["cr_coefficients"] = {
            k: v for k, v in data["cr_coefficients"].items() if max(_parse_edge(k)) < n_qubits
        }
        return DeviceModel.from_dict(data)

    def constraints(self) -> ConstraintSpec:
        return constraint_spec_for(self.backend)

    def gate_duration(self, name: str) -> int:
        return int(self.single_gate_durations[name])

    def to_dict(self) -> dict:
        data = asdict(self)
        data["edges"] = [list(e) for e in self.edges]
        data["cr_coefficients"] = {
            f"{c}-{t}": list(v) for (c, t), v in sorted(self.cr_coefficients.items())
        }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> DeviceModel:
        data = dict(data)
        data["edges"] = tuple(tuple(e) for e in data["edges"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self) -> str:
        """Short content hash, recorded in every output artifact."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _parse_edge(key) -> tuple[int, int]:
    if isinstance(key, str):
        c, t = key.split("-")
        return int(c), int(t)
    c, t = key
    return int(c), int(t)


@lru_cache(maxsize=None)
def _packaged_device() -> DeviceModel:
    text = resources.files("pulseforge.data").joinpath("device", DEFAULT_DEVICE).read_text()
    return DeviceModel.from_dict(json.loads(text))


def load_device(path: str | Path | None = None) -> DeviceModel:
    """Read a device file; ``None`` loads the packaged ``ideal2l.json``."""
    if path is None:
        return _packaged_device()
    return DeviceModel.from_dict(json.loads(Path(path).read_text()))


@lru_cache(maxsize=256)
def device_for(n_qubits: int, device: DeviceModel | None = None) -> DeviceModel:
    """A device with at least ``n_qubits`` qubits, restricted to exactly that many."""
    if device is None:
        device = load_device()
    if device.n_qubits < n_qubits:
        data = device.to_dict()
        data.pop("n_qubits"), data.pop("edges"), data.pop("cr_coefficients")
        return DeviceModel.linear(n_qubits, **data)
    return device.restrict(n_qubits)
