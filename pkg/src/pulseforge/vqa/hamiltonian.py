"""Pauli-sum Hamiltonians and exact statevector expectation values."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from pulseforge.qcore import MAX_DENSE_QUBITS, CapacityError, apply_pauli, pauli_operator

_VALID = set("IXYZ")


class HamiltonianParseError(ValueError):
    pass


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted sum of Pauli strings. Label character ``k`` acts on qubit ``k``."""

    terms: tuple[tuple[float, str], ...]
    n_qubits: int
    _dense: list = field(default_factory=list, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        merged: dict[str, float] = {}
        for coef, label in self.terms:
            label = label.upper()
            if len(label) != self.n_qubits:
                raise ValueError(f"label {label!r} has length {len(label)}, expected {self.n_qubits}")
            if set(label) - _VALID:
                raise ValueError(f"label {label!r} contains characters outside IXYZ")
            merged[label] = merged.get(label, 0.0) + float(coef)
        object.__setattr__(self, "terms", tuple((c, lab) for lab, c in merged.items()))

    @classmethod
    def from_terms(cls, terms) -> PauliHamiltonian:
        terms = [(float(c), str(lab)) for c, lab in terms]
        if not terms:
            raise ValueError("a Hamiltonian needs at least one term")
        return cls(tuple(terms), len(terms[0][1]))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for _, lab in self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    def coefficient(self, label: str) -> float:
        return dict((lab, c) for c, lab in self.terms).get(label.upper(), 0.0)

    @property
    def constant(self) -> float:
        return self.coefficient("I" * self.n_qubits)

    def n_pauli_strings(self, tol: float = 0.0) -> int:
        """Count of non-identity terms with ``|c| > tol``."""
        ident = "I" * self.n_qubits
        return sum(lab != ident and abs(c) > tol for c, lab in self.terms)

    @property
    def is_diagonal(self) -> bool:
        return all(set(lab) <= {"I", "Z"} for lab in self.labels)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix (cached, read-only)."""
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise CapacityError(f"{self.n_qubits} qubits exceeds dense cap {MAX_DENSE_QUBITS}")
        if not self._dense:
            dim = 2**self.n_qubits
            m = np.zeros((dim, dim), dtype=complex)
            for c, lab in self.terms:
                m += c * pauli_operator(lab)
            m.setflags(write=False)
            self._dense.append(m)
        return self._dense[0]

    def diagonal(self) -> np.ndarray:
        """Energies of the computational basis states (Z-only Hamiltonians)."""
        if not self.is_diagonal:
            raise ValueError("Hamiltonian has off-diagonal terms")
        idx = np.arange(2**self.n_qubits)
        out = np.zeros(idx.shape)
        for c, lab in self.terms:
            sign = np.ones(idx.shape)
            for k, ch in enumerate(lab):
                if ch == "Z":
                    sign *= 1 - 2 * ((idx >> k) & 1)
            out += c * sign
        return out

    def to_text(self) -> str:
        return "".join(f"{c:.12f} {lab}\n" for c, lab in self.terms)


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Parse ``<coefficient> <label>`` lines; ``#`` starts a comment."""
    terms = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianParseError(f"line {lineno}: expected '<coefficient> <label>', got {raw!r}")
        try:
            coef = float(parts[0])
        except ValueError:
            raise HamiltonianParseError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        if not np.isfinite(coef):
            raise HamiltonianParseError(f"line {lineno}: coefficient is not finite")
        label = parts[1].upper()
        if set(label) - _VALID:
            raise HamiltonianParseError(f"line {lineno}: bad Pauli label {parts[1]!r}")
        if width is None:
            width = len(label)
        elif len(label) != width:
            raise HamiltonianParseError(
                f"line {lineno}: inconsistent label length {len(label)} (expected {width})"
            )
        terms.append((coef, label))
    if not terms:
        raise HamiltonianParseError("no Hamiltonian terms found")
    return PauliHamiltonian(tuple(terms), width)


def load_hamiltonian(path: str | Path) -> PauliHamiltonian:
    return parse_hamiltonian(Path(path).read_text())


def packaged_hamiltonian(name: str) -> PauliHamiltonian:
    """Load a shipped file, e.g. ``"h2_sto3g_2q.txt"`` or ``"lih_4q.txt"``."""
    return parse_hamiltonian(resources.files("pulseforge.data").joinpath(name).read_text())


def expectation(state, h: PauliHamiltonian) -> float:
    """``sum_k c_k <psi|P_k|psi>`` evaluated term by term."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**h.n_qubits,):
        raise ValueError(f"state of length {state.shape[0]} does not match {h.n_qubits} qubits")
    value = sum(c * np.vdot(state, apply_pauli(state, lab)) for c, lab in h.terms)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def dense_expectation(state, h: PauliHamiltonian) -> float:
    """Same as :func:`expectation` through the cached dense matrix."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**h.n_qubits,):
        raise ValueError(f"state of length {state.shape[0]} does not match {h.n_qubits} qubits")
    return float(np.vdot(state, h.to_matrix() @ state).real)
