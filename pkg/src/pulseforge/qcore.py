"""Dense statevector kernel.

Qubit ``k`` is bit ``k`` of the basis-state index (qubit 0 is least
significant). Pauli labels are read the same way: character ``k`` of the
label acts on qubit ``k``. A multi-qubit operator passed to
:func:`apply_embedded_unitary` is written in tensor-product order, its first
factor acting on ``targets[0]``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from pulseforge.validation import check_n_qubits, check_statevector

MAX_DENSE_QUBITS = 12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class CapacityError(ValueError):
    """Raised when a dense computation would exceed the qubit cap."""


def _check_label(label: str) -> str:
    if not isinstance(label, str) or not label:
        raise ValueError("Pauli label must be a nonempty string")
    bad = set(label) - set("IXYZ")
    if bad:
        raise ValueError(f"invalid Pauli character(s) {sorted(bad)} in {label!r}")
    return label


@lru_cache(maxsize=4096)
def _pauli_operator_cached(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(PAULI[ch], out)
    out.setflags(write=False)
    return out


def pauli_operator(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string; ``label[k]`` acts on qubit ``k``."""
    _check_label(label)
    if len(label) > MAX_DENSE_QUBITS:
        raise CapacityError(f"{len(label)} qubits exceeds dense cap {MAX_DENSE_QUBITS}")
    return _pauli_operator_cached(label)


def apply_pauli(state: np.ndarray, label: str) -> np.ndarray:
    """Return ``P|state>`` without building the dense operator."""
    _check_label(label)
    n = len(label)
    if state.shape != (2**n,):
        raise ValueError(f"state of length {state.shape[0]} does not match {n}-qubit label")
    idx = np.arange(2**n)
    flip = 0
    phase = np.ones(2**n, dtype=complex)
    for k, ch in enumerate(label):
        bit = (idx >> k) & 1
        if ch in "XY":
            flip |= 1 << k
        if ch == "Z":
            phase *= 1 - 2 * bit
        elif ch == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>; phase is picked by the source bit
            phase *= 1j * (1 - 2 * bit)
    out = np.empty_like(state, dtype=complex)
    out[idx ^ flip] = phase * state
    return out


def zero_state(n_qubits: int) -> np.ndarray:
    n_qubits = check_n_qubits(n_qubits)
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bits: Sequence[int]) -> np.ndarray:
    """Computational basis state with ``bits[k]`` the value of qubit ``k``."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[sum(int(b) << k for k, b in enumerate(bits))] = 1.0
    return psi


def apply_embedded_unitary(
    state: np.ndarray, u: np.ndarray, targets: Sequence[int]
) -> np.ndarray:
    """Apply a k-qubit operator to the listed qubits of ``state``.

    Parameters
    ----------
    state : ndarray of shape (2**n,)
    u : ndarray of shape (2**k, 2**k)
        Tensor-product order: the first factor acts on ``targets[0]``.
    targets : sequence of int
        Distinct qubit indices.

    Returns
    -------
    ndarray
        New state; the input is not modified.
    """
    state = np.asarray(state, dtype=complex)
    n = int(np.log2(state.shape[0]))
    if state.shape != (2**n,):
        raise ValueError("state length must be a power of two")
    targets = [int(t) for t in targets]
    k = len(targets)
    if len(set(targets)) != k:
        raise IndexError(f"duplicate target qubits {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise IndexError(f"target qubits {targets} out of range for {n} qubits")
    if u.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {u.shape} does not act on {k} qubits")
    # numpy reshape of a little-endian index puts qubit n-1 on axis 0
    psi = state.reshape((2,) * n)
    axes = [n - 1 - t for t in targets]
    u_t = u.reshape((2,) * (2 * k))
    out = np.tensordot(u_t, psi, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the k new axes first; move them back into place
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def embed_operator(u: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``u`` acting on ``targets``."""
    if n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds dense cap {MAX_DENSE_QUBITS}")
    dim = 2**n_qubits
    cols = [apply_embedded_unitary(col, u, targets) for col in np.eye(dim, dtype=complex)]
    return np.array(cols).T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Pure-state fidelity ``|<a|b>|**2``, clipped to [0, 1]."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    f = abs(np.vdot(a, b)) ** 2
    return float(min(max(f, 0.0), 1.0))


def partial_trace(state: np.ndarray, keep: int) -> np.ndarray:
    """Single-qubit reduced density matrix of qubit ``keep``."""
    state = check_statevector(state)
    n = int(np.log2(state.shape[0]))
    if not 0 <= keep < n:
        raise IndexError(f"qubit {keep} out of range for {n} qubits")
    psi = np.moveaxis(state.reshape((2,) * n), n - 1 - keep, 0).reshape(2, -1)
    return psi @ psi.conj().T


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def exact_ground_energy(hamiltonian) -> float:
    """Smallest eigenvalue of a :class:`~pulseforge.vqa.PauliHamiltonian`."""
    if hamiltonian.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(
            f"{hamiltonian.n_qubits} qubits exceeds dense cap {MAX_DENSE_QUBITS}"
        )
    return float(np.linalg.eigvalsh(hamiltonian.to_matrix())[0])


def is_unitary(u: np.ndarray, atol: float = 1e-9) -> bool:
    eye = np.eye(u.shape[0])
    return bool(np.linalg.norm(u.conj().T @ u - eye) <= atol)
