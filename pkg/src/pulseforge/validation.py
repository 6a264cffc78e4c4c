"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numbers

import numpy as np


def check_n_qubits(n, minimum: int = 1) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"n_qubits must be an integer, got {n!r}")
    if n < minimum:
        raise ValueError(f"n_qubits must be >= {minimum}, got {n}")
    return int(n)


def check_statevector(state, normalized: bool = True, atol: float = 1e-10) -> np.ndarray:
    """Coerce to a 1-D complex array whose length is a power of two.

    With ``normalized=True`` the L2 norm must be 1 within ``atol``.
    """
    psi = np.asarray(state, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"statevector must be 1-D, got shape {psi.shape}")
    dim = psi.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise ValueError(f"statevector length {dim} is not a power of two >= 2")
    if normalized and abs(np.linalg.norm(psi) - 1.0) > atol:
        raise ValueError(f"statevector norm {np.linalg.norm(psi):.3e} is not 1")
    return psi


def check_density_matrix(rho, atol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError("density matrix trace is not 1")
    if np.linalg.eigvalsh(rho)[0] < -atol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def check_parameter_matrix(theta, n_params: int) -> np.ndarray:
    """2-D float array with ``n_params`` columns; a 1-D vector becomes one row."""
    arr = np.asarray(theta, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n_params:
        raise ValueError(
            f"expected parameters with {n_params} columns, got shape {np.shape(theta)}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("parameters contain non-finite values")
    return arr


def check_random_state(seed) -> np.random.Generator:
    """Turn ``None``, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_rng(seed: int, *key: int) -> np.random.Generator:
    """Per-sample stream keyed on ``(seed, *key)``; independent of worker layout."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))
