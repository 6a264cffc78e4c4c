"""Expressivity, entanglement capability and effective parameter dimension.

Every sampling loop draws sample ``i`` from a stream keyed on ``(seed, tag,
i)``, so results do not depend on how samples are split across workers.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from pulseforge import __version__
from pulseforge.constraints import ConstraintSpec
from pulseforge.device import DeviceModel, device_for
from pulseforge.qcore import fidelity, partial_trace, purity
from pulseforge.templates import (
    TemplateSpec,
    ansatz_state,
    ansatz_unitary,
    duration_bounds,
    n_cr,
    parameter_bounds,
    parameter_layout,
    sample_parameters,
)
from pulseforge.validation import check_statevector, sample_rng

DEFAULT_BINS = 50
CHUNK = 250

# stream tags so the three samplers never share draws
_EXPR, _ENT, _EPD = 0, 1, 2

EPS_CONTINUOUS = 1e-3
EPS_DURATION = 8.0


def worker_count(n_jobs: int | None) -> int:
    """Resolve ``n_jobs``, capped by ``PULSEFORGE_THREADS`` when set."""
    n = 1 if n_jobs is None else int(n_jobs)
    if n < 0:
        n = os.cpu_count() or 1
    cap = os.environ.get("PULSEFORGE_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(n, 1)


def _run_chunks(fn, n_samples: int, n_jobs, *args) -> np.ndarray:
    chunks = [range(s, min(s + CHUNK, n_samples)) for s in range(0, n_samples, CHUNK)]
    n = worker_count(n_jobs)
    if n == 1 or len(chunks) <= 1:
        parts = [fn(*args, chunk) for chunk in chunks]
    else:
        parts = Parallel(n_jobs=n)(delayed(fn)(*args, chunk) for chunk in chunks)
    return np.concatenate(parts) if parts else np.empty(0)


# -- Haar reference and KL ------------------------------------------------------


def haar_pdf(fid: float, dim: int) -> float:
    """Fidelity density of Haar-random pure states, ``(N-1)(1-F)^(N-2)``."""
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    if not 0.0 <= fid <= 1.0:
        raise ValueError(f"fidelity {fid} outside [0, 1]")
    return (dim - 1) * (1.0 - fid) ** (dim - 2)


def haar_bin_mass(a: float, b: float, dim: int) -> float:
    """Exact Haar probability of ``a <= F <= b``."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"invalid bin [{a}, {b}]")
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    return (1.0 - a) ** (dim - 1) - (1.0 - b) ** (dim - 1)


def haar_bin_masses(bins: int, dim: int) -> np.ndarray:
    edges = np.linspace(0.0, 1.0, bins + 1)
    return np.array([haar_bin_mass(a, b, dim) for a, b in zip(edges[:-1], edges[1:])])


def kl_divergence(p, q) -> float:
    """``sum p ln(p/q)`` over bins with ``p > 0``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support sizes differ: {p.shape} vs {q.shape}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise ValueError("q has zero mass on a bin where p is positive")
    return float(max(np.sum(p[mask] * np.log(p[mask] / q[mask])), 0.0))


# -- expressivity ---------------------------------------------------------------


@dataclass
class FidelityHistogram:
    counts: np.ndarray
    edges: np.ndarray
    n_samples: int
    dim: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.n_samples, 1)

    def haar_masses(self) -> np.ndarray:
        return np.array(
            [haar_bin_mass(a, b, self.dim) for a, b in zip(self.edges[:-1], self.edges[1:])]
        )


def _fidelity_chunk(spec, device, constraints, seed, chunk):
    out = np.empty(len(chunk))
    for j, i in enumerate(chunk):
        rng = sample_rng(seed, _EXPR, i)
        a = sample_parameters(spec, constraints, rng).values
        b = sample_parameters(spec, constraints, rng).values
        out[j] = fidelity(ansatz_state(spec, a, device), ansatz_state(spec, b, device))
    return out


def sample_fidelities(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    n_samples: int = 5000,
    seed: int = 0,
    n_jobs: int | None = 1,
    constraints: ConstraintSpec | None = None,
) -> np.ndarray:
    """Fidelities between pairs of independently sampled output states."""
    device = device_for(spec.n_qubits, device)
    return _run_chunks(_fidelity_chunk, n_samples, n_jobs, spec, device, constraints, seed)


def fidelity_histogram(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    n_samples: int = 5000,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
    n_jobs: int | None = 1,
    constraints: ConstraintSpec | None = None,
) -> FidelityHistogram:
    fids = sample_fidelities(spec, device, n_samples, seed, n_jobs, constraints)
    counts, edges = np.histogram(np.clip(fids, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    return FidelityHistogram(counts, edges, n_samples, 2**spec.n_qubits)


def expressivity_from_histogram(hist: FidelityHistogram) -> float:
    return kl_divergence(hist.frequencies, hist.haar_masses())


def expressivity(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    n_samples: int = 5000,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
    n_jobs: int | None = 1,
    constraints: ConstraintSpec | None = None,
) -> float:
    """KL divergence of the sampled fidelity histogram from the Haar one (nats)."""
    hist = fidelity_histogram(spec, device, n_samples, bins, seed, n_jobs, constraints)
    return expressivity_from_histogram(hist)


# -- entanglement ---------------------------------------------------------------


def mw_q(state) -> float:
    """Meyer-Wallach Q: ``2 (1 - mean single-qubit purity)``."""
    state = check_statevector(state)
    n = int(np.log2(state.shape[0]))
    if n < 2:
        raise ValueError("Q-measure needs at least two qubits")
    mean_purity = sum(purity(partial_trace(state, k)) for k in range(n)) / n
    return float(min(max(2.0 * (1.0 - mean_purity), 0.0), 1.0))


class EntanglementResult(NamedTuple):
    mean: float
    max: float
    values: np.ndarray


def _q_chunk(spec, device, constraints, seed, chunk):
    out = np.empty(len(chunk))
    for j, i in enumerate(chunk):
        theta = sample_parameters(spec, constraints, sample_rng(seed, _ENT, i)).values
        out[j] = mw_q(ansatz_state(spec, theta, device))
    return out


def entanglement_capability(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    n_samples: int = 500,
    seed: int = 0,
    n_jobs: int | None = 1,
    constraints: ConstraintSpec | None = None,
) -> EntanglementResult:
    """Mean (and max) Q over uniformly sampled parameters."""
    if spec.n_qubits < 2:
        raise ValueError(f"{spec.label} acts on one qubit; Q is undefined")
    device = device_for(spec.n_qubits, device)
    qs = _run_chunks(_q_chunk, n_samples, n_jobs, spec, device, constraints, seed)
    if qs.size == 0:
        return EntanglementResult(float("nan"), float("nan"), qs)
    return EntanglementResult(float(qs.mean()), float(qs.max()), qs)


# -- QFI and EPD ----------------------------------------------------------------


class ProbeError(ValueError):
    """A finite-difference probe would leave the constraint box."""


@dataclass
class QFIMatrix:
    matrix: np.ndarray
    epsilon: np.ndarray
    scales: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.scales is None:
            self.scales = np.ones(self.matrix.shape[0])


def _probe_steps(spec, theta, constraints, epsilon):
    layout = parameter_layout(spec)
    lo, hi = parameter_bounds(spec, constraints)
    eps = np.empty(len(layout))
    for i, slot in enumerate(layout):
        if slot.field == "duration":
            eps[i] = EPS_DURATION if epsilon is None else max(round(epsilon * EPS_DURATION / EPS_CONTINUOUS), 1)
        else:
            eps[i] = EPS_CONTINUOUS if epsilon is None else epsilon
        # angles are periodic and need no margin
        if slot.field in ("amplitude", "duration"):
            if theta[i] - eps[i] < lo[i] or theta[i] + eps[i] > hi[i]:
                raise ProbeError(
                    f"parameter {i} ({slot.kind} {slot.field}={theta[i]:g}) is within "
                    f"{eps[i]:g} of its bound [{lo[i]:g}, {hi[i]:g}]"
                )
    return eps, hi - lo


def state_jacobian(
    spec: TemplateSpec,
    theta,
    device: DeviceModel | None = None,
    epsilon: float | None = None,
    constraints: ConstraintSpec | None = None,
):
    """Central-difference Jacobian; returns ``(psi, J, eps, scales)``.

    Durations are differentiated on the relaxed (unsnapped) schedule.
    """
    theta = np.array(theta, dtype=float)
    layout = parameter_layout(spec)
    for i, slot in enumerate(layout):
        if slot.field == "duration":
            theta[i] = round(theta[i])
    eps, scales = _probe_steps(spec, theta, constraints, epsilon)
    device = device_for(spec.n_qubits, device)
    psi = ansatz_state(spec, theta, device, snap=False)
    cols = []
    for i in range(len(theta)):
        step = np.zeros_like(theta)
        step[i] = eps[i]
        plus = ansatz_state(spec, theta + step, device, snap=False)
        minus = ansatz_state(spec, theta - step, device, snap=False)
        cols.append((plus - minus) / (2 * eps[i]))
    jac = np.array(cols).T if cols else np.zeros((psi.shape[0], 0), dtype=complex)
    return psi, jac, eps, scales


def qfi_matrix(
    spec: TemplateSpec,
    device: DeviceModel | None,
    theta,
    epsilon: float | None = None,
    constraints: ConstraintSpec | None = None,
) -> QFIMatrix:
    """``F_ij = Re(<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>)``."""
    psi, jac, eps, scales = state_jacobian(spec, theta, device, epsilon, constraints)
    overlap = jac.conj().T @ psi
    f = np.real(jac.conj().T @ jac - np.outer(overlap, overlap.conj()))
    return QFIMatrix(0.5 * (f + f.T), eps, scales)


def epd(qfi: QFIMatrix, rel_tol: float = 1e-6) -> int:
    """Numerical rank of the QFI after scaling each coordinate by its range width."""
    d = np.asarray(qfi.scales, dtype=float)
    m = qfi.matrix * np.outer(d, d)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] < 1e-12:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def interior_samples(spec: TemplateSpec, constraints, seed: int, n_points: int):
    margin = {"amplitude": 2 * EPS_CONTINUOUS, "duration": 2 * EPS_DURATION}
    return [
        sample_parameters(spec, constraints, sample_rng(seed, _EPD, i), interior=margin).values
        for i in range(n_points)
    ]


def effective_dimension(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    seed: int = 0,
    n_points: int = 5,
    rel_tol: float = 1e-6,
    constraints: ConstraintSpec | None = None,
) -> int:
    """Median state-QFI rank over ``n_points`` random interior parameter draws."""
    ranks = [
        epd(qfi_matrix(spec, device, theta, constraints=constraints), rel_tol)
        for theta in interior_samples(spec, constraints, seed, n_points)
    ]
    return int(np.median(ranks)) if ranks else 0


def unitary_rank(
    spec: TemplateSpec,
    theta,
    device: DeviceModel | None = None,
    rel_tol: float = 1e-6,
    constraints: ConstraintSpec | None = None,
) -> int:
    """Rank of the unitary Jacobian modulo global phase (at most ``4**n - 1``)."""
    theta = np.array(theta, dtype=float)
    eps, scales = _probe_steps(spec, theta, constraints, None)
    u = ansatz_unitary(spec, theta, device, snap=False)
    dim = u.shape[0]
    rows = []
    for i in range(len(theta)):
        step = np.zeros_like(theta)
        step[i] = eps[i]
        du = (ansatz_unitary(spec, theta + step, device, snap=False)
              - ansatz_unitary(spec, theta - step, device, snap=False)) / (2 * eps[i])
        gen = u.conj().T @ du
        gen -= np.trace(gen) / dim * np.eye(dim)
        rows.append(scales[i] * np.concatenate([gen.real.ravel(), gen.imag.ravel()]))
    if not rows:
        return 0
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    if s[0] < 1e-12:
        return 0
    return int(np.sum(s > math.sqrt(rel_tol) * s[0]))


# -- report ----------------------------------------------------------------------

CSV_COLUMNS = (
    "template",
    "n_qubits",
    "n_layers",
    "expr_kl",
    "ent_mean_q",
    "ent_max_q",
    "epd",
    "n_params",
    "n_cr",
    "duration_dt",
    "samples",
    "seed",
)


@dataclass
class MetricReport:
    template: str
    n_qubits: int
    n_layers: int
    expr_kl: float | None
    ent_mean_q: float | None
    ent_max_q: float | None
    epd: int | None
    n_params: int
    n_cr: int
    duration_dt: int
    samples: int
    seed: int
    duration_min_dt: int = 0
    ent_samples: int = 0
    bins: int = DEFAULT_BINS
    device_digest: str = ""
    version: str = __version__
    histogram: FidelityHistogram | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.epd is not None and self.epd > self.n_params:
            raise ValueError(f"epd {self.epd} exceeds parameter count {self.n_params}")

    def csv_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return f"{v:.6f}"
            return str(v)

        return [fmt(getattr(self, c)) for c in CSV_COLUMNS]

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop("histogram")
        return data


def profile(
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    n_samples: int = 5000,
    ent_samples: int = 500,
    bins: int = DEFAULT_BINS,
    epd_points: int = 5,
    seed: int = 0,
    n_jobs: int | None = 1,
    constraints: ConstraintSpec | None = None,
    metrics: tuple[str, ...] = ("expr", "ent", "epd"),
) -> MetricReport:
    """Evaluate the requested metrics for one template."""
    device = device_for(spec.n_qubits, device)
    expr = ent = rank = hist = None
    if "expr" in metrics and n_samples > 0:
        hist = fidelity_histogram(spec, device, n_samples, bins, seed, n_jobs, constraints)
        expr = expressivity_from_histogram(hist)
    if "ent" in metrics and spec.n_qubits >= 2 and ent_samples > 0:
        ent = entanglement_capability(spec, device, ent_samples, seed, n_jobs, constraints)
    if "epd" in metrics:
        rank = effective_dimension(spec, device, seed, epd_points, constraints=constraints)
    d_min, d_max = duration_bounds(spec, device, constraints)
    return MetricReport(
        template=spec.label,
        n_qubits=spec.n_qubits,
        n_layers=spec.n_layers,
        expr_kl=expr,
        ent_mean_q=None if ent is None else ent.mean,
        ent_max_q=None if ent is None else ent.max,
        epd=rank,
        n_params=len(parameter_layout(spec)),
        n_cr=n_cr(spec),
        duration_dt=d_max,
        samples=n_samples if expr is not None else (ent_samples if ent is not None else 0),
        seed=seed,
        duration_min_dt=d_min,
        ent_samples=ent_samples if ent is not None else 0,
        bins=bins,
        device_digest=device.digest(),
        histogram=hist,
    )
