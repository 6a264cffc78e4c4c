"""Variational eigensolver over pulse templates and gate baselines."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from pulseforge.constraints import ConstraintSpec
from pulseforge.device import DeviceModel, device_for
from pulseforge.templates import (
    TemplateSpec,
    ansatz_duration,
    ansatz_state,
    parameter_bounds,
    parameter_layout,
    sample_parameters,
)
from pulseforge.vqa.hamiltonian import PauliHamiltonian, dense_expectation
from pulseforge.vqa.optimize import OptimizerConfig, VQETrace, optimize


def small_rotation_window(lo: float, hi: float) -> tuple[float, float]:
    """The third of ``[lo, hi]`` closest to zero amplitude."""
    width = (hi - lo) / 3
    if lo < 0 < hi:
        return max(lo, -width / 2), min(hi, width / 2)
    if lo >= 0:
        return lo, lo + width
    return hi - width, hi


def initial_point(spec: TemplateSpec, constraints: ConstraintSpec | None, rng) -> np.ndarray:
    c = constraints or ConstraintSpec()
    window = small_rotation_window(*c.amplitude_range)
    return sample_parameters(spec, c, rng, amplitude_range=window).values


def natural_scales(spec: TemplateSpec, device: DeviceModel | None = None, constraints=None) -> np.ndarray:
    """Per-parameter search scales of roughly one radian of rotation each.

    Amplitudes use the calibrated pi-pulse amplitude over pi, angles 1, and
    durations their range width over 2 pi.
    """
    device = device_for(spec.n_qubits, device)
    lo, hi = parameter_bounds(spec, constraints)
    out = np.ones(len(lo))
    for i, slot in enumerate(parameter_layout(spec)):
        if slot.field == "amplitude":
            out[i] = abs(device.cal_amplitude) / np.pi
        elif slot.field == "duration":
            out[i] = (hi[i] - lo[i]) / (2 * np.pi)
    return out


def make_objective(h: PauliHamiltonian, spec: TemplateSpec, device: DeviceModel | None = None):
    """``theta -> <psi(theta)|H|psi(theta)>``; durations snap inside the evaluation."""
    if h.n_qubits != spec.n_qubits:
        raise ValueError(
            f"Hamiltonian acts on {h.n_qubits} qubits, template {spec.label} on {spec.n_qubits}"
        )
    device = device_for(spec.n_qubits, device)

    def objective(theta):
        return dense_expectation(ansatz_state(spec, theta, device), h)

    return objective


def restart_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(restart,)).generate_state(1)[0])


def vqe(
    h: PauliHamiltonian,
    spec: TemplateSpec,
    device: DeviceModel | None = None,
    config: OptimizerConfig | None = None,
    restarts: int = 1,
    constraints: ConstraintSpec | None = None,
    theta0=None,
) -> VQETrace:
    """Minimize the energy of ``h`` over ``spec``; returns the best restart's trace.

    Restart ``r`` draws its start point and SPSA perturbations from a stream
    derived from ``(config.seed, r)``.
    """
    config = config or OptimizerConfig()
    objective = make_objective(h, spec, device)
    bounds = parameter_bounds(spec, constraints)
    periodic = np.array([slot.field == "angle" for slot in parameter_layout(spec)], dtype=bool)
    scales = natural_scales(spec, device, constraints)
    best = None
    for r in range(max(restarts, 1)):
        sub = replace(config, seed=restart_seed(config.seed, r))
        rng = np.random.default_rng(sub.seed)
        start = initial_point(spec, constraints, rng) if theta0 is None else np.asarray(theta0, float)
        trace = optimize(objective, start, sub, bounds=bounds, periodic=periodic, scales=scales)
        trace.seed = config.seed
        if best is None or trace.best_energy < best.best_energy:
            best = trace
    return best


def vqe_summary(
    h: PauliHamiltonian, spec: TemplateSpec, trace: VQETrace, device: DeviceModel | None = None
) -> dict:
    from pulseforge.qcore import exact_ground_energy

    exact = exact_ground_energy(h)
    device = device_for(spec.n_qubits, device)
    return {
        "template": spec.label,
        "n_qubits": spec.n_qubits,
        "n_layers": spec.n_layers,
        "best_energy": trace.best_energy,
        "exact_ground_energy": exact,
        "gap": trace.best_energy - exact,
        "duration_dt": ansatz_duration(spec, trace.best_theta, device),
        "iterations": len(trace.iterations),
        "evaluations": trace.evaluations,
        "method": trace.method,
        "seed": trace.seed,
    }
