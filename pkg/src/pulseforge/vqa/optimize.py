"""Gradient-free optimizers: SPSA and a Nelder-Mead wrapper."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

METHODS = ("SPSA", "NELDER_MEAD")


class OptimizationError(RuntimeError):
    """Raised on a non-finite objective; carries the trace up to that point."""

    def __init__(self, message: str, trace: VQETrace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "SPSA"
    max_iterations: int = 500
    a: float = 0.2
    c: float = 0.1
    A: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    seed: int = 0
    calibrate: bool = False
    target_step: float = 0.2 * math.pi
    calibration_samples: int = 25

    def __post_init__(self):
        method = self.method.upper().replace("-", "_")
        if method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        object.__setattr__(self, "method", method)
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if min(self.a, self.c, self.alpha, self.gamma, self.target_step) <= 0 or self.A < 0:
            raise ValueError("SPSA gains must be positive")
        if self.calibration_samples < 1:
            raise ValueError("calibration_samples must be >= 1")


def theta_digest(theta) -> str:
    return hashlib.sha256(np.ascontiguousarray(theta, dtype=float).tobytes()).hexdigest()[:12]


@dataclass
class VQETrace:
    iterations: list = field(default_factory=list)
    best_energy: float = math.inf
    best_theta: np.ndarray | None = None
    evaluations: int = 0
    seed: int = 0
    method: str = "SPSA"

    def record(self, step: int, theta, energy: float) -> None:
        self.iterations.append((step, theta_digest(theta), float(energy)))
        if energy < self.best_energy:
            self.best_energy = float(energy)
            self.best_theta = np.array(theta, dtype=float)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for _, _, e in self.iterations])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "energy"])
        for step, _, e in self.iterations:
            w.writerow([step, f"{e:.12f}"])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "iterations": len(self.iterations),
            "evaluations": self.evaluations,
            "best_energy": self.best_energy,
            "best_theta": None if self.best_theta is None else [float(v) for v in self.best_theta],
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


class _Box:
    """Affine map to search coordinates ``u = (theta - lo) / scale``.

    Bounded coordinates are clamped, ``periodic`` ones wrapped.
    """

    def __init__(self, n, bounds, periodic, scales):
        if bounds is None:
            self.lo, self.hi = np.full(n, -np.inf), np.full(n, np.inf)
        else:
            self.lo, self.hi = (np.asarray(b, dtype=float) for b in bounds)
            if self.lo.shape != (n,) or self.hi.shape != (n,) or np.any(self.hi <= self.lo):
                raise ValueError("bounds must be two length-P arrays with lo < hi")
        if scales is None:
            scales = np.ones(n) if bounds is None else self.hi - self.lo
        self.scale = np.asarray(scales, dtype=float)
        if self.scale.shape != (n,) or np.any(self.scale <= 0):
            raise ValueError("scales must be a positive length-P array")
        self.origin = np.where(np.isfinite(self.lo), self.lo, 0.0)
        self.periodic = np.zeros(n, bool) if periodic is None else np.asarray(periodic, bool)

    def to_unit(self, theta):
        return (theta - self.origin) / self.scale

    def from_unit(self, u):
        return self.origin + u * self.scale

    def project(self, u):
        theta = self.from_unit(u)
        width = self.hi - self.lo
        wrap = self.periodic & np.isfinite(width)
        # neutral origin and period on the other coordinates keep the arithmetic finite
        lo = np.where(wrap, self.lo, 0.0)
        wrapped = lo + np.mod(theta - lo, np.where(wrap, width, 1.0))
        theta = np.where(wrap, wrapped, np.clip(theta, self.lo, self.hi))
        return self.to_unit(theta)


def _evaluate(objective, theta, trace):
    value = float(objective(theta))
    trace.evaluations += 1
    if not math.isfinite(value):
        raise OptimizationError(
            f"objective returned {value} at evaluation {trace.evaluations}", trace
        )
    return value


def calibrate_gain(f, u, config: OptimizerConfig, rng) -> float:
    """Pick ``a`` so the first step has magnitude ``target_step`` on average."""
    c = config.c
    mags = []
    for _ in range(config.calibration_samples):
        delta = rng.choice((-1.0, 1.0), size=u.size)
        mags.append(abs(f(u + c * delta) - f(u - c * delta)) / (2 * c))
    mean = float(np.mean(mags))
    if mean == 0.0:
        return config.a
    return config.target_step * (config.A + 1) ** config.alpha / mean


def spsa(objective, theta0, config: OptimizerConfig, bounds=None, periodic=None, scales=None) -> VQETrace:
    """Simultaneous-perturbation descent.

    The search runs in coordinates ``(theta - lo) / scales``; ``scales``
    defaults to the bound widths (unit box) or 1 when unbounded.
    """
    theta0 = np.asarray(theta0, dtype=float)
    rng = np.random.default_rng(config.seed)
    box = _Box(theta0.size, bounds, periodic, scales)
    trace = VQETrace(seed=config.seed, method="SPSA")

    def f(u):
        return _evaluate(objective, box.from_unit(box.project(u)), trace)

    u = box.project(box.to_unit(theta0))
    trace.record(0, box.from_unit(u), f(u))
    a = calibrate_gain(f, u, config, rng) if config.calibrate else config.a
    for k in range(config.max_iterations):
        ak = a / (k + 1 + config.A) ** config.alpha
        ck = config.c / (k + 1) ** config.gamma
        delta = rng.choice((-1.0, 1.0), size=u.size)
        grad = (f(u + ck * delta) - f(u - ck * delta)) / (2 * ck) * delta
        u = box.project(u - ak * grad)
        trace.record(k + 1, box.from_unit(u), f(u))
    return trace


def nelder_mead(objective, theta0, config: OptimizerConfig, bounds=None) -> VQETrace:
    """Bounded simplex search (scipy); one trace entry per simplex iteration."""
    theta0 = np.asarray(theta0, dtype=float)
    trace = VQETrace(seed=config.seed, method="NELDER_MEAD")
    seen: dict[bytes, float] = {}

    def fun(x):
        value = _evaluate(objective, x, trace)
        seen[np.asarray(x, dtype=float).tobytes()] = value
        return value

    def callback(xk):
        key = np.asarray(xk, dtype=float).tobytes()
        value = seen[key] if key in seen else fun(xk)
        trace.record(len(trace.iterations), xk, value)

    trace.record(0, theta0, fun(theta0))
    minimize(
        fun,
        theta0,
        method="Nelder-Mead",
        bounds=None if bounds is None else list(zip(*bounds)),
        callback=callback,
        options={"maxiter": config.max_iterations, "xatol": 1e-10, "fatol": 1e-14},
    )
    return trace


def optimize(
    objective, theta0, config: OptimizerConfig | None = None, bounds=None, periodic=None, scales=None
) -> VQETrace:
    """Minimize ``objective`` from ``theta0``; deterministic per ``config.seed``."""
    config = config or OptimizerConfig()
    if config.method == "SPSA":
        return spsa(objective, theta0, config, bounds, periodic, scales)
    return nelder_mead(objective, theta0, config, bounds)
