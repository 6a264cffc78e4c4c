"""scikit-learn style wrappers around templates, metrics and VQE.

The functional API in :mod:`pulseforge.templates`, :mod:`pulseforge.metrics`
and :mod:`pulseforge.vqa` does the work; these classes add ``get_params`` /
``set_params``, fitted attributes and input validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from pulseforge import metrics
from pulseforge.device import device_for
from pulseforge.templates import (
    TemplateSpec,
    ansatz_state,
    parameter_bounds,
    parameter_layout,
    sample_parameters,
)
from pulseforge.validation import check_parameter_matrix, check_random_state
from pulseforge.vqa.hamiltonian import PauliHamiltonian, dense_expectation
from pulseforge.vqa.optimize import OptimizerConfig
from pulseforge.vqa.vqe import vqe


class PulseAnsatz(TransformerMixin, BaseEstimator):
    """Maps rows of parameters to output statevectors.

    Parameters
    ----------
    template : str or int
        Template name or pulse id 1-12.
    n_qubits, n_layers : int
    fixed_fields : tuple of str
        Pulse fields held at their calibrated defaults.
    device : DeviceModel, optional
    seed : int, optional
        Layout seed for random templates.

    Examples
    --------
    >>> ansatz = PulseAnsatz("HE", n_qubits=2).fit()
    >>> states = ansatz.transform(ansatz.sample(3, random_state=0))
    >>> states.shape
    (3, 4)
    """

    def __init__(self, template="HE", n_qubits=2, n_layers=1, fixed_fields=(), device=None, seed=None):
        self.template = template
        self.n_qubits = n_qubits
        self.n_layers = n_layers
        self.fixed_fields = fixed_fields
        self.device = device
        self.seed = seed

    def fit(self, X=None, y=None):
        self.spec_ = TemplateSpec(
            self.template, self.n_qubits, self.n_layers, frozenset(self.fixed_fields), self.seed
        )
        self.device_ = device_for(self.n_qubits, self.device)
        self.layout_ = parameter_layout(self.spec_)
        self.n_params_ = len(self.layout_)
        self.bounds_ = parameter_bounds(self.spec_)
        if X is not None:
            check_parameter_matrix(X, self.n_params_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        X = check_parameter_matrix(X, self.n_params_)
        return np.array([ansatz_state(self.spec_, row, self.device_) for row in X])

    def sample(self, n_samples: int, random_state=None) -> np.ndarray:
        check_is_fitted(self, "spec_")
        rng = check_random_state(random_state)
        return np.array([sample_parameters(self.spec_, rng=rng).values for _ in range(n_samples)])


class MetricProfiler(BaseEstimator):
    """Computes a :class:`~pulseforge.metrics.MetricReport` for a fitted ansatz."""

    def __init__(self, n_samples=5000, ent_samples=500, bins=50, epd_points=5, seed=0, n_jobs=1):
        self.n_samples = n_samples
        self.ent_samples = ent_samples
        self.bins = bins
        self.epd_points = epd_points
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, ansatz, y=None):
        if isinstance(ansatz, PulseAnsatz):
            if not hasattr(ansatz, "spec_"):
                ansatz.fit()
            spec, device = ansatz.spec_, ansatz.device_
        elif isinstance(ansatz, TemplateSpec):
            spec, device = ansatz, None
        else:
            raise TypeError(f"expected a PulseAnsatz or TemplateSpec, got {type(ansatz).__name__}")
        self.report_ = metrics.profile(
            spec,
            device,
            n_samples=self.n_samples,
            ent_samples=self.ent_samples,
            bins=self.bins,
            epd_points=self.epd_points,
            seed=self.seed,
            n_jobs=self.n_jobs,
        )
        return self


class VQESolver(BaseEstimator):
    """Variational ground-state search; ``fit`` takes a :class:`PauliHamiltonian`."""

    def __init__(
        self,
        template="HE_fixCR",
        n_layers=1,
        method="SPSA",
        max_iterations=500,
        restarts=1,
        calibrate=True,
        seed=0,
        device=None,
    ):
        self.template = template
        self.n_layers = n_layers
        self.method = method
        self.max_iterations = max_iterations
        self.restarts = restarts
        self.calibrate = calibrate
        self.seed = seed
        self.device = device

    def fit(self, hamiltonian: PauliHamiltonian, y=None):
        if not isinstance(hamiltonian, PauliHamiltonian):
            raise TypeError("fit expects a PauliHamiltonian")
        self.spec_ = TemplateSpec(self.template, hamiltonian.n_qubits, self.n_layers)
        config = OptimizerConfig(
            method=self.method,
            max_iterations=self.max_iterations,
            seed=self.seed,
            calibrate=self.calibrate,
        )
        self.trace_ = vqe(hamiltonian, self.spec_, self.device, config, restarts=self.restarts)
        self.theta_ = self.trace_.best_theta
        self.energy_ = self.trace_.best_energy
        return self

    def state(self) -> np.ndarray:
        check_is_fitted(self, "theta_")
        return ansatz_state(self.spec_, self.theta_, self.device)

    def score(self, hamiltonian: PauliHamiltonian, y=None) -> float:
        """Negative energy of the fitted state (higher is better)."""
        return -dense_expectation(self.state(), hamiltonian)
