import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pulseforge.estimators import MetricProfiler, PulseAnsatz, VQESolver
from pulseforge.templates import TemplateSpec, ansatz_state
from pulseforge.vqa import packaged_hamiltonian, parse_hamiltonian


def test_params_and_clone():
    est = PulseAnsatz("DECAY", n_qubits=3, n_layers=2)
    assert est.get_params()["template"] == "DECAY"
    copy = clone(est.set_params(n_layers=1))
    assert copy.get_params() == est.get_params()
    assert clone(VQESolver(restarts=4)).restarts == 4
    assert clone(MetricProfiler(bins=20)).bins == 20


def test_ansatz_transform_matches_functional_route(device):
    est = PulseAnsatz("HE", n_qubits=2, device=device).fit()
    X = est.sample(4, random_state=1)
    assert X.shape == (4, est.n_params_)
    states = est.transform(X)
    for row, psi in zip(X, states):
        np.testing.assert_allclose(psi, ansatz_state(TemplateSpec("HE", 2), row, device))


def test_ansatz_checks():
    est = PulseAnsatz("HE", n_qubits=2)
    with pytest.raises(NotFittedError):
        est.transform(np.zeros((1, 7)))
    est.fit()
    with pytest.raises(ValueError):
        est.transform(np.zeros((1, 6)))
    X = est.sample(2, random_state=0)
    assert PulseAnsatz("HE", n_qubits=2).fit_transform(X).shape == (2, 4)


def test_fixed_fields_param():
    est = PulseAnsatz("DECAY", n_qubits=2, fixed_fields=("sqp_duration",)).fit()
    assert est.n_params_ == 9 - 2


def test_profiler():
    prof = MetricProfiler(n_samples=60, ent_samples=30, epd_points=1).fit(PulseAnsatz("BLOCK", n_qubits=2))
    assert prof.report_.n_params == 11
    with pytest.raises(TypeError):
        MetricProfiler().fit("HE")


def test_solver():
    h = parse_hamiltonian("1.0 ZZ")
    solver = VQESolver("DRESSED_2Q", max_iterations=300, seed=1).fit(h)
    assert solver.energy_ <= -0.99
    assert solver.score(h) == pytest.approx(-solver.energy_, abs=1e-12)
    with pytest.raises(TypeError):
        VQESolver().fit("1 ZZ")
    with pytest.raises(NotFittedError):
        VQESolver().state()
