import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulseforge.qcore import exact_ground_energy
from pulseforge.vqa.portfolio import (
    PortfolioProblem,
    bitstring_of_index,
    load_portfolio,
    packaged_portfolio,
    portfolio_to_ising,
    random_portfolio,
)


def brute_force_energies(h):
    """Diagonal of a Z-only Hamiltonian by evaluating each string on each bitstring."""
    out = []
    for index in range(2**h.n_qubits):
        bits = bitstring_of_index(index, h.n_qubits)
        total = 0.0
        for c, lab in h:
            sign = 1
            for k, ch in enumerate(lab):
                if ch == "Z" and bits[k]:
                    sign = -sign
            total += c * sign
        out.append(total)
    return np.array(out)


def test_zero_problem():
    h = portfolio_to_ising(PortfolioProblem(np.zeros(3), np.zeros((3, 3))))
    assert h.terms == ((0.0, "III"),)


def test_hand_expansion():
    p = PortfolioProblem([1.0, 0.0], np.zeros((2, 2)), 0.5)
    h = portfolio_to_ising(p)
    assert dict((lab, c) for c, lab in h) == {"II": -0.5, "ZI": 0.5}
    e = brute_force_energies(h)
    assert e.min() == -1.0 and int(e.argmin()) == 1
    assert bitstring_of_index(1, 2) == (1, 0)
    assert p.brute_force() == (-1.0, (1, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31), st.booleans())
def test_energies_equal_costs(n, seed, with_budget):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n))
    p = PortfolioProblem(
        rng.normal(size=n), g @ g.T, rng.uniform(0, 1), budget=int(rng.integers(0, n + 1)) if with_budget else None, penalty=rng.uniform(0.1, 2)
    )
    h = portfolio_to_ising(p)
    costs = [p.cost(bitstring_of_index(i, n)) for i in range(2**n)]
    np.testing.assert_allclose(brute_force_energies(h), costs, atol=1e-12)
    np.testing.assert_allclose(h.diagonal(), costs, atol=1e-12)


@pytest.mark.parametrize("n, strings", [(2, 3), (4, 10)])
def test_shipped_instances(n, strings):
    p = packaged_portfolio(n)
    h = portfolio_to_ising(p)
    assert h.n_pauli_strings() == strings
    assert h.is_diagonal
    best, x = p.brute_force()
    assert abs(exact_ground_energy(h) - best) <= 1e-12
    assert any(x), "optimum should select at least one asset"
    # the term count never exceeds 1 + n + n(n-1)/2 without a budget
    assert len(h) <= 1 + n + n * (n - 1) // 2


def test_shipped_instances_regenerate():
    for n, seed in ((2, 205), (4, 400)):
        fresh = random_portfolio(n, seed)
        shipped = packaged_portfolio(n)
        np.testing.assert_array_equal(fresh.expected_returns, shipped.expected_returns)
        np.testing.assert_array_equal(fresh.covariance, shipped.covariance)


def test_roundtrip(tmp_path):
    p = random_portfolio(3, 7)
    path = tmp_path / "p.json"
    import json

    path.write_text(json.dumps(p.to_dict()))
    q = load_portfolio(path)
    np.testing.assert_array_equal(q.covariance, p.covariance)
    assert q.seed == 7


def test_validation():
    with pytest.raises(ValueError):
        PortfolioProblem([1.0, 2.0], [[1.0, 0.1], [0.2, 1.0]])
    with pytest.raises(ValueError):
        PortfolioProblem([1.0, 2.0], np.eye(3))
    with pytest.warns(UserWarning):
        PortfolioProblem([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])


def test_budget_penalty_steers_optimum():
    p = PortfolioProblem([1.0, 1.0, 1.0], np.zeros((3, 3)), budget=1, penalty=10.0)
    cost, x = p.brute_force()
    assert sum(x) == 1
    assert exact_ground_energy(portfolio_to_ising(p)) == pytest.approx(cost, abs=1e-12)
