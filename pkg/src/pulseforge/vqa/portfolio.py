"""Mean-variance portfolio selection as an Ising Hamiltonian."""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from pulseforge.vqa.hamiltonian import PauliHamiltonian


@dataclass(frozen=True)
class PortfolioProblem:
    """Minimize ``q x^T S x - mu^T x`` over ``x in {0,1}^n``.

    With ``budget`` set, ``penalty * (sum(x) - budget)^2`` is added.
    """

    expected_returns: np.ndarray
    covariance: np.ndarray
    risk_factor: float = 0.5
    budget: int | None = None
    penalty: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        mu = np.asarray(self.expected_returns, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
            raise ValueError(f"covariance shape {cov.shape} does not match {mu.size} assets")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
            raise ValueError("covariance matrix is not symmetric")
        if mu.size and np.linalg.eigvalsh(cov)[0] < -1e-10:
            warnings.warn("covariance matrix is not positive semidefinite", stacklevel=2)
        object.__setattr__(self, "expected_returns", mu)
        object.__setattr__(self, "covariance", cov)

    @property
    def n_assets(self) -> int:
        return self.expected_returns.size

    def cost(self, x) -> float:
        x = np.asarray(x, dtype=float)
        value = self.risk_factor * x @ self.covariance @ x - self.expected_returns @ x
        if self.budget is not None:
            value += self.penalty * (x.sum() - self.budget) ** 2
        return float(value)

    def brute_force(self) -> tuple[float, tuple[int, ...]]:
        """Exhaustive minimum ``(cost, x)``; ties go to the first bitstring in index order."""
        best = None
        for index in range(2**self.n_assets):
            x = tuple((index >> k) & 1 for k in range(self.n_assets))
            c = self.cost(x)
            if best is None or c < best[0]:
                best = (c, x)
        return best

    def to_dict(self) -> dict:
        return {
            "expected_returns": self.expected_returns.tolist(),
            "covariance": self.covariance.tolist(),
            "risk_factor": self.risk_factor,
            "budget": self.budget,
            "penalty": self.penalty,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PortfolioProblem:
        return cls(
            np.array(data["expected_returns"]),
            np.array(data["covariance"]),
            data.get("risk_factor", 0.5),
            data.get("budget"),
            data.get("penalty", 1.0),
            data.get("seed"),
        )


def random_portfolio(n_assets: int, seed: int, n_periods: int = 120, risk_factor: float = 0.5) -> PortfolioProblem:
    """Sample means and covariance of a synthetic one-factor return history."""
    rng = np.random.default_rng(seed)
    drift = rng.uniform(-0.2, 1.0, n_assets)
    beta = rng.uniform(0.2, 0.6, n_assets)
    market = rng.normal(0.0, 1.0, n_periods)
    returns = drift + np.outer(market, beta) + rng.normal(0.0, 0.5, (n_periods, n_assets))
    mu = np.round(returns.mean(axis=0), 6)
    cov = np.round(np.cov(returns, rowvar=False), 6)
    return PortfolioProblem(mu, 0.5 * (cov + cov.T), risk_factor, seed=seed)


def load_portfolio(path: str | Path) -> PortfolioProblem:
    return PortfolioProblem.from_dict(json.loads(Path(path).read_text()))


def packaged_portfolio(n_assets: int) -> PortfolioProblem:
    text = resources.files("pulseforge.data").joinpath(f"portfolio{n_assets}.json").read_text()
    return PortfolioProblem.from_dict(json.loads(text))


def _label(n: int, *qubits: int) -> str:
    chars = ["I"] * n
    for q in qubits:
        chars[q] = "Z"
    return "".join(chars)


def portfolio_to_ising(problem: PortfolioProblem, tol: float = 0.0) -> PauliHamiltonian:
    """Substitute ``x_i = (1 - Z_i)/2``; terms with ``|c| <= tol`` are dropped (identity kept)."""
    n = problem.n_assets
    if n == 0:
        raise ValueError("portfolio has no assets")
    q, cov, mu = problem.risk_factor, problem.covariance, problem.expected_returns
    # cost = const + sum_i lin_i x_i + sum_{i<j} quad_ij x_i x_j  (x_i^2 = x_i)
    const = 0.0
    lin = -mu + q * np.diag(cov)
    quad = 2 * q * cov
    if problem.budget is not None:
        lam, b = problem.penalty, problem.budget
        const += lam * b * b
        lin = lin + lam * (1 - 2 * b)
        quad = quad + 2 * lam
    coeffs = {_label(n): const}
    for i in range(n):
        coeffs[_label(n)] += lin[i] / 2
        coeffs[_label(n, i)] = coeffs.get(_label(n, i), 0.0) - lin[i] / 2
    for i, j in itertools.combinations(range(n), 2):
        w = quad[i, j] / 4
        coeffs[_label(n)] += w
        coeffs[_label(n, i)] -= w
        coeffs[_label(n, j)] -= w
        coeffs[_label(n, i, j)] = w
    ident = _label(n)
    terms = [(c, lab) for lab, c in coeffs.items() if lab == ident or abs(c) > tol]
    return PauliHamiltonian(tuple(terms), n)


def bitstring_of_index(index: int, n: int) -> tuple[int, ...]:
    """Asset selection of computational basis state ``index`` (bit k = qubit k)."""
    return tuple((index >> k) & 1 for k in range(n))
