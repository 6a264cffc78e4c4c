"""Variational eigensolver harness: Hamiltonians, optimizers and benchmarks."""

from pulseforge.vqa.hamiltonian import (
    HamiltonianParseError,
    PauliHamiltonian,
    dense_expectation,
    expectation,
    load_hamiltonian,
    packaged_hamiltonian,
    parse_hamiltonian,
)
from pulseforge.vqa.optimize import OptimizationError, OptimizerConfig, VQETrace, optimize
from pulseforge.vqa.portfolio import (
    PortfolioProblem,
    load_portfolio,
    packaged_portfolio,
    portfolio_to_ising,
    random_portfolio,
)
from pulseforge.vqa.vqe import vqe, vqe_summary

__all__ = [
    "HamiltonianParseError",
    "OptimizationError",
    "OptimizerConfig",
    "PauliHamiltonian",
    "PortfolioProblem",
    "VQETrace",
    "dense_expectation",
    "expectation",
    "load_hamiltonian",
    "load_portfolio",
    "optimize",
    "packaged_hamiltonian",
    "packaged_portfolio",
    "parse_hamiltonian",
    "portfolio_to_ising",
    "random_portfolio",
    "vqe",
    "vqe_summary",
]
