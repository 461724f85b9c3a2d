"""Tomographic readout modeled as direct product-operator expectations.

Each non-identity pattern ``s`` contributes the coefficient
``c_s = Tr(rho B_s) / Tr(B_s B_s)``, so ``rho = I/2^n + sum_s c_s B_s`` for
a unit-trace state. Measurement error is homoscedastic Gaussian noise on
every coefficient.
"""

from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sepent.linalg import as_matrix, hermitian_eigen, num_qubits
from sepent.product_ops import all_patterns, basis_norm, basis_operator, pattern_from_text, pattern_to_text


@dataclass
class ExpectationSet:
    n_qubits: int
    coefficients: dict  # pattern tuple -> float

    def __post_init__(self):
        expected = set(all_patterns(self.n_qubits, include_identity=False))
        got = set(self.coefficients)
        if got != expected:
            missing = len(expected - got)
            extra = len(got - expected)
            raise ValueError(
                f"expectation set for {self.n_qubits} qubits needs exactly {len(expected)} "
                f"patterns ({missing} missing, {extra} unexpected)"
            )
        for p, v in self.coefficients.items():
            if not np.isfinite(v):
                raise ValueError(f"non-finite expectation for {pattern_to_text(p)}")

    def patterns(self) -> list:
        return all_patterns(self.n_qubits, include_identity=False)

    def values(self) -> np.ndarray:
        return np.array([self.coefficients[p] for p in self.patterns()])

    def to_json(self) -> dict:
        return {pattern_to_text(p): self.coefficients[p] for p in self.patterns()}

    @classmethod
    def from_json(cls, obj: dict, n_qubits: int) -> "ExpectationSet":
        coefs = {pattern_from_text(k, n_qubits): float(v) for k, v in obj.items()}
        return cls(n_qubits, coefs)


@lru_cache(maxsize=None)
def _basis_stack(n: int) -> tuple:
    """Non-identity patterns, their stacked matrices and norms, shared read-only."""
    pats = tuple(all_patterns(n, include_identity=False))
    mats = np.array([basis_operator(p) for p in pats])
    norms = np.array([basis_norm(p) for p in pats])
    mats.setflags(write=False)
    norms.setflags(write=False)
    return pats, mats, norms


def expectations(rho) -> ExpectationSet:
    rho = as_matrix(rho)
    n = num_qubits(rho.shape[0])
    pats, mats, norms = _basis_stack(n)
    # Tr(rho B) for every B at once; B is Hermitian so Tr(rho B) = sum(rho * B.T).
    values = np.einsum("ij,kji->k", rho, mats).real / norms
    return ExpectationSet(n, {p: float(v) for p, v in zip(pats, values)})


def add_noise(e: ExpectationSet, sigma: float, seed) -> ExpectationSet:
    """Perturb every coefficient by independent N(0, sigma^2) noise.

    ``seed`` is anything ``numpy.random.default_rng`` accepts, including a
    ``Generator``, whose state then advances.
    """
    if not sigma >= 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return ExpectationSet(e.n_qubits, dict(e.coefficients))
    rng = np.random.default_rng(seed)
    pats = e.patterns()
    noise = rng.normal(0.0, sigma, size=len(pats))
    return ExpectationSet(e.n_qubits, {p: e.coefficients[p] + float(x) for p, x in zip(pats, noise)})


def physical_projection(m) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize to unit trace."""
    w, v = hermitian_eigen(m, vectors=True)
    w = np.clip(w, 0, None)
    if w.sum() <= 0:
        raise ValueError("no positive spectrum left after clipping")
    w = w / w.sum()
    return (v * w) @ v.conj().T


def reconstruct(e: ExpectationSet, physical: bool = False) -> np.ndarray:
    dim = 2**e.n_qubits
    pats, mats, _ = _basis_stack(e.n_qubits)
    m = np.eye(dim, dtype=complex) / dim
    m = m + np.tensordot(np.array([e.coefficients[p] for p in pats]), mats, axes=1)
    return physical_projection(m) if physical else m


def write_expectations(path, e: ExpectationSet) -> None:
    Path(path).write_text(json.dumps(e.to_json(), indent=1) + "\n")


def read_expectations(path, n_qubits: int) -> ExpectationSet:
    return ExpectationSet.from_json(json.loads(Path(path).read_text()), n_qubits)
