"""Ideal-gate execution of the three-qubit protocol.

Qubit 1 (A) and qubit 2 (B) are the data qubits, qubit 3 (C) the ancilla.
CNOT from A onto C, then CNOT from B onto C.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from sepent import tolerances
from sepent.linalg import as_matrix, conjugate, embed, num_qubits, projector_on
from sepent.states import check_density_matrix, initial_state


@dataclass
class ProtocolTrace:
    rho0: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray

    def stages(self) -> dict:
        return {"rho0": self.rho0, "rho1": self.rho1, "rho2": self.rho2}


@dataclass
class MeasurementResult:
    qubit: int
    probabilities: tuple
    post_states: tuple

    def conditional(self, outcome: int) -> np.ndarray:
        """Post-measurement state for ``outcome``; refuses improbable outcomes."""
        state = self.post_states[outcome]
        if state is None:
            raise ValueError(
                f"outcome {outcome} on qubit {self.qubit} has probability "
                f"{self.probabilities[outcome]:.3g}; cannot condition on it"
            )
        return state


def cnot(control: int, target: int, n: int) -> np.ndarray:
    """CNOT as a basis permutation on ``n`` qubits (1-based indices)."""
    if control == target:
        raise ValueError("control and target must differ")
    for q in (control, target):
        if not 1 <= q <= n:
            raise ValueError(f"qubit {q} out of range 1..{n}")
    dim = 2**n
    cbit = 1 << (n - control)
    tbit = 1 << (n - target)
    u = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        j = i ^ tbit if i & cbit else i
        u[j, i] = 1
    return u


def apply(u, rho) -> np.ndarray:
    return conjugate(u, rho)


def run_protocol(rho0: Optional[np.ndarray] = None) -> ProtocolTrace:
    rho0 = initial_state() if rho0 is None else check_density_matrix(rho0)
    rho1 = apply(cnot(1, 3, 3), rho0)
    rho2 = apply(cnot(2, 3, 3), rho1)
    return ProtocolTrace(rho0, rho1, rho2)


def measure_qubit(rho, qubit: int) -> MeasurementResult:
    """Projective computational-basis measurement of one qubit."""
    rho = as_matrix(rho)
    n = num_qubits(rho.shape[0])
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit {qubit} out of range 1..{n}")
    probs, posts = [], []
    for k in (0, 1):
        proj = embed(projector_on(k), qubit, n)
        p = float(np.trace(proj @ rho).real)
        probs.append(p)
        posts.append(proj @ rho @ proj / p if p > tolerances.EXACT else None)
    return MeasurementResult(qubit, tuple(probs), tuple(posts))
