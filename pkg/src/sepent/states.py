"""Named states of the three-qubit protocol, plus the state file format.

Pure states are 1-D complex arrays and density matrices are 2-D complex
arrays; :func:`check_density_matrix` enforces the density-matrix invariants.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from sepent import tolerances
from sepent.linalg import as_matrix, hermitian_eigen, num_qubits, tensor_product

SQRT_HALF = 1 / np.sqrt(2)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def equatorial(phase: complex) -> np.ndarray:
    """``(|0> + phase |1>)/sqrt(2)`` for ``phase`` in {1, -1, i, -i}."""
    return SQRT_HALF * (KET0 + phase * KET1)


PLUS = equatorial(1)
MINUS = equatorial(-1)
PLUS_I = equatorial(1j)
MINUS_I = equatorial(-1j)


def check_pure_state(psi, tol: float = tolerances.EXACT) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("pure state must be a vector")
    num_qubits(psi.shape[0])
    norm = np.linalg.norm(psi)
    if abs(norm - 1) >= tol:
        raise ValueError(f"state is not normalized (norm {norm:.17g})")
    return psi


def check_density_matrix(rho, tol: float = tolerances.EXACT) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the array."""
    rho = as_matrix(rho)
    num_qubits(rho.shape[0])
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= tol:
        raise ValueError(f"density matrix is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) >= tol:
        raise ValueError(f"density matrix trace is {tr.real:.17g}, expected 1")
    lo = hermitian_eigen(rho).eigenvalues[0]
    if lo < -tolerances.PSD:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")
    return rho


def is_density_matrix(rho, tol: float = tolerances.EXACT) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValueError:
        return False
    return True


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_ket("001")``; leftmost bit is qubit 1."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"invalid bit string {bits!r}")
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1
    return psi


def product_ket(*kets) -> np.ndarray:
    return tensor_product(*[np.asarray(k, dtype=complex).reshape(-1, 1) for k in kets]).ravel()


def projector(psi) -> np.ndarray:
    """Density matrix ``|psi><psi|`` of a normalized ket."""
    psi = check_pure_state(psi)
    return np.outer(psi, psi.conj())


def ghz() -> np.ndarray:
    return SQRT_HALF * (basis_ket("000") + basis_ket("111"))


def bell_phi_plus() -> np.ndarray:
    return SQRT_HALF * (basis_ket("00") + basis_ket("11"))


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=complex) / 2**n


def pseudopure() -> np.ndarray:
    """The ideal pseudopure ground state ``|000><000|``."""
    return projector(basis_ket("000"))


def initial_components() -> list[np.ndarray]:
    """The six product kets mixed with equal weight in the initial state."""
    return [
        product_ket(PLUS, PLUS, KET0),
        product_ket(PLUS_I, MINUS_I, KET0),
        product_ket(MINUS, MINUS, KET0),
        product_ket(MINUS_I, PLUS_I, KET0),
        basis_ket("001"),
        basis_ket("111"),
    ]


def initial_state() -> np.ndarray:
    """Equal-weight mixture of the six separable components."""
    return sum(projector(psi) for psi in initial_components()) / 6


def post_cnot_state() -> np.ndarray:
    """Literal five-term mixture expected after CNOT from qubit 1 onto qubit 3."""
    rho = projector(ghz()) / 3
    for bits in ("001", "010", "101", "110"):
        rho = rho + projector(basis_ket(bits)) / 6
    return rho


def final_state() -> np.ndarray:
    """Literal C-separable form expected at the end of the protocol.

    ``(1/3)|phi+><phi+| (x) |0><0| + (2/3)(I/4) (x) |1><1|``.
    """
    bell = projector(bell_phi_plus())
    return (
        tensor_product(bell, projector(KET0)) / 3
        + 2 / 3 * tensor_product(maximally_mixed(2), projector(KET1))
    )


def werner(p: float) -> np.ndarray:
    """``p |phi+><phi+| + (1 - p) I/4``."""
    if not 0 <= p <= 1:
        raise ValueError(f"Werner weight must lie in [0, 1], got {p}")
    return p * projector(bell_phi_plus()) + (1 - p) * maximally_mixed(2)


def state_to_json(rho) -> dict:
    rho = as_matrix(rho)
    return {
        "n": num_qubits(rho.shape[0]),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }


def state_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state file: {exc}") from exc
    dim = 2**n
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(f"state file matrices must be {dim}x{dim}")
    return re + 1j * im


def write_state(path, rho) -> None:
    # json writes floats with repr(), the shortest string that round-trips exactly.
    Path(path).write_text(json.dumps(state_to_json(rho), indent=1) + "\n")


def read_state(path) -> np.ndarray:
    return state_from_json(json.loads(Path(path).read_text()))
