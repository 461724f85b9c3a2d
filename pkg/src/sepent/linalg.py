"""Dense complex kernel for small multi-qubit operators.

Qubits are numbered from 1. Qubit 1 is the most significant tensor factor,
so the basis state |abc> sits at row ``4a + 2b + c``.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, NamedTuple, Optional

import numpy as np

from sepent import tolerances

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite square complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _check_indices(indices: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    for i in idx:
        if not 1 <= i <= n:
            raise ValueError(f"qubit index {i} out of range 1..{n}")
    return idx


def tensor_product(*mats) -> np.ndarray:
    """Kronecker product of the arguments, leftmost factor most significant."""
    if not mats:
        raise ValueError("tensor_product needs at least one operand")
    arrays = [np.asarray(m, dtype=complex) for m in mats]
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("operand has non-finite entries")
    return reduce(np.kron, arrays)


def embed(op, qubit: int, n: int) -> np.ndarray:
    """Place a single-qubit operator on ``qubit`` of an ``n``-qubit register."""
    _check_indices([qubit], n)
    factors = [op if k == qubit else IDENTITY2 for k in range(1, n + 1)]
    return tensor_product(*factors)


def partial_trace(rho, keep: Iterable[int]) -> np.ndarray:
    """Trace out every qubit not in ``keep``.

    The kept qubits appear in ascending index order in the result.
    """
    rho = as_matrix(rho)
    n = num_qubits(rho.shape[0])
    keep = _check_indices(keep, n)
    t = rho.reshape((2,) * (2 * n))
    # Trace the highest-numbered qubits first so remaining axis positions stay valid.
    current = n
    for q in sorted(set(range(1, n + 1)) - set(keep), reverse=True):
        t = np.trace(t, axis1=q - 1, axis2=current + q - 1)
        current -= 1
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_transpose(rho, subset: Iterable[int]) -> np.ndarray:
    """Transpose the tensor factors listed in ``subset``."""
    rho = as_matrix(rho)
    n = num_qubits(rho.shape[0])
    subset = _check_indices(subset, n)
    t = rho.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in subset:
        axes[q - 1], axes[n + q - 1] = axes[n + q - 1], axes[q - 1]
    return t.transpose(axes).reshape(rho.shape)


def check_hermitian(m, tol: float = tolerances.STRUCTURAL) -> np.ndarray:
    m = as_matrix(m)
    err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if err >= tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {err:.3g})")
    return m


def hermitian_eigen(m, vectors: bool = False) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = check_hermitian(m)
    m = (m + m.conj().T) / 2
    if vectors:
        w, v = np.linalg.eigh(m)
        return Spectrum(w, v)
    return Spectrum(np.linalg.eigvalsh(m))


def evolve_unitary(h, t: float) -> np.ndarray:
    """Propagator ``exp(-i h t)`` for a Hermitian generator in rad/s."""
    w, v = hermitian_eigen(h, vectors=True)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def conjugate(u, rho) -> np.ndarray:
    """Return ``u rho u^dagger``."""
    u = np.asarray(u)
    return u @ np.asarray(rho) @ u.conj().T


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def phase_aligned_diff(u, v) -> float:
    """``min_phi max|u - exp(i phi) v|`` using the overlap-aligned phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return max_abs_diff(u, phase * v)


def is_unitary(u, tol: float = tolerances.UNITARY) -> bool:
    u = as_matrix(u)
    return max_abs_diff(u.conj().T @ u, np.eye(u.shape[0])) < tol


def projector_on(bit: int) -> np.ndarray:
    """Single-qubit projector ``|bit><bit|``."""
    p = np.zeros((2, 2), dtype=complex)
    p[bit, bit] = 1
    return p
