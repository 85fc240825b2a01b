"""Dense complex state-vector algebra for a handful of qubits.

States are plain numpy arrays whose last axis holds the ``2**k`` amplitudes;
any leading axes are treated as a batch. Qubits are numbered from 1 and
qubit 1 is the most significant bit of the basis index, i.e. the basis
index is ``b = sum(b_i * 2**(k - i))``.
"""

from __future__ import annotations

import numpy as np

ATOL = 1e-12
NULL_PROBABILITY = 1e-15

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def num_qubits(state: np.ndarray) -> int:
    dim = np.shape(state)[-1]
    k = dim.bit_length() - 1
    if dim < 2 or 2**k != dim:
        raise ValueError(f"state dimension {dim} is not a power of two")
    return k


def as_state(amps) -> np.ndarray:
    """Coerce to a complex array and check that it is finite and qubit-shaped."""
    state = np.asarray(amps, dtype=complex)
    if state.ndim == 0:
        raise ValueError("a state needs at least one axis")
    num_qubits(state)
    if not np.all(np.isfinite(state)):
        raise ValueError("state amplitudes must be finite")
    return state


def normalize(amps) -> np.ndarray:
    state = as_state(amps)
    norm = np.linalg.norm(state, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("cannot normalize a zero vector")
    return state / norm


def ket(bits: str) -> np.ndarray:
    """Computational basis state, e.g. ``ket("10")`` is |10>."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bit string {bits!r}")
    state = np.zeros(2 ** len(bits), dtype=complex)
    state[int(bits, 2)] = 1.0
    return state


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two (batches of) states; ``a`` takes the high bits."""
    a, b = as_state(a), as_state(b)
    out = a[..., :, None] * b[..., None, :]
    return out.reshape(out.shape[:-2] + (a.shape[-1] * b.shape[-1],))


def inner(a, b) -> complex | np.ndarray:
    """<a|b>, conjugating the first argument."""
    a, b = as_state(a), as_state(b)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return np.sum(a.conj() * b, axis=-1)


def fidelity(a, b) -> float | np.ndarray:
    return np.abs(inner(a, b)) ** 2


def apply_local(state, qubit_index: int, op) -> np.ndarray:
    """Apply a single-qubit operator to qubit ``qubit_index`` (1-based)."""
    state = as_state(state)
    k = num_qubits(state)
    if not 1 <= qubit_index <= k:
        raise IndexError(f"qubit index {qubit_index} out of range 1..{k}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("local operator must be 2x2")
    batch = state.shape[:-1]
    psi = state.reshape(batch + (2 ** (qubit_index - 1), 2, 2 ** (k - qubit_index)))
    out = np.einsum("ij,...ajb->...aib", op, psi)
    return out.reshape(state.shape)


def is_unitary(op, atol: float = ATOL) -> bool:
    op = np.asarray(op, dtype=complex)
    return np.allclose(op.conj().T @ op, np.eye(op.shape[0]), atol=atol, rtol=0)


def contract_pair(state, qubit_pair: tuple[int, int], basis_vec) -> np.ndarray:
    """Unnormalized residual <v|_(i,j) |state> on the remaining qubits.

    The remaining qubits keep their relative order. Works on batches.
    """
    state = as_state(state)
    k = num_qubits(state)
    i, j = qubit_pair
    if i == j or not (1 <= i <= k and 1 <= j <= k):
        raise IndexError(f"invalid qubit pair {qubit_pair} for {k} qubits")
    if k < 3:
        # the residual must still be a state
        raise ValueError("projecting a pair needs at least three qubits")
    vec = as_state(basis_vec)
    if vec.shape != (4,):
        raise ValueError("basis vector must be a single two-qubit state")
    batch = state.shape[:-1]
    nb = len(batch)
    psi = state.reshape(batch + (2,) * k)
    out = np.tensordot(psi, vec.conj().reshape(2, 2), axes=([nb + i - 1, nb + j - 1], [0, 1]))
    return out.reshape(batch + (2 ** (k - 2),))


def project_pair(state, qubit_pair: tuple[int, int], basis_vec) -> tuple[float, np.ndarray | None]:
    """Project two qubits of a single state onto ``basis_vec``.

    Returns the outcome probability and the normalized residual state, or
    ``None`` for the residual when the outcome is unreachable
    (probability at or below ``NULL_PROBABILITY``).
    """
    state = as_state(state)
    if state.ndim != 1:
        raise ValueError("project_pair takes a single state; use contract_pair for batches")
    residual = contract_pair(state, qubit_pair, basis_vec)
    prob = float(np.vdot(residual, residual).real)
    if prob <= NULL_PROBABILITY:
        return prob, None
    return prob, residual / np.sqrt(prob)
