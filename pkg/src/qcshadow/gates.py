"""Small fixed gates and per-qubit application helpers (big-endian order)."""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
SDG = np.diag([1, -1j])
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}

# Maps the eigenbasis of each Pauli onto the computational basis.
BASIS_ROTATIONS = {"Z": I2, "X": H, "Y": H @ SDG}


def apply_1q(vec: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 gate to qubit ``q`` of an amplitude vector (or to the row
    index of a ``2**n x c`` matrix)."""
    tail = vec.shape[1:]
    t = vec.reshape((1 << q, 2, -1))
    out = np.einsum("ab,ibj->iaj", u, t)
    return out.reshape((1 << n,) + tail)


def conjugate_1q(rho: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """``u_q rho u_q^dagger`` for a density matrix."""
    left = apply_1q(rho, u, q, n)
    return apply_1q(left.conj().T, u, q, n).conj().T


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embed_support(op: np.ndarray, support, n: int) -> np.ndarray:
    """Dense ``2**n`` operator acting as ``op`` on ``support`` (in the order
    given) and as identity elsewhere."""
    k = len(support)
    rest = [q for q in range(n) if q not in support]
    full = np.kron(op, np.eye(1 << (n - k)))
    # axes of ``full`` are ordered (support..., rest...); permute back
    order = list(support) + rest
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(1 << n, 1 << n)


def to_support_front(vec: np.ndarray, support, n: int) -> np.ndarray:
    """Reshape an amplitude vector into a ``2**k x 2**(n-k)`` matrix whose row
    index runs over ``support`` (in the order given)."""
    rest = [q for q in range(n) if q not in support]
    t = vec.reshape((2,) * n).transpose(list(support) + rest)
    return t.reshape(1 << len(support), -1)


def reduced_density(rho: np.ndarray, support, n: int) -> np.ndarray:
    """Partial trace of ``rho`` onto ``support`` (kept in the order given)."""
    k = len(support)
    rest = [q for q in range(n) if q not in support]
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(list(support) + rest + [n + q for q in support] + [n + q for q in rest])
    t = t.reshape(1 << k, 1 << (n - k), 1 << k, 1 << (n - k))
    return np.einsum("ajbj->ab", t)
