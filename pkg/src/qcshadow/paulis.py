"""Sparse Pauli-operator arithmetic on dense vectors.

A Pauli operator on ``n`` qubits is stored as ``(x, z, p)``: two integer bit
masks and a power of ``i`` so that the operator equals ``i**p X^x Z^z``.
Masks follow the global big-endian convention, qubit ``q`` sits at bit
``n - 1 - q`` of a basis index, so a mask can be XOR-ed straight into an
index.  With ``Y = iXZ`` a Hermitian string with sign ``(-1)**r`` has
``p = 2r + popcount(x & z)``.
"""

from __future__ import annotations

import numpy as np

LETTERS = "IXYZ"

# (x bit, z bit) per letter
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

_I_POWERS = np.array([1, 1j, -1, -1j])


def qubit_bit(n: int, q: int) -> int:
    """Mask of qubit ``q`` inside an ``n``-qubit basis index."""
    return 1 << (n - 1 - q)


def letters_to_masks(letters: str) -> tuple[int, int, int]:
    """Convert a string such as ``"XIZ"`` to ``(x, z, p)``."""
    n = len(letters)
    x = z = 0
    for q, ch in enumerate(letters):
        try:
            bx, bz = _LETTER_BITS[ch]
        except KeyError:
            raise ValueError(f"invalid Pauli letter {ch!r}") from None
        if bx:
            x |= qubit_bit(n, q)
        if bz:
            z |= qubit_bit(n, q)
    return x, z, popcount(x & z) % 4


def popcount(v: int) -> int:
    return int(v).bit_count()


def parity(values: np.ndarray) -> np.ndarray:
    """Bitwise parity of every entry of an integer array."""
    return (np.bitwise_count(values) & 1).astype(np.int64)


def mul(a: tuple[int, int, int], b: tuple[int, int, int]) -> tuple[int, int, int]:
    """Operator product ``a @ b`` in ``(x, z, p)`` form."""
    xa, za, pa = a
    xb, zb, pb = b
    return xa ^ xb, za ^ zb, (pa + pb + 2 * popcount(za & xb)) % 4


def apply(pauli: tuple[int, int, int], vec: np.ndarray, n: int) -> np.ndarray:
    """Return ``P @ vec``; ``vec`` may carry extra trailing columns.

    Costs O(2**n) per column; the operator is never materialised.
    """
    x, z, p = pauli
    idx = np.arange(1 << n)
    sign = 1 - 2 * parity(idx & z)
    if vec.ndim > 1:
        sign = sign.reshape((-1,) + (1,) * (vec.ndim - 1))
    return _I_POWERS[p] * (sign * vec)[idx ^ x]


def expectation_vector(pauli: tuple[int, int, int], vec: np.ndarray, n: int) -> complex:
    """``<vec| P |vec>`` without building ``P``."""
    return complex(np.vdot(vec, apply(pauli, vec, n)))


def trace_with(pauli: tuple[int, int, int], rho: np.ndarray, n: int) -> complex:
    """``tr(P @ rho)`` by gathering one generalised diagonal of ``rho``."""
    x, z, p = pauli
    idx = np.arange(1 << n)
    sign = 1 - 2 * parity(idx & z)
    # P|y> = i^p (-1)^{z.y} |y^x>, so tr(P rho) = sum_y i^p (-1)^{z.y} rho[y, y^x]
    return complex(_I_POWERS[p] * np.sum(sign * rho[idx, idx ^ x]))


def dense(pauli: tuple[int, int, int], n: int) -> np.ndarray:
    """Materialise the ``2**n x 2**n`` matrix; for tests and small ``n``."""
    return apply(pauli, np.eye(1 << n, dtype=complex), n)
