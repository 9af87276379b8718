"""Shared brute-force oracles.  These deliberately avoid the package's own
sparse helpers so tests compare two independent computations."""

from functools import reduce

import numpy as np
import pytest

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_letters(letters: str) -> np.ndarray:
    return reduce(np.kron, [_P[ch] for ch in letters])


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < tol:
        return False
    phase = b[idx] / a[idx]
    return np.allclose(a * phase, b, atol=tol) and abs(abs(phase) - 1) < tol


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
