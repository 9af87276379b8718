"""Random measurement ensembles: per-qubit Pauli bases and uniform Cliffords."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gates import BASIS_ROTATIONS
from .tableau import CliffordTableau

PAULI_BASES = "XYZ"


@dataclass(frozen=True)
class PauliSettings:
    bases: str

    def __post_init__(self):
        if not self.bases or any(ch not in PAULI_BASES for ch in self.bases):
            raise ValueError(f"invalid Pauli settings {self.bases!r}")

    @property
    def n(self) -> int:
        return len(self.bases)


def sample_pauli_settings(n: int, rng: np.random.Generator) -> PauliSettings:
    if n < 1:
        raise ValueError("n must be >= 1")
    return PauliSettings("".join(PAULI_BASES[i] for i in rng.integers(3, size=n)))


def settings_to_rotation(settings: PauliSettings) -> list[np.ndarray]:
    """Per-qubit unitaries that turn each chosen basis into the computational
    one: Z -> I, X -> H, Y -> H S^dagger."""
    return [BASIS_ROTATIONS[b] for b in settings.bases]


# -- uniform Clifford sampling ---------------------------------------------
#
# Canonical form C = F1 . H . P . F2 (Bravyi & Maslov) where H is a layer of
# Hadamards, P a qubit permutation (together drawn from the quantum Mallows
# distribution) and F1, F2 are Hadamard-free Cliffords built from random
# lower-triangular and symmetric binary matrices.  Random sign bits then
# supply the Pauli part, so the result is uniform over the Clifford group
# modulo global phase.


@lru_cache(maxsize=None)
def _tril(n: int):
    return np.tril_indices(n, -1)


def _sample_qmallows(n: int, r: np.ndarray):
    had = np.zeros(n, dtype=bool)
    perm = np.zeros(n, dtype=np.int64)
    remaining = list(range(n))
    for i in range(n):
        m = n - i
        eps = 4.0 ** (-m)
        index = -int(np.ceil(np.log2(r[i] + (1 - r[i]) * eps)))
        had[i] = index < m
        k = index if index < m else 2 * m - index - 1
        perm[i] = remaining.pop(k)
    return had, perm


def _inverse_unit_tril(mat: np.ndarray) -> np.ndarray:
    """GF(2) inverse of a unit lower-triangular matrix by forward substitution."""
    n = mat.shape[0]
    inv = np.eye(n, dtype=np.int64)
    for i in range(1, n):
        inv[i] = (inv[i] + mat[i, :i] @ inv[:i]) % 2
    return inv


def _hadamard_free(n, rows, cols, diag, sym_vals, tril_vals):
    """Symplectic matrix of a Hadamard-free Clifford ``[[D, 0], [G D, D^-T]]``."""
    gamma = np.diag(diag)
    gamma[rows, cols] = sym_vals
    gamma[cols, rows] = sym_vals
    delta = np.eye(n, dtype=np.int64)
    delta[rows, cols] = tril_vals
    out = np.zeros((2 * n, 2 * n), dtype=np.int64)
    out[:n, :n] = delta
    out[n:, :n] = (gamma @ delta) % 2
    out[n:, n:] = _inverse_unit_tril(delta).T
    return out


def sample_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Draw a tableau uniformly from the n-qubit Clifford group."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rows, cols = _tril(n)
    t = rows.size
    u = rng.random(n)
    coins = rng.integers(2, size=4 * n + 4 * t)
    had, perm = _sample_qmallows(n, u)
    off = 4 * n
    f1 = _hadamard_free(n, rows, cols, coins[:n], coins[off : off + t], coins[off + t : off + 2 * t])
    f2 = _hadamard_free(
        n, rows, cols, coins[n : 2 * n], coins[off + 2 * t : off + 3 * t], coins[off + 3 * t :]
    )
    table = f2[np.concatenate([perm, n + perm])]
    inds = np.flatnonzero(had)
    table[np.concatenate([inds, inds + n])] = table[np.concatenate([inds + n, inds])]
    return CliffordTableau(n, (f1 @ table) % 2, coins[2 * n : 4 * n])


# -- serialisable description of a phase-1 unitary --------------------------


@dataclass(frozen=True)
class UnitaryDescription:
    scheme: str
    payload: PauliSettings | CliffordTableau

    def __post_init__(self):
        expected = {"pauli": PauliSettings, "clifford": CliffordTableau}.get(self.scheme)
        if expected is None:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not isinstance(self.payload, expected):
            raise TypeError(f"{self.scheme} scheme needs a {expected.__name__}")

    @property
    def n(self) -> int:
        return self.payload.n

    def to_json(self) -> dict:
        if self.scheme == "pauli":
            return {"scheme": "pauli", "bases": self.payload.bases}
        tab, ph = self.payload.to_hex()
        return {"scheme": "clifford", "n": self.payload.n, "tableau": tab, "phases": ph}

    @classmethod
    def from_json(cls, data: dict) -> "UnitaryDescription":
        scheme = data.get("scheme")
        if scheme == "pauli":
            return cls("pauli", PauliSettings(data["bases"]))
        if scheme == "clifford":
            t = CliffordTableau.from_hex(int(data["n"]), data["tableau"], data["phases"])
            return cls("clifford", t)
        raise ValueError(f"unknown scheme {scheme!r}")


def sample_unitary(scheme: str, n: int, rng: np.random.Generator) -> UnitaryDescription:
    if scheme == "pauli":
        return UnitaryDescription("pauli", sample_pauli_settings(n, rng))
    if scheme == "clifford":
        return UnitaryDescription("clifford", sample_clifford(n, rng))
    raise ValueError(f"unknown scheme {scheme!r}")
