"""Reference classical-shadow estimation with explicit snapshot matrices.

This is the matrix-algebra pipeline that the QCQC route avoids: every
snapshot is a ``2^n x 2^n`` operator and every estimate a trace against it.
It doubles as the oracle for the QCQC tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import gates
from .ensembles import PauliSettings
from .qstate import Observable, PauliString, QuantumState
from .tableau import CliffordTableau, dense_export

BASELINE_CAP = 10
"""Largest n for which dense snapshots are materialised."""


def _check_cap(n: int):
    if n > BASELINE_CAP:
        raise ValueError(f"dense snapshots limited to n <= {BASELINE_CAP}, got n = {n}")


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """One classical-shadow snapshot.

    Pauli snapshots keep their per-qubit 2x2 factors and only build the dense
    matrix on request; Clifford snapshots are dense from the start.
    """

    scheme: str
    n: int
    factors: tuple[np.ndarray, ...] | None = None
    dense: np.ndarray | None = None

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        _check_cap(self.n)
        return gates.kron_all(self.factors)

    @property
    def stored_scalars(self) -> int:
        """Real scalars held in memory (a complex entry counts as two)."""
        if self.dense is not None:
            return 2 * self.dense.size
        return 2 * sum(f.size for f in self.factors)


def _pauli_factor(basis: str, bit: str) -> np.ndarray:
    u = gates.BASIS_ROTATIONS[basis]
    ket = u.conj().T[:, int(bit)]
    return 3 * np.outer(ket, ket.conj()) - gates.I2


def snapshot_pauli(settings: PauliSettings, b: str) -> SnapshotMatrix:
    """Tensor product of the factors ``3 U_l^dag |b_l><b_l| U_l - I``."""
    if len(b) != settings.n:
        raise ValueError("outcome length does not match settings")
    factors = tuple(_pauli_factor(basis, bit) for basis, bit in zip(settings.bases, b))
    return SnapshotMatrix("pauli", settings.n, factors=factors)


def snapshot_clifford(t: CliffordTableau, b: str) -> SnapshotMatrix:
    """``(2^n + 1) U^dag |b><b| U - I`` with ``U`` expanded densely."""
    n = t.n
    if len(b) != n:
        raise ValueError("outcome length does not match tableau")
    _check_cap(n)
    u = dense_export(t, max_qubits=BASELINE_CAP)
    ket = u.conj()[int(b, 2)]  # U^dag |b> is the conjugated row b of U
    d = 1 << n
    mat = (d + 1) * np.outer(ket, ket.conj())
    mat[np.diag_indices(d)] -= 1
    return SnapshotMatrix("clifford", n, dense=mat)


def depolarize(a: np.ndarray, p: float) -> np.ndarray:
    """``p A + (1 - p) tr(A) I / d``; leading axes are treated as a batch."""
    a = np.asarray(a)
    d = a.shape[-1]
    tr = np.trace(a, axis1=-2, axis2=-1)
    out = p * a
    idx = np.arange(d)
    out[..., idx, idx] += ((1 - p) * tr / d)[..., None]
    return out


def _per_qubit(a: np.ndarray, n: int, keep: float, traced_coeff: np.ndarray) -> np.ndarray:
    """Apply ``A -> keep * A + tr_q(A) (x) traced_coeff`` on each qubit in turn."""
    batch = a.shape[:-2]
    out = a
    for q in range(n):
        t = out.reshape(batch + (1 << q, 2, 1 << (n - q - 1), 1 << q, 2, 1 << (n - q - 1)))
        traced = np.einsum("...iajkal->...ijkl", t)
        mixed = np.einsum("...ijkl,ab->...iajkbl", traced, traced_coeff)
        out = (keep * t + mixed).reshape(a.shape)
    return out


def channel_forward(state: QuantumState | np.ndarray, scheme: str):
    """The measurement channel in closed form.

    Clifford ensemble: global depolarising map with ``p = 1/(d+1)``.
    Pauli ensemble: single-qubit depolarising map with ``p = 1/3`` on every
    qubit.  A state argument returns a state; an array returns an array.
    """
    rho = state.density_matrix() if isinstance(state, QuantumState) else np.asarray(state)
    n = int(np.log2(rho.shape[-1]))
    if scheme == "clifford":
        out = depolarize(rho, 1 / ((1 << n) + 1))
    elif scheme == "pauli":
        p = 1 / 3
        out = _per_qubit(rho, n, p, (1 - p) * np.eye(2) / 2)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if isinstance(state, QuantumState):
        return QuantumState(n, density=(out + out.conj().T) / 2)
    return out


def channel_inverse(a: np.ndarray, scheme: str) -> np.ndarray:
    """Inverse of :func:`channel_forward` on an arbitrary operator (or a
    stack of them)."""
    a = np.asarray(a, dtype=complex)
    n = int(np.log2(a.shape[-1]))
    if scheme == "clifford":
        d = 1 << n
        p = 1 / (d + 1)
        # D_p^-1(A) = (A - (1 - p) tr(A) I / d) / p
        return (a - (1 - p) * depolarize(a, 0.0)) / p
    if scheme == "pauli":
        # per qubit: D^-1(A) = 3 A - tr_q(A) (x) I
        return _per_qubit(a, n, 3.0, -np.eye(2))
    raise ValueError(f"unknown scheme {scheme!r}")


def estimate_trace(snap: SnapshotMatrix, obs: Observable, fast: bool = True) -> float:
    """``tr(O rho_hat)``.

    With ``fast`` a Pauli snapshot against a Pauli string contracts only the
    support factors (each identity factor has unit trace).
    """
    if obs.n != snap.n:
        raise ValueError("observable and snapshot sizes differ")
    if fast and snap.factors is not None and isinstance(obs, PauliString):
        val = obs.coeff
        for q in obs.support:
            val *= np.trace(snap.factors[q] @ gates.PAULI_MATRICES[obs.letters[q]])
        return float(np.real(val))
    return float(np.real(np.sum(snap.matrix * obs.to_dense().T)))


def estimate_trace_dense(snap: SnapshotMatrix, obs_dense: np.ndarray) -> float:
    """Dense trace against a pre-materialised observable matrix."""
    return float(np.real(np.sum(snap.matrix * obs_dense.T)))


def stored_scalars_dense(n: int) -> int:
    return 2 * 4**n


def stored_scalars_factored(k: int) -> int:
    return 2 * 4 * k

