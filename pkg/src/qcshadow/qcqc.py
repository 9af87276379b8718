"""Quantum-to-classical-to-quantum shadow estimation.

Phase 1 measures copies of the unknown state after a random unitary and keeps
only ``(U, b)``.  Phase 2 re-prepares a quantum state from each record and
measures the target observable on it directly, so no ``2^n x 2^n`` snapshot
is ever formed.  The quantum computer of phase 2 is emulated by exact Born
sampling.
"""

from __future__ import annotations

import copy
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gates
from .ensembles import PauliSettings, UnitaryDescription, sample_unitary
from .qstate import (
    DenseHermitian,
    Observable,
    PauliString,
    Projector,
    QuantumState,
    outcome_distribution,
)
from .tableau import adjoint, basis_image, dense_export

FLIP_PROBABILITY = 1 / 3


class CopyCounter:
    """Thread-safe tally of consumed copies of the unknown state."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = 0

    def add(self, k: int):
        with self._lock:
            self._value += k

    @property
    def value(self) -> int:
        return self._value

    def reset(self):
        with self._lock:
            self._value = 0


COPIES = CopyCounter()


def copy_counter() -> int:
    """Copies of rho consumed so far by :func:`acquire` (phase 2 uses none)."""
    return COPIES.value


# -- records -----------------------------------------------------------------


@dataclass(frozen=True)
class SnapshotRecord:
    unitary: UnitaryDescription
    b: str

    def __post_init__(self):
        if len(self.b) != self.unitary.n or set(self.b) - {"0", "1"}:
            raise ValueError(f"outcome {self.b!r} does not fit {self.unitary.n} qubits")

    @property
    def scheme(self) -> str:
        return self.unitary.scheme

    @property
    def n(self) -> int:
        return self.unitary.n

    def to_json(self) -> dict:
        return {"u": self.unitary.to_json(), "b": self.b}

    @classmethod
    def from_json(cls, data: dict) -> "SnapshotRecord":
        return cls(UnitaryDescription.from_json(data["u"]), data["b"])

    def serialized_size(self) -> int:
        """Bytes of the compact JSON encoding."""
        return len(json.dumps(self.to_json(), separators=(",", ":")))

    @property
    def stored_scalars(self) -> int:
        """Bits kept classically: tableau + signs + outcome, or bases + outcome."""
        n = self.n
        if self.scheme == "clifford":
            return 4 * n * n + 2 * n + n
        return 2 * n + n  # a basis label needs two bits


def _phase1_probabilities(state: QuantumState, unitary: UnitaryDescription) -> np.ndarray:
    n = state.n
    if unitary.scheme == "pauli":
        rot = {q: gates.BASIS_ROTATIONS[ch] for q, ch in enumerate(unitary.payload.bases)}
        if state.is_pure:
            v = state.vector
            for q, u in rot.items():
                v = gates.apply_1q(v, u, q, n)
            p = np.abs(v) ** 2
        else:
            rho = state.density
            for q, u in rot.items():
                rho = gates.conjugate_1q(rho, u, q, n)
            p = np.diagonal(rho).real
    else:
        u = dense_export(unitary.payload, max_qubits=n)
        if state.is_pure:
            p = np.abs(u @ state.vector) ** 2
        else:
            p = np.einsum("ij,jk,ik->i", u, state.density, u.conj()).real
    p = np.clip(p, 0, None)
    return p / p.sum()


def draw_index(probs: np.ndarray, rng: np.random.Generator, shape=None) -> np.ndarray:
    """Inverse-CDF sampling of category indices."""
    cum = np.cumsum(probs)
    u = rng.random(shape) * cum[-1]
    return np.minimum(np.searchsorted(cum, u, side="right"), len(probs) - 1)


def acquire(
    rho: QuantumState,
    scheme: str,
    N: int,
    rng: np.random.Generator,
    counter: CopyCounter | None = None,
    bases: str | None = None,
) -> list[SnapshotRecord]:
    """Phase 1: ``N`` independent random-unitary measurements of ``rho``.

    ``bases`` pins the Pauli settings (used to probe fixed bases in tests).
    """
    if not isinstance(rho, QuantumState):
        raise TypeError("rho must be a QuantumState")
    if N < 1:
        raise ValueError("N must be >= 1")
    n = rho.n
    records = []
    pauli_cache: dict[str, np.ndarray] = {}
    for _ in range(N):
        if bases is not None:
            unitary = UnitaryDescription("pauli", PauliSettings(bases))
        else:
            unitary = sample_unitary(scheme, n, rng)
        if unitary.scheme == "pauli":
            key = unitary.payload.bases
            if key not in pauli_cache:
                pauli_cache[key] = _phase1_probabilities(rho, unitary)
            probs = pauli_cache[key]
        else:
            probs = _phase1_probabilities(rho, unitary)
        b = int(draw_index(probs, rng))
        records.append(SnapshotRecord(unitary, format(b, f"0{n}b")))
    (COPIES if counter is None else counter).add(N)
    return records


def write_records(path, records: list[SnapshotRecord], seed: int, copies: int | None = None):
    """Write a record file; identical inputs give identical bytes."""
    if not records:
        raise ValueError("no records to write")
    payload = {
        "scheme": records[0].scheme,
        "n": records[0].n,
        "records": [r.to_json() for r in records],
        "copies_consumed": len(records) if copies is None else copies,
        "seed": seed,
    }
    Path(path).write_text(json.dumps(payload, separators=(",", ":")) + "\n")


def read_records(path) -> tuple[list[SnapshotRecord], dict]:
    data = json.loads(Path(path).read_text())
    records = [SnapshotRecord.from_json(r) for r in data["records"]]
    for r in records:
        if r.scheme != data["scheme"] or r.n != data["n"]:
            raise ValueError("record does not match file header")
    meta = {k: v for k, v in data.items() if k != "records"}
    return records, meta


# -- phase 2: Clifford ensemble ----------------------------------------------


def default_shots(scheme: str, n: int, k: int | None = None) -> int:
    """``2(d+1)`` for Clifford records, ``ceil((9/4)^k)`` for Pauli records."""
    if scheme == "clifford":
        return 2 * ((1 << n) + 1)
    if scheme == "pauli":
        return max(1, math.ceil((9 / 4) ** (n if k is None else k)))
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_shots(m: int):
    if m < 1:
        raise ValueError("shots m must be >= 1")


def prepared_state(rec: SnapshotRecord) -> QuantumState:
    """The phase-2 state ``U^dag |b>`` of a Clifford record, built from the
    inverse tableau's stabilizers in O(n 2^n) time."""
    if rec.scheme != "clifford":
        raise ValueError("prepared_state needs a Clifford record")
    inv = adjoint(rec.unitary.payload)
    return QuantumState(rec.n, vector=basis_image(inv, int(rec.b, 2)))


def _clifford_ys(state: QuantumState, obs: Observable, m: int, rng, size):
    _check_shots(m)
    if obs.n != state.n:
        raise ValueError("observable and record sizes differ")
    values, probs = outcome_distribution(state, obs)
    shots = values[draw_index(probs, rng, (size, m))]
    return (state.dim + 1) * shots.mean(axis=1) - obs.trace


def phase2_clifford(
    rec: SnapshotRecord,
    obs: Observable,
    m: int | None = None,
    rng: np.random.Generator | None = None,
    state: QuantumState | None = None,
) -> float:
    """One estimate ``Y = (d+1) X - tr(O)`` where ``X`` is the mean of ``m``
    shots of ``obs`` on ``U^dag |b>``.  ``state`` may pass a cached
    :func:`prepared_state`."""
    return float(phase2_clifford_batch(rec, obs, m, rng, 1, state=state)[0])


def phase2_clifford_batch(
    rec: SnapshotRecord,
    obs: Observable,
    m: int | None,
    rng: np.random.Generator,
    size: int,
    state: QuantumState | None = None,
) -> np.ndarray:
    """``size`` independent repetitions of :func:`phase2_clifford`."""
    if rec.scheme != "clifford":
        raise ValueError("phase2_clifford needs a Clifford record")
    rng = np.random.default_rng() if rng is None else rng
    m = default_shots("clifford", rec.n) if m is None else m
    state = prepared_state(rec) if state is None else state
    return _clifford_ys(state, obs, m, rng, size)


# -- phase 2: Pauli ensemble --------------------------------------------------


@dataclass(frozen=True)
class NoisyPreparation:
    e: str
    c: str
    w: tuple[int, ...]


def flip_bits(b: str, rng: np.random.Generator) -> NoisyPreparation:
    """Flip each bit with probability 1/3; weights are ``3 (-1)^e``."""
    if not b:
        raise ValueError("empty bitstring")
    e = (rng.random(len(b)) < FLIP_PROBABILITY).astype(int)
    c = "".join(str(int(bit) ^ int(flip)) for bit, flip in zip(b, e))
    return NoisyPreparation("".join(map(str, e)), c, tuple(int(3 - 6 * x) for x in e))


def restrict(obs: Observable) -> Observable:
    """The observable acting only on its support, as a ``k``-qubit operator."""
    k = obs.locality
    if isinstance(obs, PauliString):
        return PauliString(obs.support_letters, obs.coeff)
    if isinstance(obs, Projector):
        return obs
    return DenseHermitian(obs.support_matrix(), range(k), k)


class _PauliWorkspace:
    """Outcome tables for every noisy preparation ``|c_Q>`` of one record."""

    def __init__(self, rec: SnapshotRecord, obs: Observable):
        if rec.scheme != "pauli":
            raise ValueError("phase2_pauli needs a Pauli record")
        if obs.n != rec.n or any(q < 0 or q >= rec.n for q in obs.support):
            raise ValueError("observable support is not inside the record's qubits")
        self.support = obs.support
        self.k = k = len(self.support)
        self.b_q = np.array([int(rec.b[q]) for q in self.support], dtype=np.int64)
        if k == 0:
            self.values = np.array([obs.coeff if isinstance(obs, PauliString) else obs.trace])
            self.cum = np.ones((1, 1))
            return
        reduced = restrict(obs)
        bases = [rec.unitary.payload.bases[q] for q in self.support]
        # U_l^dag |c_l> for both values of c_l
        kets = [gates.BASIS_ROTATIONS[ch].conj().T for ch in bases]
        tables = []
        values = None
        for c in range(1 << k):
            bits = [(c >> (k - 1 - i)) & 1 for i in range(k)]
            vec = gates.kron_all(ket[:, [bit]] for ket, bit in zip(kets, bits)).ravel()
            vals, probs = outcome_distribution(QuantumState(k, vector=vec), reduced)
            values = vals
            tables.append(probs)
        self.values = values
        self.cum = np.cumsum(np.array(tables), axis=1)

    def for_record(self, rec: SnapshotRecord) -> "_PauliWorkspace":
        """Same tables, another record with identical support bases."""
        ws = copy.copy(self)
        ws.b_q = np.array([int(rec.b[q]) for q in self.support], dtype=np.int64)
        return ws

    def sample(self, m: int, rng: np.random.Generator, size: int) -> np.ndarray:
        _check_shots(m)
        k = self.k
        if k == 0:
            return np.full(size, float(self.values[0]))
        flips = (rng.random((size, m, k)) < FLIP_PROBABILITY).astype(np.int64)
        c = self.b_q ^ flips
        c_index = c @ (1 << np.arange(k - 1, -1, -1))
        cum = self.cum[c_index]
        u = rng.random((size, m, 1)) * cum[..., -1:]
        idx = np.minimum((u >= cum).sum(axis=-1), self.values.size - 1)
        weights = np.prod(3 - 6 * flips, axis=-1)
        return (self.values[idx] * weights).mean(axis=1)


def phase2_pauli(
    rec: SnapshotRecord,
    obs: Observable,
    m: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """One estimate ``Y`` on the ``k`` support qubits: each of ``m`` rounds
    flips ``b_Q`` afresh, prepares ``U_Q^dag |c_Q>``, measures the reduced
    observable and weights the outcome by ``prod_l 3 (-1)^{e_l}``."""
    return float(phase2_pauli_batch(rec, obs, m, rng, 1)[0])


def phase2_pauli_batch(
    rec: SnapshotRecord,
    obs: Observable,
    m: int | None,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    ws = _PauliWorkspace(rec, obs)
    rng = np.random.default_rng() if rng is None else rng
    m = default_shots("pauli", rec.n, ws.k) if m is None else m
    return ws.sample(m, rng, size)


def phase2(
    rec: SnapshotRecord,
    obs: Observable,
    m: int | None = None,
    rng: np.random.Generator | None = None,
    size: int | None = None,
):
    """Dispatch on the record's scheme.  Returns a float, or an array of
    ``size`` repetitions."""
    rng = np.random.default_rng() if rng is None else rng
    if rec.scheme == "clifford":
        out = phase2_clifford_batch(rec, obs, m, rng, size or 1)
    else:
        out = phase2_pauli_batch(rec, obs, m, rng, size or 1)
    return out if size is not None else float(out[0])


def conditional_mean(rec: SnapshotRecord, obs: Observable) -> float:
    """``E[Y | record]`` computed exactly from the phase-2 outcome tables."""
    if rec.scheme == "clifford":
        values, probs = outcome_distribution(prepared_state(rec), obs)
        return float((1 << rec.n) + 1) * float(values @ probs) - obs.trace
    ws = _PauliWorkspace(rec, obs)
    if ws.k == 0:
        return float(ws.values[0])
    probs = np.diff(ws.cum, axis=1, prepend=0)
    means = probs @ ws.values
    total = 0.0
    for c in range(1 << ws.k):
        bits = np.array([(c >> (ws.k - 1 - i)) & 1 for i in range(ws.k)])
        e = bits ^ ws.b_q
        weight = np.prod(np.where(e == 1, FLIP_PROBABILITY * -3, (1 - FLIP_PROBABILITY) * 3))
        total += weight * means[c]
    return float(total)


def estimate_variables(
    records: list[SnapshotRecord],
    observables: list[Observable],
    m: int | None = None,
    seed: int = 0,
    offset: int = 0,
) -> np.ndarray:
    """Matrix ``Y[i, j]`` for every record/observable pair.

    Pair ``(i, j)`` draws from its own stream derived from
    ``(seed, offset + i, j)``, so any slice of records can be processed
    separately (or in parallel) with identical results.
    """
    out = np.empty((len(records), len(observables)))
    tables: dict[tuple[int, str], _PauliWorkspace] = {}
    for i, rec in enumerate(records):
        state = prepared_state(rec) if rec.scheme == "clifford" else None
        for j, obs in enumerate(observables):
            rng = np.random.default_rng([seed, offset + i, j])
            if rec.scheme == "clifford":
                out[i, j] = phase2_clifford(rec, obs, m, rng, state=state)
                continue
            # outcome tables depend only on the support bases, so share them
            key = (j, "".join(rec.unitary.payload.bases[q] for q in obs.support))
            if key not in tables:
                tables[key] = _PauliWorkspace(rec, obs)
            ws = tables[key].for_record(rec)
            shots = default_shots("pauli", rec.n, ws.k) if m is None else m
            out[i, j] = ws.sample(shots, rng, 1)[0]
    return out

