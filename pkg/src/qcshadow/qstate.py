"""Exact n-qubit state simulation and observable measurement.

Qubit 0 is the most significant bit of a basis index everywhere in the
package.  States are immutable; measuring never collapses the state object,
each shot is an independent draw from the Born distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import gates, paulis
from .tableau import CliffordTableau, dense_export

MAX_QUBITS = 14
"""Default cap on dense statevector simulation."""

STATE_TOL = 1e-10
UNITARY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure amplitude vector or density matrix on ``n`` qubits."""

    n: int
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("give exactly one of vector / density")
        if self.n < 1 or self.n > MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        d = 1 << self.n
        if self.vector is not None:
            v = np.array(self.vector, dtype=complex)
            if v.shape != (d,):
                raise ValueError(f"expected {d} amplitudes, got shape {v.shape}")
            if abs(np.linalg.norm(v) - 1) > STATE_TOL:
                raise ValueError("amplitude vector is not normalised")
            v.flags.writeable = False
            object.__setattr__(self, "vector", v)
        else:
            rho = np.array(self.density, dtype=complex)
            if rho.shape != (d, d):
                raise ValueError(f"expected a {d}x{d} density matrix")
            if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(rho).real - 1) > STATE_TOL:
                raise ValueError("density matrix does not have unit trace")
            if np.linalg.eigvalsh(rho).min() < -1e-9:
                raise ValueError("density matrix is not positive semi-definite")
            rho.flags.writeable = False
            object.__setattr__(self, "density", rho)

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def density_matrix(self) -> np.ndarray:
        if self.vector is not None:
            return np.outer(self.vector, self.vector.conj())
        return self.density

    def probabilities(self) -> np.ndarray:
        """Born distribution over computational basis indices."""
        if self.vector is not None:
            p = np.abs(self.vector) ** 2
        else:
            p = np.clip(np.diagonal(self.density).real, 0, None)
        return p / p.sum()


# -- constructors -----------------------------------------------------------


def from_bits(bits: str) -> int:
    return int(bits, 2)


def to_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def prepare_basis_state(bits: str, n: int | None = None) -> QuantumState:
    if n is not None and len(bits) != n:
        raise ValueError(f"bitstring has length {len(bits)}, expected {n}")
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    vec = np.zeros(1 << len(bits), dtype=complex)
    vec[int(bits, 2)] = 1
    return QuantumState(len(bits), vector=vec)


def zero_state(n: int) -> QuantumState:
    return prepare_basis_state("0" * n)


def ghz_state(n: int) -> QuantumState:
    vec = np.zeros(1 << n, dtype=complex)
    vec[0] = vec[-1] = 1 / np.sqrt(2)
    return QuantumState(n, vector=vec)


def bell_state() -> QuantumState:
    return ghz_state(2)


def random_pure(n: int, seed: int | np.random.Generator) -> QuantumState:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return QuantumState(n, vector=v / np.linalg.norm(v))


def random_mixed(n: int, rank: int, seed: int | np.random.Generator) -> QuantumState:
    """Random density matrix of the given rank with Dirichlet-distributed weights."""
    rng = np.random.default_rng(seed)
    d = 1 << n
    if not 1 <= rank <= d:
        raise ValueError("rank out of range")
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    q, _ = np.linalg.qr(a)
    w = rng.dirichlet(np.ones(rank))
    rho = (q * w) @ q.conj().T
    return QuantumState(n, density=(rho + rho.conj().T) / 2)


def maximally_mixed(n: int) -> QuantumState:
    d = 1 << n
    return QuantumState(n, density=np.eye(d, dtype=complex) / d)


def _complex_array(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def state_from_json(data: dict) -> QuantumState:
    """Parse ``{"family": ..., "n": .., "seed": ..}``, ``{"amplitudes": ...}``
    or ``{"density": [[[re, im], ...], ...]}``."""
    if "density" in data:
        rho = _complex_array(data["density"])
        n = int(np.log2(rho.shape[0]))
        if rho.ndim != 2 or 1 << n != rho.shape[0]:
            raise ValueError("density matrix size is not a power of two")
        return QuantumState(n, density=rho)
    if "amplitudes" in data:
        vec = _complex_array(data["amplitudes"])
        n = int(np.log2(vec.size))
        if 1 << n != vec.size:
            raise ValueError("amplitude count is not a power of two")
        return QuantumState(n, vector=vec)
    family = data.get("family")
    if family == "bell":
        return bell_state()
    n = int(data["n"])
    if family == "zero":
        return zero_state(n)
    if family == "ghz":
        return ghz_state(n)
    if family == "random_pure":
        return random_pure(n, int(data["seed"]))
    if family == "random_mixed":
        return random_mixed(n, int(data.get("rank", 2)), int(data["seed"]))
    if family == "maximally_mixed":
        return maximally_mixed(n)
    raise ValueError(f"unknown state family {family!r}")


# -- observables -------------------------------------------------------------


class Observable:
    """Hermitian operator on an ``n``-qubit register.

    Subclasses provide the support, the restriction to that support and the
    spectral data used to sample single-shot outcomes.
    """

    n: int

    @property
    def support(self) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def locality(self) -> int:
        return len(self.support)

    def support_matrix(self) -> np.ndarray:
        """The ``2^k x 2^k`` block acting on ``support`` (in support order)."""
        raise NotImplementedError

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors (columns) of the support block."""
        w, v = np.linalg.eigh(self.support_matrix())
        return w, v

    @cached_property
    def trace(self) -> float:
        return float(np.sum(self.spectrum[0])) * 2 ** (self.n - self.locality)

    @cached_property
    def trace_of_square(self) -> float:
        return float(np.sum(self.spectrum[0] ** 2)) * 2 ** (self.n - self.locality)

    @cached_property
    def inf_norm(self) -> float:
        w = self.spectrum[0]
        return float(np.max(np.abs(w))) if w.size else 0.0

    @cached_property
    def value_range(self) -> tuple[float, float]:
        """Smallest and largest eigenvalue; every expectation lies in between."""
        w = self.spectrum[0]
        return float(w.min()), float(w.max())

    def to_dense(self) -> np.ndarray:
        return gates.embed_support(self.support_matrix(), self.support, self.n)


class PauliString(Observable):
    """``coeff`` times a tensor product of single-qubit Paulis."""

    def __init__(self, letters: str, coeff: float = 1.0):
        letters = letters.upper()
        if not letters or set(letters) - set(paulis.LETTERS):
            raise ValueError(f"invalid Pauli string {letters!r}")
        self.letters = letters
        self.coeff = float(coeff)
        self.n = len(letters)
        self.masks = paulis.letters_to_masks(letters)

    def __repr__(self):
        return f"PauliString({self.letters!r}, coeff={self.coeff})"

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, ch in enumerate(self.letters) if ch != "I")

    @property
    def support_letters(self) -> str:
        return "".join(ch for ch in self.letters if ch != "I")

    def support_matrix(self) -> np.ndarray:
        return self.coeff * gates.kron_all(
            gates.PAULI_MATRICES[ch] for ch in self.support_letters
        )

    @cached_property
    def trace(self) -> float:
        return self.coeff * (1 << self.n) if self.locality == 0 else 0.0

    @cached_property
    def trace_of_square(self) -> float:
        return self.coeff**2 * (1 << self.n)

    @cached_property
    def inf_norm(self) -> float:
        return abs(self.coeff)

    def to_dense(self) -> np.ndarray:
        return self.coeff * paulis.dense(self.masks, self.n)


class Projector(Observable):
    """Rank-one projector ``|psi><psi|`` onto a pure target state."""

    def __init__(self, target: np.ndarray | QuantumState):
        if isinstance(target, QuantumState):
            if not target.is_pure:
                raise ValueError("projector target must be pure")
            target = target.vector
        vec = np.array(target, dtype=complex)
        n = int(np.log2(vec.size))
        if vec.ndim != 1 or 1 << n != vec.size:
            raise ValueError("target length must be a power of two")
        norm = np.linalg.norm(vec)
        if abs(norm - 1) > STATE_TOL:
            raise ValueError("projector target is not normalised")
        vec.flags.writeable = False
        self.target = vec
        self.n = n

    def __repr__(self):
        return f"Projector(n={self.n})"

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    def support_matrix(self) -> np.ndarray:
        return np.outer(self.target, self.target.conj())

    @cached_property
    def spectrum(self):
        # only the eigenvalue-1 direction matters; the orthogonal complement
        # is handled as "everything else" by the samplers
        return np.array([1.0]), self.target.reshape(-1, 1)

    trace = 1.0
    trace_of_square = 1.0
    inf_norm = 1.0
    value_range = (0.0, 1.0)

    def to_dense(self) -> np.ndarray:
        return self.support_matrix()


class DenseHermitian(Observable):
    """Explicit Hermitian matrix on a qubit subset, identity elsewhere."""

    def __init__(self, matrix: np.ndarray, support, n: int):
        mat = np.array(matrix, dtype=complex)
        support = tuple(int(q) for q in support)
        k = len(support)
        if mat.shape != (1 << k, 1 << k):
            raise ValueError("matrix size does not match support")
        if len(set(support)) != k or any(q < 0 or q >= n for q in support):
            raise ValueError(f"support {support} not inside {n} qubits")
        if np.max(np.abs(mat - mat.conj().T)) > STATE_TOL:
            raise ValueError("matrix is not Hermitian")
        mat.flags.writeable = False
        self.matrix = mat
        self._support = support
        self.n = n

    def __repr__(self):
        return f"DenseHermitian(support={self._support}, n={self.n})"

    @property
    def support(self) -> tuple[int, ...]:
        return self._support

    def support_matrix(self) -> np.ndarray:
        return self.matrix


def observable_from_json(data: dict, n: int | None = None) -> Observable:
    kind = data.get("type")
    if kind == "pauli":
        obs = PauliString(data["letters"], data.get("coeff", 1.0))
    elif kind == "projector":
        obs = Projector(_complex_array(data["amplitudes"]))
    elif kind == "dense":
        if n is None:
            raise ValueError("dense observables need the register size")
        return DenseHermitian(_complex_array(data["matrix"]), data["support"], n)
    else:
        raise ValueError(f"unknown observable type {kind!r}")
    if n is not None and obs.n != n:
        raise ValueError(f"observable acts on {obs.n} qubits, state has {n}")
    return obs


# -- operations ---------------------------------------------------------------


def apply_unitary(state: QuantumState, u: CliffordTableau | np.ndarray) -> QuantumState:
    if isinstance(u, CliffordTableau):
        if u.n != state.n:
            raise ValueError("tableau size does not match state")
        u = dense_export(u, max_qubits=MAX_QUBITS)
    u = np.asarray(u, dtype=complex)
    if u.shape != (state.dim, state.dim):
        raise ValueError("unitary dimension does not match state")
    if np.max(np.abs(u.conj().T @ u - np.eye(state.dim))) > UNITARY_TOL:
        raise ValueError("matrix is not unitary")
    if state.is_pure:
        v = u @ state.vector
        return QuantumState(state.n, vector=v / np.linalg.norm(v))
    rho = u @ state.density @ u.conj().T
    return QuantumState(state.n, density=(rho + rho.conj().T) / 2)


def rotate_qubits(state: QuantumState, rotations: dict[int, np.ndarray]) -> QuantumState:
    """Apply single-qubit gates ``{qubit: 2x2}`` without forming a tensor product."""
    n = state.n
    if state.is_pure:
        v = state.vector
        for q, u in rotations.items():
            v = gates.apply_1q(v, u, q, n)
        return QuantumState(n, vector=v)
    rho = state.density
    for q, u in rotations.items():
        rho = gates.conjugate_1q(rho, u, q, n)
    return QuantumState(n, density=(rho + rho.conj().T) / 2)


def sample_computational(state: QuantumState, rng: np.random.Generator) -> str:
    """One Born-rule draw in the computational basis, as a bitstring."""
    return to_bits(int(rng.choice(state.dim, p=state.probabilities())), state.n)


def _check_support(state: QuantumState, obs: Observable):
    if obs.n != state.n:
        raise ValueError(f"observable acts on {obs.n} qubits, state has {state.n}")


def outcome_distribution(state: QuantumState, obs: Observable):
    """Eigenvalues of ``obs`` and their Born probabilities in ``state``.

    Pauli strings are measured by rotating each support qubit into the Z
    basis and reading the parity of those bits.  Projectors give a two-point
    distribution on {0, 1}.  Dense observables use the cached eigenbasis of
    their support block.
    """
    _check_support(state, obs)
    n = state.n
    if isinstance(obs, PauliString):
        if obs.locality == 0:
            return np.array([obs.coeff]), np.array([1.0])
        rot = {q: gates.BASIS_ROTATIONS[obs.letters[q]] for q in obs.support}
        probs = rotate_qubits(state, rot).probabilities()
        mask = 0
        for q in obs.support:
            mask |= paulis.qubit_bit(n, q)
        odd = paulis.parity(np.arange(state.dim) & mask).astype(bool)
        p_minus = float(np.clip(probs[odd].sum(), 0, 1))
        return np.array([obs.coeff, -obs.coeff]), np.array([1 - p_minus, p_minus])
    if isinstance(obs, Projector):
        if state.is_pure:
            p1 = abs(np.vdot(obs.target, state.vector)) ** 2
        else:
            p1 = np.vdot(obs.target, state.density @ obs.target).real
        p1 = float(np.clip(p1, 0, 1))
        return np.array([0.0, 1.0]), np.array([1 - p1, p1])
    w, v = obs.spectrum
    if state.is_pure:
        amps = v.conj().T @ gates.to_support_front(state.vector, obs.support, n)
        probs = np.sum(np.abs(amps) ** 2, axis=1)
    else:
        red = gates.reduced_density(state.density, obs.support, n)
        probs = np.einsum("ia,ij,ja->a", v.conj(), red, v).real
    probs = np.clip(probs, 0, None)
    return w, probs / probs.sum()


def sample_observable(
    state: QuantumState, obs: Observable, rng: np.random.Generator, shots: int
) -> np.ndarray:
    """``shots`` independent single-shot outcomes (no collapse between shots)."""
    values, probs = outcome_distribution(state, obs)
    return values[rng.choice(values.size, size=shots, p=probs)]


def measure_observable(state: QuantumState, obs: Observable, rng: np.random.Generator) -> float:
    return float(sample_observable(state, obs, rng, 1)[0])


def exact_expectation(state: QuantumState, obs: Observable) -> float:
    """``tr(rho O)``; Pauli strings are contracted sparsely in O(2^n)."""
    _check_support(state, obs)
    if isinstance(obs, PauliString):
        if state.is_pure:
            val = paulis.expectation_vector(obs.masks, state.vector, state.n)
        else:
            val = paulis.trace_with(obs.masks, state.density, state.n)
        return obs.coeff * val.real
    if isinstance(obs, Projector):
        _, probs = outcome_distribution(state, obs)
        return float(probs[1])
    if state.is_pure:
        m = gates.to_support_front(state.vector, obs.support, state.n)
        return float(np.einsum("ia,ij,ja->", m.conj(), obs.matrix, m).real)
    red = gates.reduced_density(state.density, obs.support, state.n)
    return float(np.trace(red @ obs.matrix).real)
