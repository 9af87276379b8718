"""Stabilizer tableaux for n-qubit Clifford unitaries.

Row ``i < n`` of ``bits`` is the image of ``X_i`` under conjugation by the
unitary, row ``n + i`` the image of ``Z_i``; columns are ``[x | z]``.
``phases`` holds the sign bit of each row (``1`` means a leading minus).
Global phase is not represented.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import paulis

DENSE_CAP = 10
"""Largest qubit count for which a tableau may be expanded to a dense matrix."""


@dataclass(frozen=True, eq=False)
class CliffordTableau:
    n: int
    bits: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8) & 1
        phases = np.asarray(self.phases, dtype=np.uint8) & 1
        if bits.shape != (2 * self.n, 2 * self.n) or phases.shape != (2 * self.n,):
            raise ValueError("tableau shape does not match qubit count")
        bits.flags.writeable = False
        phases.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "phases", phases)

    def __eq__(self, other):
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.bits, other.bits)
            and np.array_equal(self.phases, other.phases)
        )

    __hash__ = None

    @property
    def destabilizers(self) -> list[tuple[int, int, int]]:
        return [self.row(i) for i in range(self.n)]

    @property
    def stabilizers(self) -> list[tuple[int, int, int]]:
        return [self.row(self.n + i) for i in range(self.n)]

    def row(self, i: int) -> tuple[int, int, int]:
        """Row ``i`` as a sparse Pauli ``(x, z, p)``."""
        n = self.n
        w = _weights(n)
        x = int(self.bits[i, :n].astype(np.int64) @ w)
        z = int(self.bits[i, n:].astype(np.int64) @ w)
        return x, z, (2 * int(self.phases[i]) + paulis.popcount(x & z)) % 4

    def to_hex(self) -> tuple[str, str]:
        return (
            np.packbits(self.bits.ravel()).tobytes().hex(),
            np.packbits(self.phases).tobytes().hex(),
        )

    @classmethod
    def from_hex(cls, n: int, tableau: str, phases: str) -> "CliffordTableau":
        raw = np.unpackbits(np.frombuffer(bytes.fromhex(tableau), dtype=np.uint8))
        ph = np.unpackbits(np.frombuffer(bytes.fromhex(phases), dtype=np.uint8))
        size = 4 * n * n
        if raw.size < size or ph.size < 2 * n:
            raise ValueError("hex payload too short for qubit count")
        return cls(n, raw[:size].reshape(2 * n, 2 * n), ph[: 2 * n])


def _weights(n: int) -> np.ndarray:
    return np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))


@lru_cache(maxsize=None)
def _omega(n: int) -> np.ndarray:
    om = np.zeros((2 * n, 2 * n), dtype=np.int64)
    om[:n, n:] = om[n:, :n] = np.eye(n, dtype=np.int64)
    om.flags.writeable = False
    return om


def _i_exponents(bits: np.ndarray, phases: np.ndarray, n: int) -> np.ndarray:
    b = bits.astype(np.int64)
    return (2 * phases.astype(np.int64) + (b[:, :n] & b[:, n:]).sum(axis=1)) % 4


def identity(n: int) -> CliffordTableau:
    return CliffordTableau(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, np.uint8))


def gate(name: str, n: int, *qubits: int) -> CliffordTableau:
    """Tableau of a named elementary gate (H, S, SDG, X, Y, Z, CNOT) placed on
    ``qubits`` of an ``n``-qubit register."""
    bits = np.eye(2 * n, dtype=np.uint8)
    phases = np.zeros(2 * n, dtype=np.uint8)
    name = name.upper()
    if name == "CNOT":
        c, t = qubits
        bits[c, t] = 1  # X_c -> X_c X_t
        bits[n + t, n + c] = 1  # Z_t -> Z_c Z_t
        return CliffordTableau(n, bits, phases)
    (q,) = qubits
    xr, zr = q, n + q
    if name == "H":
        bits[xr, q], bits[xr, n + q] = 0, 1
        bits[zr, q], bits[zr, n + q] = 1, 0
    elif name in ("S", "SDG"):
        bits[xr, n + q] = 1  # X -> +-Y
        phases[xr] = 1 if name == "SDG" else 0
    elif name == "X":
        phases[zr] = 1
    elif name == "Z":
        phases[xr] = 1
    elif name == "Y":
        phases[xr] = phases[zr] = 1
    else:
        raise ValueError(f"unknown gate {name!r}")
    return CliffordTableau(n, bits, phases)


def verify_tableau(t: CliffordTableau) -> bool:
    """True when the rows preserve the binary symplectic form and every row
    is a Hermitian Pauli (always the case for sign-bit storage)."""
    n = t.n
    m = t.bits.astype(np.int64)
    return bool(np.array_equal((m @ _omega(n) @ m.T) % 2, _omega(n)))


def _conjugate_rows(a: CliffordTableau, sel: np.ndarray, p_in: np.ndarray):
    """Images under ``a`` of the Paulis ``i^p_in X^x Z^z`` with ``sel = [x|z]``
    (one per row).  Returns ``(bits, i_exponents)``."""
    n = a.n
    A = a.bits.astype(np.int64)
    S = sel.astype(np.int64)
    out = (S @ A) % 2
    pa = _i_exponents(a.bits, a.phases, n)
    # ordered product over selected rows: extra i^2 for every pair j<l with
    # odd z_j . x_l
    G = np.triu(A[:, n:] @ A[:, :n].T, 1)
    cross = np.einsum("ij,jl,il->i", S, G, S)
    p = (p_in + S @ pa + 2 * cross) % 4
    return out, p


def _signs_from_exponents(bits: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    b = bits.astype(np.int64)
    rem = (p - (b[:, :n] & b[:, n:]).sum(axis=1)) % 4
    if np.any(rem % 2):
        raise ValueError("product is not Hermitian; invalid tableau")
    return (rem // 2).astype(np.uint8)


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau of the product ``A @ B`` (``B`` acts first)."""
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    n = a.n
    bits, p = _conjugate_rows(a, b.bits, _i_exponents(b.bits, b.phases, n))
    return CliffordTableau(n, bits, _signs_from_exponents(bits, p, n))


def adjoint(t: CliffordTableau) -> CliffordTableau:
    """Tableau of the inverse unitary."""
    if not verify_tableau(t):
        raise ValueError("invalid tableau")
    n = t.n
    # symplectic inverse Omega M^T Omega, written blockwise
    m = t.bits
    inv_bits = np.empty_like(m)
    inv_bits[:n, :n] = m[n:, n:].T
    inv_bits[:n, n:] = m[:n, n:].T
    inv_bits[n:, :n] = m[n:, :n].T
    inv_bits[n:, n:] = m[:n, :n].T
    probe = compose(t, CliffordTableau(n, inv_bits, np.zeros(2 * n, np.uint8)))
    # probe rows are +-X_i / +-Z_i; flipping a row sign of the inverse flips
    # the matching probe sign
    return CliffordTableau(n, inv_bits, probe.phases)


def conjugate_pauli(t: CliffordTableau, letters: str) -> tuple[int, str]:
    """Image ``U P U^dagger`` of a Pauli string as ``(sign, letters)``."""
    n = t.n
    if len(letters) != n:
        raise ValueError("Pauli string length does not match tableau")
    sel = np.zeros((1, 2 * n), dtype=np.int64)
    for q, ch in enumerate(letters):
        if ch in "XY":
            sel[0, q] = 1
        if ch in "ZY":
            sel[0, n + q] = 1
    p_in = np.array([(sel[0, :n] & sel[0, n:]).sum() % 4])
    bits, p = _conjugate_rows(t, sel, p_in)
    sign = _signs_from_exponents(bits, p, n)[0]
    out = "".join(
        "IXZY"[int(bits[0, q]) + 2 * int(bits[0, n + q])] for q in range(n)
    )
    return (-1 if sign else 1), out


def stabilizer_vector(generators, n: int) -> np.ndarray:
    """Amplitude vector of the state fixed by ``n`` independent commuting
    Hermitian Paulis given as ``(x, z, p)`` masks.

    Costs O(n^2) mask operations plus O(n 2^n) arithmetic; no ``2^n x 2^n``
    array is formed.
    """
    rows = list(generators)
    if len(rows) != n:
        raise ValueError("need exactly n generators")
    r = 0
    for q in range(n):
        bit = paulis.qubit_bit(n, q)
        hit = next((i for i in range(r, n) if rows[i][0] & bit), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(n):
            if i != r and rows[i][0] & bit:
                rows[i] = paulis.mul(rows[i], rows[r])
        r += 1
    x_rows, z_rows = rows[:r], rows[r:]

    # Z-type rows fix parities of the support: z . y = p / 2 (mod 2)
    eqs = [(z, (p // 2) & 1) for _, z, p in z_rows]
    pivots = []
    k = 0
    for q in range(n):
        bit = paulis.qubit_bit(n, q)
        hit = next((i for i in range(k, len(eqs)) if eqs[i][0] & bit), None)
        if hit is None:
            continue
        eqs[k], eqs[hit] = eqs[hit], eqs[k]
        for i in range(len(eqs)):
            if i != k and eqs[i][0] & bit:
                eqs[i] = (eqs[i][0] ^ eqs[k][0], eqs[i][1] ^ eqs[k][1])
        pivots.append(bit)
        k += 1
    if any(rhs for z, rhs in eqs[k:]):
        raise ValueError("generators are inconsistent")
    y0 = 0
    for bit, (_, rhs) in zip(pivots, eqs):
        if rhs:
            y0 |= bit

    vec = np.zeros(1 << n, dtype=complex)
    vec[y0] = 1.0
    for g in x_rows:
        vec = vec + paulis.apply(g, vec, n)
    return vec / np.linalg.norm(vec)


def basis_image(t: CliffordTableau, b: int) -> np.ndarray:
    """``U |b>`` as an amplitude vector, up to global phase.

    ``|b>`` is stabilised by ``(-1)^{b_q} Z_q``, so the image is stabilised by
    the tableau's stabilizer rows with the signs flipped where ``b`` has ones.
    """
    n = t.n
    gens = []
    for q, (x, z, p) in enumerate(t.stabilizers):
        if b & paulis.qubit_bit(n, q):
            p = (p + 2) % 4
        gens.append((x, z, p))
    return stabilizer_vector(gens, n)


def dense_export(t: CliffordTableau, max_qubits: int | None = None) -> np.ndarray:
    """The ``2^n x 2^n`` unitary, unique up to global phase.

    Column ``x`` is ``U X^x |0> = (prod_q D_q^{x_q}) U|0>`` with ``D_q`` the
    destabilizer rows, which commute pairwise.
    """
    cap = DENSE_CAP if max_qubits is None else max_qubits
    n = t.n
    if n > cap:
        raise ValueError(f"dense export limited to n <= {cap}, got n = {n}")
    d = 1 << n
    u = np.zeros((d, d), dtype=complex)
    u[:, 0] = stabilizer_vector(t.stabilizers, n)
    destab = t.destabilizers
    for q in range(n - 1, -1, -1):
        bit = paulis.qubit_bit(n, q)
        u[:, bit : 2 * bit] = paulis.apply(destab[q], u[:, :bit], n)
    return u
