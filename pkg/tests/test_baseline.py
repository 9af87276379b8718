import numpy as np
import pytest

from conftest import kron_letters
from qcshadow import baseline as B
from qcshadow.ensembles import PauliSettings, sample_clifford, settings_to_rotation
from qcshadow.gates import kron_all
from qcshadow.qstate import (
    DenseHermitian,
    PauliString,
    Projector,
    maximally_mixed,
    random_mixed,
    random_pure,
    zero_state,
)
from qcshadow.tableau import dense_export, identity

PLUS = np.array([1, 1]) / np.sqrt(2)


def test_pauli_snapshot_examples():
    assert np.allclose(B.snapshot_pauli(PauliSettings("Z"), "0").matrix, np.diag([2, -1]))
    assert np.allclose(B.snapshot_pauli(PauliSettings("X"), "0").matrix,
                       3 * np.outer(PLUS, PLUS) - np.eye(2))
    assert np.allclose(B.snapshot_pauli(PauliSettings("ZZ"), "01").matrix,
                       np.kron(np.diag([2, -1]), np.diag([-1, 2])))
    with pytest.raises(ValueError):
        B.snapshot_pauli(PauliSettings("ZZ"), "0")


def test_clifford_snapshot_examples(rng):
    assert np.allclose(B.snapshot_clifford(identity(1), "0").matrix, np.diag([2, -1]))
    e00 = np.zeros((4, 4))
    e00[0, 0] = 1
    assert np.allclose(B.snapshot_clifford(identity(2), "00").matrix, 5 * e00 - np.eye(4))
    snap = B.snapshot_clifford(sample_clifford(2, rng), "10").matrix
    assert abs(np.trace(snap) - 1) < 1e-9
    assert np.abs(snap - snap.conj().T).max() < 1e-10
    with pytest.raises(ValueError):
        B.snapshot_clifford(identity(11), "0" * 11)


def test_snapshots_are_unit_trace_but_not_psd(rng):
    for _ in range(20):
        t = sample_clifford(3, rng)
        m = B.snapshot_clifford(t, "011").matrix
        assert abs(np.trace(m) - 1) < 1e-9
        assert np.linalg.eigvalsh(m).min() < 0
        p = B.snapshot_pauli(PauliSettings("XYZ"), "101").matrix
        assert abs(np.trace(p) - 1) < 1e-9


def test_channel_forward_examples():
    for scheme in ("clifford", "pauli"):
        mm = B.channel_forward(maximally_mixed(2), scheme)
        assert np.allclose(mm.density, np.eye(4) / 4)
        out = B.channel_forward(zero_state(1), scheme)
        assert np.allclose(out.density, np.diag([2 / 3, 1 / 3]))


def test_channel_forward_matches_ensemble_average():
    # Pauli channel by exact enumeration of all 3^n settings and outcomes
    rho = random_mixed(2, 2, 3).density
    avg = np.zeros((4, 4), complex)
    for bases in ("XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"):
        u = kron_all(settings_to_rotation(PauliSettings(bases)))
        for b in range(4):
            ket = u.conj().T[:, b]
            proj = np.outer(ket, ket.conj())
            avg += np.vdot(ket, rho @ ket).real * proj / 9
    assert np.allclose(avg, B.channel_forward(rho, "pauli"), atol=1e-12)


def test_channel_inverse_examples():
    assert np.allclose(B.channel_inverse(np.diag([1.0, 0.0]), "clifford"), np.diag([2, -1]))
    e00 = np.zeros((4, 4))
    e00[0, 0] = 1
    assert np.allclose(B.channel_inverse(e00, "pauli"),
                       np.kron(np.diag([2, -1]), np.diag([2, -1])))
    for seed in range(20):
        n = 1 + seed % 3
        rho = random_mixed(n, 1 + seed % 2, seed).density
        for scheme in ("clifford", "pauli"):
            back = B.channel_inverse(B.channel_forward(rho, scheme), scheme)
            assert np.abs(back - rho).max() <= 1e-9


def test_pauli_snapshot_is_inverse_channel_of_projector():
    for bases in ("X", "YZ", "ZXY"):
        s = PauliSettings(bases)
        u = kron_all(settings_to_rotation(s))
        n = len(bases)
        for b in range(1 << n):
            ket = u.conj().T[:, b]
            proj = np.outer(ket, ket.conj())
            bits = format(b, f"0{n}b")
            assert np.allclose(B.snapshot_pauli(s, bits).matrix,
                               B.channel_inverse(proj, "pauli"), atol=1e-12)


def test_clifford_snapshot_is_inverse_channel_of_projector(rng):
    t = sample_clifford(3, rng)
    ket = dense_export(t).conj()[5]
    assert np.allclose(B.snapshot_clifford(t, "101").matrix,
                       B.channel_inverse(np.outer(ket, ket.conj()), "clifford"))


def test_estimate_trace_examples(rng):
    z = PauliString("Z")
    assert B.estimate_trace(B.snapshot_pauli(PauliSettings("Z"), "0"), z) == pytest.approx(3)
    snap = B.snapshot_pauli(PauliSettings("ZZ"), "00")
    assert B.estimate_trace(snap, PauliString("ZI")) == pytest.approx(3)
    snap3 = B.snapshot_pauli(PauliSettings("XYZ"), "110")
    for obs in (PauliString("XIZ", 0.5), PauliString("YYY"),
                DenseHermitian(np.array([[1, 2j], [-2j, 0]]), (1,), 3),
                Projector(random_pure(3, 2))):
        oracle = np.trace(snap3.matrix @ obs.to_dense()).real
        assert B.estimate_trace(snap3, obs) == pytest.approx(oracle, abs=1e-10)
        assert B.estimate_trace(snap3, obs, fast=False) == pytest.approx(oracle, abs=1e-10)
    with pytest.raises(ValueError):
        B.estimate_trace(snap3, PauliString("XX"))


def test_stored_scalar_counts():
    assert B.stored_scalars_dense(3) == 2 * 64
    snap = B.snapshot_clifford(identity(3), "000")
    assert snap.stored_scalars == B.stored_scalars_dense(3)
    assert B.snapshot_pauli(PauliSettings("XYZ"), "000").stored_scalars == 24


def test_baseline_estimator_unbiased_and_within_shadow_norm(rng):
    from qcshadow.estimator import shadow_norm_bound
    from qcshadow import qcqc

    st = random_pure(2, 8)
    obs = PauliString("XZ")
    recs = qcqc.acquire(st, "clifford", 20_000, rng, counter=qcqc.CopyCounter())
    vals = np.array([B.estimate_trace(B.snapshot_clifford(r.unitary.payload, r.b), obs)
                     for r in recs])
    exact = np.vdot(st.vector, kron_letters("XZ") @ st.vector).real
    assert abs(vals.mean() - exact) <= 4 * vals.std() / np.sqrt(vals.size)
    assert vals.var() <= shadow_norm_bound(obs, "clifford") ** 2 * 1.05
