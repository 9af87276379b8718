"""Monte Carlo verification suites.

Each check returns a :class:`CheckResult`; the CLI's ``verify`` command and
the acceptance tests both run these.  Sample sizes and tolerances are module
constants so the documented numbers and the executed numbers cannot drift.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import baseline, qcqc
from .ensembles import sample_clifford, sample_pauli_settings, settings_to_rotation
from .estimator import median_of_means, plan, variance_bound
from .gates import kron_all
from .qstate import (
    DenseHermitian,
    Observable,
    PauliString,
    Projector,
    QuantumState,
    bell_state,
    exact_expectation,
    ghz_state,
    random_mixed,
    random_pure,
)
from .tableau import dense_export

CHANNEL_SAMPLES = 100_000
UNBIASED_RECORDS = 10_000
BRIDGE_RECORDS = 100
BRIDGE_REPEATS = 10_000
VARIANCE_SLACK = 1.15
SIGMAS = 4.0
MOM_TRIALS = 500
MOM_POINTS = ((0.2, 0.1, 1), (0.3, 0.05, 4))
SUITES = ("channel", "unbiased", "variance", "mom", "records")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items() if not isinstance(v, list))
        return f"{status}  {self.name}  ({info}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def channel_states(n: int) -> list[QuantumState]:
    """Three seeded test states per qubit count: pure, rank-2 mixed, GHZ-like."""
    return [random_pure(n, 100 + n), random_mixed(n, 2, 200 + n), ghz_state(n)]


# -- phase-1 moments -----------------------------------------------------------


def _kets_clifford(states, n, rng, size):
    """Post-measurement kets ``U^dag |b>`` for ``size`` shared Clifford draws."""
    us = np.stack([dense_export(sample_clifford(n, rng)) for _ in range(size)])
    out = []
    for st in states:
        if st.is_pure:
            probs = np.abs(us @ st.vector) ** 2
        else:
            probs = np.einsum("sij,jk,sik->si", us, st.density, us.conj()).real
        b = _draw_rows(probs, rng)
        out.append(us[np.arange(size), b].conj())
    return out


def _kets_pauli(states, n, rng, size):
    """Same for random Pauli bases.  Unitaries are cached per basis string."""
    cache: dict[str, np.ndarray] = {}
    us = np.empty((size, 1 << n, 1 << n), dtype=complex)
    for s in range(size):
        settings = sample_pauli_settings(n, rng)
        if settings.bases not in cache:
            cache[settings.bases] = kron_all(settings_to_rotation(settings))
        us[s] = cache[settings.bases]
    out = []
    for st in states:
        if st.is_pure:
            probs = np.abs(us @ st.vector) ** 2
        else:
            probs = np.einsum("sij,jk,sik->si", us, st.density, us.conj()).real
        b = _draw_rows(probs, rng)
        out.append(us[np.arange(size), b].conj())
    return out


def _draw_rows(probs: np.ndarray, rng) -> np.ndarray:
    cum = np.cumsum(probs, axis=1)
    u = rng.random((probs.shape[0], 1)) * cum[:, -1:]
    return np.minimum((u >= cum).sum(axis=1), probs.shape[1] - 1)


def phase1_moments(states, scheme: str, samples: int, seed: int, chunk: int = 10_000):
    """Monte Carlo first moments of the phase-1 process for several states.

    Returns per state a dict with the mean of ``U^dag |b><b| U``, the mean of
    the snapshot and the per-entry standard deviation of the snapshot (real
    and imaginary parts separately).
    """
    n = states[0].n
    d = 1 << n
    rng = np.random.default_rng([seed, n, 0 if scheme == "clifford" else 1])
    kets_fn = _kets_clifford if scheme == "clifford" else _kets_pauli
    acc = [
        {"proj": np.zeros((d, d), complex), "snap": np.zeros((d, d), complex),
         "sq_re": np.zeros((d, d)), "sq_im": np.zeros((d, d))}
        for _ in states
    ]
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        for a, kets in zip(acc, kets_fn(states, n, rng, size)):
            proj = np.einsum("si,sj->sij", kets, kets.conj())
            snap = baseline.channel_inverse(proj, scheme)
            a["proj"] += proj.sum(axis=0)
            a["snap"] += snap.sum(axis=0)
            a["sq_re"] += (snap.real**2).sum(axis=0)
            a["sq_im"] += (snap.imag**2).sum(axis=0)
        done += size
    out = []
    for a in acc:
        mean = a["snap"] / samples
        var_re = np.maximum(a["sq_re"] / samples - mean.real**2, 0) * samples / (samples - 1)
        var_im = np.maximum(a["sq_im"] / samples - mean.imag**2, 0) * samples / (samples - 1)
        out.append({
            "proj_mean": a["proj"] / samples,
            "snap_mean": mean,
            "snap_std_re": np.sqrt(var_re),
            "snap_std_im": np.sqrt(var_im),
        })
    return out


def check_channel(scheme: str, samples: int = CHANNEL_SAMPLES, seed: int = 0,
                  moments: dict | None = None) -> CheckResult:
    """Average of ``U^dag |b><b| U`` against the closed-form channel."""
    t0 = time.perf_counter()
    tol = 5 / math.sqrt(samples)
    worst = 0.0
    for n in (1, 2, 3):
        states = channel_states(n)
        mom = moments[n] if moments else phase1_moments(states, scheme, samples, seed)
        for st, m in zip(states, mom):
            target = baseline.channel_forward(st.density_matrix(), scheme)
            diff = m["proj_mean"] - target
            worst = max(worst, np.abs(diff.real).max(), np.abs(diff.imag).max())
    return CheckResult(f"channel[{scheme}]", worst <= tol,
                       {"max_dev": worst, "tol": tol}, time.perf_counter() - t0)


def check_snapshot_mean(scheme: str, samples: int = CHANNEL_SAMPLES, seed: int = 0,
                        moments: dict | None = None) -> CheckResult:
    """Average snapshot against rho, entrywise within 5 standard errors."""
    t0 = time.perf_counter()
    worst = 0.0  # largest deviation in units of its standard error
    for n in (1, 2, 3):
        states = channel_states(n)
        mom = moments[n] if moments else phase1_moments(states, scheme, samples, seed)
        for st, m in zip(states, mom):
            diff = m["snap_mean"] - st.density_matrix()
            for dev, std in ((diff.real, m["snap_std_re"]), (diff.imag, m["snap_std_im"])):
                se = np.maximum(std / math.sqrt(samples), 1e-12)
                worst = max(worst, float((np.abs(dev) / se).max()))
    return CheckResult(f"snapshot_mean[{scheme}]", worst <= 5.0,
                       {"max_z": worst, "tol_z": 5.0}, time.perf_counter() - t0)


# -- QCQC unbiasedness and variance ---------------------------------------------


def pair_set(scheme: str) -> list[tuple[str, QuantumState, Observable]]:
    """(state, observable) pairs used by the unbiasedness and variance suites."""
    bell = bell_state()
    mixed2 = random_mixed(2, 2, 7)
    pure3 = random_pure(3, 11)
    ghz3 = ghz_state(3)
    mixed3 = random_mixed(3, 2, 13)
    rng = np.random.default_rng(17)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    dense2 = DenseHermitian((h + h.conj().T) / 4, (0, 2), 3)
    if scheme == "clifford":
        return [
            ("bell/bell-projector", bell, Projector(bell)),
            ("mixed2/ZZ", mixed2, PauliString("ZZ")),
            ("pure3/XZI", pure3, PauliString("XZI")),
            ("ghz3/dense{0,2}", ghz3, dense2),
            ("mixed3/projector", mixed3, Projector(random_pure(3, 19))),
        ]
    return [
        ("bell/XX", bell, PauliString("XX")),
        ("mixed2/Y", mixed2, PauliString("YI", 0.7)),
        ("pure3/XIZ", pure3, PauliString("XIZ")),
        ("ghz3/0.5ZZI", ghz3, PauliString("ZZI", 0.5)),
        ("mixed3/dense{0,2}", mixed3, dense2),
        ("pure3/XYZ", pure3, PauliString("XYZ")),
        ("bell/projector", bell, Projector(random_pure(2, 23))),
    ]


def qcqc_samples(scheme: str, records: int = UNBIASED_RECORDS, seed: int = 0):
    """Full-pipeline ``Y`` values (default shot counts) for every pair."""
    out = []
    for idx, (label, st, obs) in enumerate(pair_set(scheme)):
        rng = np.random.default_rng([seed, idx])
        recs = qcqc.acquire(st, scheme, records, rng, counter=qcqc.CopyCounter())
        ys = qcqc.estimate_variables(recs, [obs], seed=seed + 1)[:, 0]
        out.append((label, st, obs, ys))
    return out


def check_unbiased(scheme: str, samples=None, records: int = UNBIASED_RECORDS,
                   seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    samples = samples or qcqc_samples(scheme, records, seed)
    worst = 0.0
    rows = []
    for label, st, obs, ys in samples:
        exact = exact_expectation(st, obs)
        se = math.sqrt(ys.var(ddof=1) / ys.size)
        z = abs(ys.mean() - exact) / se if se > 0 else (0.0 if ys.mean() == exact else math.inf)
        worst = max(worst, z)
        rows.append([label, float(ys.mean()), exact, z])
    mixed = any("mixed" in r[0] for r in rows)
    passed = worst <= SIGMAS and len(rows) >= 5 and mixed
    return CheckResult(f"qcqc_unbiased[{scheme}]", passed,
                       {"pairs": len(rows), "max_z": worst, "tol_z": SIGMAS, "rows": rows},
                       time.perf_counter() - t0)


def check_variance(scheme: str, samples=None, records: int = UNBIASED_RECORDS,
                   seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    samples = samples or qcqc_samples(scheme, records, seed)
    worst = 0.0
    rows = []
    for label, st, obs, ys in samples:
        bound = variance_bound(obs, scheme)
        ratio = float(ys.var(ddof=1)) / bound
        worst = max(worst, ratio)
        rows.append([label, float(ys.var(ddof=1)), bound])
    return CheckResult(f"variance[{scheme}]", worst <= VARIANCE_SLACK,
                       {"max_var_over_bound": worst, "tol": VARIANCE_SLACK, "rows": rows},
                       time.perf_counter() - t0)


# -- per-record bridge -----------------------------------------------------------


def bridge_cases(scheme: str):
    if scheme == "clifford":
        return random_mixed(2, 2, 29), [Projector(bell_state()), PauliString("XY"),
                                        DenseHermitian(np.diag([1.0, -0.5]), (1,), 2)]
    return random_pure(3, 31), [PauliString("XIZ"), PauliString("YYI", -0.5),
                                Projector(random_pure(3, 37))]


def check_bridge(scheme: str, records: int = BRIDGE_RECORDS, repeats: int = BRIDGE_REPEATS,
                 seed: int = 0) -> CheckResult:
    """Phase-2 mean per record against the baseline snapshot trace."""
    t0 = time.perf_counter()
    st, observables = bridge_cases(scheme)
    recs = qcqc.acquire(st, scheme, records, np.random.default_rng([seed, 41]),
                        counter=qcqc.CopyCounter())
    worst = 0.0
    exact_gap = 0.0
    for i, rec in enumerate(recs):
        obs = observables[i % len(observables)]
        if scheme == "clifford":
            snap = baseline.snapshot_clifford(rec.unitary.payload, rec.b)
        else:
            snap = baseline.snapshot_pauli(rec.unitary.payload, rec.b)
        ref = baseline.estimate_trace(snap, obs)
        ys = qcqc.phase2(rec, obs, rng=np.random.default_rng([seed, 43, i]), size=repeats)
        se = ys.std(ddof=1) / math.sqrt(repeats)
        dev = abs(ys.mean() - ref)
        worst = max(worst, dev / se if se > 0 else (0.0 if dev < 1e-9 else math.inf))
        exact_gap = max(exact_gap, abs(qcqc.conditional_mean(rec, obs) - ref))
    passed = worst <= SIGMAS and exact_gap < 1e-8
    return CheckResult(f"bridge[{scheme}]", passed,
                       {"records": records, "max_z": worst, "tol_z": SIGMAS,
                        "exact_gap": exact_gap}, time.perf_counter() - t0)


# -- median of means -------------------------------------------------------------


def check_mom(trials: int = MOM_TRIALS, seed: int = 0) -> CheckResult:
    """Coverage of plan + median_of_means on skewed synthetic data.

    Values are ``mean + sqrt(V) (Exp(1) - 1)``: right-skewed with variance
    exactly ``V``.  A trial succeeds when all ``M`` estimates are within
    ``epsilon``.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 53])
    detail = {}
    passed = True
    for eps, delta, M in MOM_POINTS:
        var = 1.0
        p = plan(eps, delta, M, var)
        hits = 0
        for _ in range(trials):
            data = 0.5 + math.sqrt(var) * (rng.exponential(size=(M, p.N)) - 1.0)
            est = [median_of_means(row, p.K).estimate for row in data]
            hits += max(abs(e - 0.5) for e in est) <= eps
        rate = hits / trials
        detail[f"coverage({eps},{delta},{M})"] = rate
        passed &= rate >= 1 - delta
    return CheckResult("mom_coverage", passed, detail, time.perf_counter() - t0)


# -- records ---------------------------------------------------------------------


def check_records(tmpdir, seed: int = 0) -> CheckResult:
    """Record files are byte-identical on replay and round-trip losslessly."""
    from pathlib import Path

    t0 = time.perf_counter()
    tmpdir = Path(tmpdir)
    ok = True
    sizes = {}
    for scheme in ("pauli", "clifford"):
        st = random_mixed(3, 2, 61)
        blobs = []
        for rep in range(2):
            recs = qcqc.acquire(st, scheme, 200, np.random.default_rng(seed),
                                counter=qcqc.CopyCounter())
            path = tmpdir / f"{scheme}-{rep}.json"
            qcqc.write_records(path, recs, seed)
            blobs.append(path.read_bytes())
        back, meta = qcqc.read_records(tmpdir / f"{scheme}-0.json")
        ok &= blobs[0] == blobs[1] and back == recs and meta["copies_consumed"] == 200
        obs = [PauliString("XIZ")]
        ok &= np.array_equal(qcqc.estimate_variables(back, obs, seed=3),
                             qcqc.estimate_variables(recs, obs, seed=3))
        sizes[scheme] = len(blobs[0])
    return CheckResult("records_replay", bool(ok), sizes, time.perf_counter() - t0)


def run_suite(name: str, tmpdir=None) -> list[CheckResult]:
    """Run one named suite and return its check results."""
    if name == "channel":
        out = []
        for scheme in ("clifford", "pauli"):
            moments = {n: phase1_moments(channel_states(n), scheme, CHANNEL_SAMPLES, 0)
                       for n in (1, 2, 3)}
            out.append(check_channel(scheme, moments=moments))
            out.append(check_snapshot_mean(scheme, moments=moments))
        return out
    if name == "unbiased":
        return [check_unbiased(s) for s in ("clifford", "pauli")]
    if name == "variance":
        return [check_variance(s) for s in ("clifford", "pauli")]
    if name == "mom":
        return [check_mom()]
    if name == "records":
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            return [check_bridge("clifford"), check_bridge("pauli"),
                    check_records(tmpdir or tmp)]
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
