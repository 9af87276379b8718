"""Acceptance criteria, one test each.  Every test prints a single
``PASS``/``FAIL`` line with the measured numbers, so the log doubles as the
acceptance report.  Run stand-alone with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from qcshadow import bench, checks, qcqc
from qcshadow.experiment import ExperimentConfig, run_experiment
from qcshadow.qstate import random_mixed

CHANNEL_BUDGET_S = 120.0
UNBIASED_BUDGET_S = 300.0
PROBLEM_BUDGET_S = 600.0


def report(number: int, title: str, passed: bool, info: str):
    line = f"[criterion {number:>2}] {'PASS' if passed else 'FAIL'}  {title}: {info}"
    print(line, flush=True)
    return passed


# -- shared Monte Carlo runs ----------------------------------------------------


@lru_cache(maxsize=None)
def phase1_runs(scheme: str):
    t0 = time.perf_counter()
    moments = {n: checks.phase1_moments(checks.channel_states(n), scheme,
                                        checks.CHANNEL_SAMPLES, seed=0)
               for n in (1, 2, 3)}
    return moments, time.perf_counter() - t0


@lru_cache(maxsize=None)
def qcqc_runs(scheme: str):
    t0 = time.perf_counter()
    samples = checks.qcqc_samples(scheme, checks.UNBIASED_RECORDS, seed=0)
    return samples, time.perf_counter() - t0


# -- criteria ---------------------------------------------------------------------


def criterion_1() -> bool:
    parts, ok = [], True
    for scheme in ("clifford", "pauli"):
        moments, secs = phase1_runs(scheme)
        res = checks.check_channel(scheme, moments=moments)
        ok &= res.passed and secs <= CHANNEL_BUDGET_S
        parts.append(f"{scheme} max|dev|={res.detail['max_dev']:.4f} "
                     f"(tol {res.detail['tol']:.4f}), {secs:.0f}s (<= {CHANNEL_BUDGET_S:.0f}s)")
    return report(1, "channel identity, n=1..3, 3 states, 1e5 draws", ok, "; ".join(parts))


def criterion_2() -> bool:
    parts, ok = [], True
    for scheme in ("clifford", "pauli"):
        res = checks.check_snapshot_mean(scheme, moments=phase1_runs(scheme)[0])
        ok &= res.passed
        parts.append(f"{scheme} max z={res.detail['max_z']:.2f} (tol 5)")
    return report(2, "snapshot unbiasedness, 1e5 runs", ok, "; ".join(parts))


def criterion_3() -> bool:
    parts, ok = [], True
    for scheme in ("clifford", "pauli"):
        samples, secs = qcqc_runs(scheme)
        res = checks.check_unbiased(scheme, samples)
        ok &= res.passed and secs <= UNBIASED_BUDGET_S
        parts.append(f"{scheme} {res.detail['pairs']} pairs max z={res.detail['max_z']:.2f} "
                     f"(tol 4), {secs:.0f}s")
    return report(3, "QCQC unbiasedness, 1e4 records per pair", ok, "; ".join(parts))


def criterion_4() -> bool:
    parts, ok = [], True
    for scheme in ("clifford", "pauli"):
        res = checks.check_bridge(scheme)
        ok &= res.passed
        parts.append(f"{scheme} max z={res.detail['max_z']:.2f} (tol 4), "
                     f"exact gap={res.detail['exact_gap']:.1e}")
    return report(4, "per-record bridge, 100 records x 1e4 phase-2 runs", ok, "; ".join(parts))


def criterion_5() -> bool:
    parts, ok = [], True
    for scheme in ("clifford", "pauli"):
        res = checks.check_variance(scheme, qcqc_runs(scheme)[0])
        ok &= res.passed
        parts.append(f"{scheme} max Var/bound={res.detail['max_var_over_bound']:.3f} (tol 1.15)")
    return report(5, "variance bounds at default shot counts", ok, "; ".join(parts))


def criterion_6() -> bool:
    t0 = time.perf_counter()
    errs = np.array(bench.problem_trials(trials=200, seed=0, epsilon=0.25, delta=0.2))
    secs = time.perf_counter() - t0
    rate, raw_rate = float(np.mean(errs[:, 0] <= 0.25)), float(np.mean(errs[:, 1] <= 0.25))
    ok = rate >= 0.8 and secs <= PROBLEM_BUDGET_S
    return report(6, "end-to-end contract n=2 M=4 eps=0.25 delta=0.2", ok,
                  f"success rate {rate:.3f} (need >= 0.8; unclipped {raw_rate:.3f}), "
                  f"200 trials in {secs:.0f}s")


def criterion_7() -> bool:
    est = np.array(bench.fidelity_trials(trials=100, seed=0))
    inside = float(np.mean((est[:, 0] >= 0.8) & (est[:, 0] <= 1.0)))
    raw_inside = float(np.mean((est[:, 1] >= 0.8) & (est[:, 1] <= 1.0)))
    raw_close = float(np.mean(np.abs(est[:, 1] - 1.0) <= 0.2))
    return report(7, "Bell fidelity, plan(0.2, 0.1, 1, 4)", inside >= 0.9,
                  f"{inside:.2f} of 100 in [0.8, 1.0] (need >= 0.9); unclipped: "
                  f"{raw_inside:.2f} in [0.8, 1.0], {raw_close:.2f} within 0.2 of 1")


def criterion_8() -> bool:
    rows = bench.space_counts(range(2, 11))
    ns = np.array([r["n"] for r in rows], dtype=float)
    base_ok = all(r["baseline"] == 2 * 4 ** r["n"] for r in rows)
    q = np.array([r["qcqc"] for r in rows], dtype=float)
    coef2 = np.polyfit(ns, q, 2)
    resid = float(np.abs(np.polyval(coef2, ns) - q).max())
    cubic = float(abs(np.polyfit(ns, q, 3)[0]))
    size_slope = bench.loglog_slope(ns, [r["record_bytes"] for r in rows])
    ok = base_ok and resid < 1e-6 and cubic < 1e-6 and size_slope <= 2.0
    return report(8, "space contrast n=2..10", ok,
                  f"baseline == 2*4^n: {base_ok}; qcqc scalars = "
                  f"{coef2[0]:.2f}n^2 + {coef2[1]:.2f}n + {coef2[2]:.2f} (max resid {resid:.1e}, "
                  f"cubic term {cubic:.1e}); record bytes log-log slope {size_slope:.2f}")


def criterion_9() -> bool:
    table = bench.bench_compare(range(4, 11), records=9, seed=0)
    print(table.to_text(), end="")
    gap = table.slopes["baseline"] - table.slopes["qcqc"]
    return report(9, "time contrast n=4..10, projector observable", gap >= 0.7,
                  f"slope baseline={table.slopes['baseline']:.2f}, qcqc={table.slopes['qcqc']:.2f}, "
                  f"gap={gap:.2f} (need >= 0.7)")


def criterion_10() -> bool:
    res = checks.check_mom(trials=checks.MOM_TRIALS, seed=0)
    info = ", ".join(f"{k}={v:.3f}" for k, v in res.detail.items())
    return report(10, "MoM coverage, 500 trials", res.passed, info + " (need >= 1 - delta)")


def criterion_11() -> bool:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        data = dict(n=3, scheme="pauli", mode="qcqc", state={"family": "random_mixed", "n": 3,
                                                            "seed": 2, "rank": 2},
                    observables=[{"type": "pauli", "letters": "XIZ"},
                                 {"type": "pauli", "letters": "YYI", "coeff": 0.5}],
                    epsilon=0.3, delta=0.1, seed=11)
        hashes = [run_experiment(ExperimentConfig.from_dict(dict(data))).determinism_hash()
                  for _ in range(2)]
        clif = dict(data, scheme="clifford", observables=[{"type": "pauli", "letters": "ZZZ"}])
        hashes_c = [run_experiment(ExperimentConfig.from_dict(dict(clif))).determinism_hash()
                    for _ in range(2)]
        blobs = []
        for rep in range(2):
            recs = qcqc.acquire(random_mixed(3, 2, 2), "clifford", 500,
                                np.random.default_rng(11), qcqc.CopyCounter())
            qcqc.write_records(tmp / f"r{rep}.json", recs, 11)
            blobs.append((tmp / f"r{rep}.json").read_bytes())
        back, _ = qcqc.read_records(tmp / "r0.json")
        replay = back == recs
    ok = hashes[0] == hashes[1] and hashes_c[0] == hashes_c[1] and blobs[0] == blobs[1] and replay
    return report(11, "determinism", ok,
                  f"pauli hash {hashes[0][:12]} x2 equal={hashes[0] == hashes[1]}; clifford hash "
                  f"equal={hashes_c[0] == hashes_c[1]}; record files identical="
                  f"{blobs[0] == blobs[1]} ({len(blobs[0])} bytes); round trip={replay}")


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    with capsys.disabled():
        print()
        passed = CRITERIA[number]()
    assert passed


if __name__ == "__main__":
    results = {i: fn() for i, fn in CRITERIA.items()}
    sys.exit(0 if all(results.values()) else 2)
