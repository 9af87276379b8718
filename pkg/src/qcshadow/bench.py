"""Baseline-vs-QCQC comparisons: space counts, per-record timing, and the
repeated-trial experiments behind the end-to-end guarantees."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from . import baseline, qcqc
from .estimator import plan
from .experiment import ExperimentConfig, run_experiment
from .qstate import Projector, bell_state, random_mixed, random_pure

BENCH_FIELDS = ("n", "d", "mode", "seconds_per_record", "stored_scalars", "record_bytes",
                "copies", "shots")


@dataclass
class BenchTable:
    rows: list[dict]
    slopes: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in BENCH_FIELDS})
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{'n':>3} {'mode':>9} {'s/record':>12} {'scalars':>10} {'bytes':>8} {'shots':>6}"]
        for r in self.rows:
            lines.append(
                f"{r['n']:>3} {r['mode']:>9} {r['seconds_per_record']:>12.3e} "
                f"{r['stored_scalars']:>10} {r['record_bytes']:>8} {r['shots']:>6}"
            )
        lines.append(
            "log-log slope of time vs d: "
            + "  ".join(f"{k}={v:.3f}" for k, v in sorted(self.slopes.items()))
        )
        return "\n".join(lines) + "\n"


def loglog_slope(ds, ys) -> float:
    return float(np.polyfit(np.log(ds), np.log(ys), 1)[0])


def _timed(fn, repeats: int) -> float:
    """Median wall time of ``fn`` over ``repeats`` calls after one warm-up."""
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench_compare(ns=range(4, 11), records: int = 9, seed: int = 0,
                  dense_cap: int = baseline.BASELINE_CAP) -> BenchTable:
    """Per-record, per-observable cost of the two Clifford pipelines against a
    projector observable.

    Baseline: expand the tableau, build the ``d x d`` snapshot, take the
    dense trace.  QCQC: synthesise ``U^dag |b>`` from the tableau and draw
    ``2(d+1)`` shots.  Both start from the same records, so copies agree.
    """
    rows = []
    for n in ns:
        if n > dense_cap:
            raise ValueError(f"n = {n} exceeds the dense cap {dense_cap}")
        d = 1 << n
        st = random_pure(n, [seed, n])
        obs = Projector(random_pure(n, [seed, n, 1]))
        obs_dense = obs.to_dense()
        counter = qcqc.CopyCounter()
        recs = qcqc.acquire(st, "clifford", records, np.random.default_rng([seed, n]), counter)
        rng = np.random.default_rng([seed, n, 2])

        def run_baseline(rec):
            snap = baseline.snapshot_clifford(rec.unitary.payload, rec.b)
            return baseline.estimate_trace_dense(snap, obs_dense)

        def run_qcqc(rec):
            return qcqc.phase2_clifford(rec, obs, rng=rng)

        t_base = float(np.median([_timed(lambda r=r: run_baseline(r), 3) for r in recs]))
        t_q = float(np.median([_timed(lambda r=r: run_qcqc(r), 3) for r in recs]))
        size = int(np.median([r.serialized_size() for r in recs]))
        rows.append(dict(n=n, d=d, mode="baseline", seconds_per_record=t_base,
                         stored_scalars=baseline.stored_scalars_dense(n),
                         record_bytes=size, copies=counter.value, shots=0))
        rows.append(dict(n=n, d=d, mode="qcqc", seconds_per_record=t_q,
                         stored_scalars=recs[0].stored_scalars, record_bytes=size,
                         copies=counter.value, shots=qcqc.default_shots("clifford", n)))
    slopes = {}
    for mode in ("baseline", "qcqc"):
        sel = [r for r in rows if r["mode"] == mode]
        slopes[mode] = loglog_slope([r["d"] for r in sel], [r["seconds_per_record"] for r in sel])
    return BenchTable(rows, slopes)


def space_counts(ns=range(2, 11), seed: int = 0) -> list[dict]:
    """Stored scalars per snapshot (measured on a built snapshot) and per
    record, plus serialized record size."""
    out = []
    for n in ns:
        rec = qcqc.acquire(random_pure(n, [seed, n]), "clifford", 1,
                           np.random.default_rng([seed, n]), qcqc.CopyCounter())[0]
        snap = baseline.snapshot_clifford(rec.unitary.payload, rec.b)
        out.append(dict(n=n, baseline=snap.stored_scalars, qcqc=rec.stored_scalars,
                        record_bytes=rec.serialized_size()))
    return out


def fidelity_trials(trials: int = 100, seed: int = 0, epsilon: float = 0.2,
                    delta: float = 0.1) -> list[tuple[float, float]]:
    """Bell-state fidelity by Clifford QCQC under ``plan(eps, delta, 1, 4)``.

    Returns ``(estimate, raw_estimate)`` per trial; the estimate is the
    median of means clipped to [0, 1]."""
    bell = bell_state()
    p = plan(epsilon, delta, 1, 4.0)
    obs = {"type": "projector", "amplitudes": [[float(a.real), float(a.imag)] for a in bell.vector]}
    out = []
    for t in range(trials):
        cfg = ExperimentConfig(n=2, scheme="clifford", mode="qcqc", state={"family": "bell"},
                               observables=[obs], epsilon=epsilon, delta=delta,
                               seed=seed * 100_000 + t, K=p.K, N=p.N)
        row = run_experiment(cfg).observables[0]
        out.append((row["estimate"], row["raw_estimate"]))
    return out


def problem_trials(trials: int = 200, seed: int = 0, epsilon: float = 0.25,
                   delta: float = 0.2) -> list[tuple[float, float]]:
    """Max error over four projector observables on a rank-2 mixed 2-qubit
    state, per seeded end-to-end run, as ``(clipped, raw)``."""
    state = random_mixed(2, 2, 71)
    amps = state.density.tolist()
    targets = [bell_state().vector, np.array([1, 0, 0, 0]),
               np.array([1, 0, 1, 0]) / np.sqrt(2), random_pure(2, 73).vector]
    observables = [
        {"type": "projector", "amplitudes": [[float(a.real), float(a.imag)] for a in v]}
        for v in targets
    ]
    state_spec = {"density": [[[float(z.real), float(z.imag)] for z in row] for row in amps]}
    out = []
    for t in range(trials):
        cfg = ExperimentConfig(n=2, scheme="clifford", mode="qcqc", state=state_spec,
                               observables=observables, epsilon=epsilon, delta=delta,
                               seed=seed * 100_000 + t)
        rep = run_experiment(cfg)
        out.append((
            max(row["abs_error"] for row in rep.observables),
            max(abs(row["raw_estimate"] - row["exact"]) for row in rep.observables),
        ))
    return out
