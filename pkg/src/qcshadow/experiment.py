"""End-to-end experiment runs: plan, acquire, estimate, aggregate, report."""

from __future__ import annotations

import hashlib
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, baseline, qcqc
from .estimator import median_of_means, plan, variance_bound
from .qstate import (
    Observable,
    PauliString,
    QuantumState,
    exact_expectation,
    observable_from_json,
    state_from_json,
)

SCHEMA_VERSION = 1
DEFAULT_K_MAX = 4


class ConfigError(ValueError):
    """Invalid or out-of-range experiment configuration."""


@dataclass
class ExperimentConfig:
    n: int
    scheme: str
    mode: str
    state: dict
    observables: list[dict]
    epsilon: float = 0.1
    delta: float = 0.1
    seed: int | None = None
    m: int | None = None
    K: int | None = None
    N: int | None = None
    k_max: int = DEFAULT_K_MAX
    dense_cap: int = baseline.BASELINE_CAP
    threads: int = 1
    clip: bool = True
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"n", "scheme", "mode", "state", "observables"} - set(data)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def validate(self):
        if self.scheme not in ("pauli", "clifford"):
            raise ConfigError(f"scheme must be pauli or clifford, got {self.scheme!r}")
        if self.mode not in ("baseline", "qcqc"):
            raise ConfigError(f"mode must be baseline or qcqc, got {self.mode!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n must be a positive integer")
        if not self.observables:
            raise ConfigError("at least one observable is required")
        if not self.epsilon > 0 or not 0 < self.delta < 1:
            raise ConfigError("need epsilon > 0 and 0 < delta < 1")
        for key in ("m", "K", "N"):
            v = getattr(self, key)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"{key} must be a positive integer")
        if self.mode == "baseline" and self.n > self.dense_cap:
            raise ConfigError(
                f"baseline mode materialises 2^n x 2^n snapshots; n = {self.n} "
                f"exceeds the dense cap {self.dense_cap}"
            )
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def build(self) -> tuple[QuantumState, list[Observable]]:
        try:
            state = state_from_json(dict(self.state, n=self.state.get("n", self.n)))
            obs = [observable_from_json(o, self.n) for o in self.observables]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad state/observable spec: {exc}") from exc
        if state.n != self.n:
            raise ConfigError(f"state has {state.n} qubits, config says {self.n}")
        if self.scheme == "pauli":
            for o in obs:
                if o.locality > self.k_max:
                    raise ConfigError(
                        f"observable locality {o.locality} exceeds k_max = {self.k_max}"
                    )
        return state, obs


@dataclass
class RunReport:
    schema: int
    config: dict
    plan: dict
    observables: list[dict]
    totals: dict
    space: dict
    versions: dict
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def determinism_hash(self) -> str:
        """SHA-256 of the report with wall-clock fields left out."""
        data = self.to_dict()
        data.pop("timing")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> str:
        data = self.to_dict()
        data["determinism_hash"] = self.determinism_hash()
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        head = f"{'j':>3}  {'estimate':>12}  {'exact':>12}  {'|error|':>10}  observable"
        lines = [head, "-" * len(head)]
        for row in self.observables:
            exact = row.get("exact")
            err = row.get("abs_error")
            lines.append(
                f"{row['index']:>3}  {row['estimate']:>12.6f}  "
                f"{'' if exact is None else f'{exact:.6f}':>12}  "
                f"{'' if err is None else f'{err:.2e}':>10}  {row['label']}"
            )
        t = self.totals
        lines.append("")
        lines.append(
            f"copies={t['copies']}  records={t['records']}  K={self.plan['K']}  "
            f"m={t['shots_per_record']}  phase2_shots={t['phase2_shots']}"
        )
        lines.append(
            f"stored scalars per snapshot={self.space['stored_scalars_per_snapshot']}  "
            f"peak stored={self.space['peak_stored_scalars']}"
        )
        if self.timing:
            lines.append(
                "wall time [s]: "
                + "  ".join(f"{k}={v:.3f}" for k, v in sorted(self.timing.items()))
            )
        return "\n".join(lines) + "\n"


def _label(obs: Observable) -> str:
    if isinstance(obs, PauliString):
        return f"{obs.coeff:g}*{obs.letters}"
    return repr(obs)


def _phase2_parallel(records, observables, m, seed, threads) -> np.ndarray:
    if threads <= 1 or len(records) < 2 * threads:
        return qcqc.estimate_variables(records, observables, m, seed)
    bounds = np.linspace(0, len(records), threads + 1).astype(int)
    with ThreadPoolExecutor(threads) as pool:
        parts = pool.map(
            lambda ab: qcqc.estimate_variables(
                records[ab[0] : ab[1]], observables, m, seed, offset=int(ab[0])
            ),
            zip(bounds[:-1], bounds[1:]),
        )
        return np.vstack(list(parts))


def _baseline_values(records, observables) -> np.ndarray:
    out = np.empty((len(records), len(observables)))
    dense_obs = [None if isinstance(o, PauliString) else o.to_dense() for o in observables]
    for i, rec in enumerate(records):
        if rec.scheme == "clifford":
            snap = baseline.snapshot_clifford(rec.unitary.payload, rec.b)
        else:
            snap = baseline.snapshot_pauli(rec.unitary.payload, rec.b)
            snap.matrix  # the reference pipeline holds the full matrix
        for j, obs in enumerate(observables):
            if dense_obs[j] is None:
                out[i, j] = baseline.estimate_trace(snap, obs)
            else:
                out[i, j] = baseline.estimate_trace_dense(snap, dense_obs[j])
    return out


def run_experiment(cfg: ExperimentConfig, records: list | None = None) -> RunReport:
    """Plan, acquire (unless ``records`` are given), estimate and aggregate."""
    if cfg.seed is None:
        raise ConfigError("a seed is required")
    cfg.validate()
    state, observables = cfg.build()
    timing = {}

    var_bound = max(variance_bound(o, cfg.scheme) for o in observables)
    p = plan(cfg.epsilon, cfg.delta, len(observables), var_bound)
    K = cfg.K or p.K
    N = cfg.N or p.N
    if N < K:
        raise ConfigError("N must be at least K")
    N -= N % K

    counter = qcqc.CopyCounter()
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    if records is None:
        records = qcqc.acquire(state, cfg.scheme, N, rng, counter=counter)
    else:
        if len(records) < N:
            raise ConfigError(f"need {N} records, got {len(records)}")
        records = records[:N]
        counter.add(N)
    timing["acquire"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if cfg.mode == "baseline":
        values = _baseline_values(records, observables)
        shots = [0] * len(observables)
        per_snapshot = baseline.stored_scalars_dense(cfg.n)
    else:
        values = _phase2_parallel(records, observables, cfg.m, cfg.seed, cfg.threads)
        shots = [
            cfg.m or qcqc.default_shots(cfg.scheme, cfg.n, o.locality) for o in observables
        ]
        per_snapshot = records[0].stored_scalars
    timing["estimate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rows = []
    for j, obs in enumerate(observables):
        est = median_of_means(values[:, j], K)
        value = est.estimate
        if cfg.clip:
            # the true expectation lies in the spectral range, so projecting
            # onto it never increases the error
            value = float(np.clip(value, *obs.value_range))
        exact = exact_expectation(state, obs)
        rows.append(
            {
                "index": j,
                "label": _label(obs),
                "estimate": value,
                "raw_estimate": est.estimate,
                "exact": exact,
                "abs_error": abs(value - exact),
                "group_means": est.group_means,
                "empirical_variance": est.variance,
            }
        )
    timing["aggregate"] = time.perf_counter() - t0

    return RunReport(
        schema=SCHEMA_VERSION,
        config={k: v for k, v in asdict(cfg).items() if k not in ("out", "threads")},
        plan={
            "K": K,
            "N": N,
            "epsilon": cfg.epsilon,
            "delta": cfg.delta,
            "var_bound": var_bound,
        },
        observables=rows,
        totals={
            "copies": counter.value,
            "records": N,
            "shots_per_record": shots,
            "phase2_shots": int(sum(shots) * N),
        },
        space={
            "stored_scalars_per_snapshot": per_snapshot,
            # every snapshot/record kept, plus K group means per observable
            "peak_stored_scalars": per_snapshot * N + K * len(observables),
        },
        versions={
            "qcshadow": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "seed": cfg.seed,
        },
        timing=timing,
    )
