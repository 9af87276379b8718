"""Median-of-means aggregation and sample-size planning."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import Observable

log = logging.getLogger(__name__)

VARIANCE_CONSTANT = 8.0
GROUP_CONSTANT = 2.0


@dataclass(frozen=True)
class MoMPlan:
    K: int
    N: int
    epsilon: float
    delta: float
    var_bound: float
    m: int | None = None

    def __post_init__(self):
        if self.K < 1 or self.N < self.K or self.N % self.K:
            raise ValueError(f"inconsistent plan K={self.K}, N={self.N}")

    @property
    def group_size(self) -> int:
        return self.N // self.K


@dataclass(frozen=True)
class MoMEstimate:
    estimate: float
    group_means: list[float] = field(repr=False)
    variance: float


def plan(
    epsilon: float,
    delta: float,
    M: int,
    var_bound: float,
    m: int | None = None,
    c_var: float = VARIANCE_CONSTANT,
    c_groups: float = GROUP_CONSTANT,
) -> MoMPlan:
    """Groups and records so that each of ``M`` estimates is ``epsilon``-close
    with joint probability at least ``1 - delta``.

    ``K = ceil(2 ln(M/delta))`` and ``N = ceil(8 ln(M/delta) var / eps^2)``,
    with ``N`` rounded up to a multiple of ``K``.  Logs are natural.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if M < 1:
        raise ValueError("M must be >= 1")
    if not var_bound > 0:
        raise ValueError("var_bound must be positive")
    log_term = math.log(M / delta)
    K = max(1, math.ceil(c_groups * log_term))
    N = max(K, math.ceil(c_var / epsilon**2 * log_term * var_bound))
    N = -(-N // K) * K
    return MoMPlan(K=K, N=N, epsilon=epsilon, delta=delta, var_bound=var_bound, m=m)


def median_of_means(values, K: int) -> MoMEstimate:
    """Median of ``K`` contiguous group means.

    Trailing values that do not fill a whole group are dropped.  For even
    ``K`` the lower median is returned, so the estimate is always one of the
    group means.
    """
    x = np.asarray(values, dtype=float).ravel()
    if K < 1 or K > x.size:
        raise ValueError(f"need 1 <= K <= {x.size}, got K = {K}")
    size = x.size // K
    if x.size % K:
        log.warning("discarding %d trailing values", x.size - size * K)
    means = x[: size * K].reshape(K, size).mean(axis=1)
    est = float(np.sort(means)[(K - 1) // 2])
    var = float(x[: size * K].var(ddof=1)) if size * K > 1 else 0.0
    return MoMEstimate(est, means.tolist(), var)


def shadow_norm_bound(obs: Observable, scheme: str) -> float:
    """Upper bound on the shadow norm: ``2^k ||O||`` (Pauli) or
    ``sqrt(3 tr O^2)`` (Clifford)."""
    if scheme == "pauli":
        return 2.0**obs.locality * obs.inf_norm
    if scheme == "clifford":
        return math.sqrt(3 * obs.trace_of_square)
    raise ValueError(f"unknown scheme {scheme!r}")


def variance_bound(obs: Observable, scheme: str) -> float:
    """Bound on ``Var[Y]`` at the default shot counts: ``4 tr O^2`` for
    Clifford records, ``2 4^k ||O||^2`` for Pauli records."""
    if scheme == "clifford":
        return 4 * obs.trace_of_square
    if scheme == "pauli":
        return 2 * 4.0**obs.locality * obs.inf_norm**2
    raise ValueError(f"unknown scheme {scheme!r}")


def corollary_budget(
    r: int, lam: float, M: int, epsilon: float, delta: float
) -> MoMPlan:
    """Plan for observables of rank at most ``r`` and spectral radius at most
    ``lam``, using ``tr O^2 <= r lam^2``."""
    if r < 1 or not lam > 0:
        raise ValueError("need r >= 1 and lambda > 0")
    return plan(epsilon, delta, M, 4 * r * lam**2)
