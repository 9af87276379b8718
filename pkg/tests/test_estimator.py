import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcshadow.estimator import (
    MoMPlan,
    corollary_budget,
    median_of_means,
    plan,
    shadow_norm_bound,
    variance_bound,
)
from qcshadow.qstate import DenseHermitian, PauliString, Projector, bell_state


def test_plan_simplest_case():
    p = plan(1.0, 1 / math.e, 1, 1.0)
    assert (p.K, p.N) == (2, 8)


def test_plan_uses_natural_log_and_rounds_to_groups():
    p = plan(0.2, 0.1, 1, 4.0)
    assert p.K == math.ceil(2 * math.log(10))
    raw = math.ceil(8 * math.log(10) * 4 / 0.04)
    assert p.N == -(-raw // p.K) * p.K and p.N % p.K == 0
    assert plan(0.25, 0.2, 4, 4.0).K == 6 and plan(0.25, 0.2, 4, 4.0).N == 1536


@pytest.mark.parametrize("args", [(0, 0.1, 1, 1), (0.1, 0, 1, 1), (0.1, 1, 1, 1),
                                  (0.1, 0.1, 0, 1), (0.1, 0.1, 1, 0)])
def test_plan_rejects_bad_input(args):
    with pytest.raises(ValueError):
        plan(*args)


def test_plan_invariants():
    with pytest.raises(ValueError):
        MoMPlan(K=3, N=10, epsilon=0.1, delta=0.1, var_bound=1)
    assert MoMPlan(K=2, N=10, epsilon=0.1, delta=0.1, var_bound=1).group_size == 5


def test_median_of_means_examples(caplog):
    assert median_of_means([1, 2, 100], 3).estimate == 2
    assert median_of_means([5.0] * 12, 4).estimate == 5.0
    assert median_of_means([0, 2, 4, 6], 2).estimate == 1
    with caplog.at_level(logging.WARNING):
        est = median_of_means([1, 2, 3, 4, 5], 2)
    assert est.group_means == [1.5, 3.5] and "discarding 1" in caplog.text
    with pytest.raises(ValueError):
        median_of_means([1, 2], 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=60),
       st.integers(1, 6), st.floats(-1e3, 1e3), st.randoms())
def test_median_of_means_invariances(values, K, shift, rnd):
    base = median_of_means(values, K).estimate
    shifted = median_of_means([v + shift for v in values], K).estimate
    assert shifted == pytest.approx(base + shift, abs=1e-9)
    size = len(values) // K
    permuted = list(values)
    for g in range(K):
        block = permuted[g * size:(g + 1) * size]
        rnd.shuffle(block)
        permuted[g * size:(g + 1) * size] = block
    assert median_of_means(permuted, K).estimate == pytest.approx(base, abs=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
def test_single_group_is_the_mean(values):
    assert median_of_means(values, 1).estimate == pytest.approx(np.mean(values), abs=1e-9)


def test_shadow_norm_bounds():
    assert shadow_norm_bound(PauliString("Z"), "pauli") == 2
    assert shadow_norm_bound(Projector(bell_state()), "clifford") == pytest.approx(math.sqrt(3))
    assert shadow_norm_bound(PauliString("XIZ", 0.5), "pauli") == 2
    with pytest.raises(ValueError):
        shadow_norm_bound(PauliString("Z"), "other")


def test_variance_bounds():
    assert variance_bound(Projector(bell_state()), "clifford") == 4
    assert variance_bound(PauliString("XY"), "pauli") == 2 * 16
    m = DenseHermitian(np.diag([1.0, -2.0]), (0,), 2)
    assert variance_bound(m, "clifford") == pytest.approx(4 * 10)
    assert variance_bound(m, "pauli") == pytest.approx(2 * 4 * 4)


def test_corollary_budget():
    assert corollary_budget(1, 1.0, 1, 0.1, 0.1).var_bound == 4
    assert corollary_budget(2, 0.5, 1, 0.1, 0.1).var_bound == 2
    rs, lams = (1, 2, 4), (0.5, 1.0, 2.0)
    grid = np.array([[corollary_budget(r, lam, 3, 0.1, 0.1).N for lam in lams] for r in rs])
    assert np.all(np.diff(grid, axis=0) >= 0) and np.all(np.diff(grid, axis=1) >= 0)
    with pytest.raises(ValueError):
        corollary_budget(0, 1.0, 1, 0.1, 0.1)
