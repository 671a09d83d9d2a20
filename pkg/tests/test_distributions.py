"""Exact enumeration, sampling, and selection profiles."""

import math

import numpy as np
import pytest

from subsens import (FunctionSpec, OrdinalSchedule, build_function,
                     exact_output_distribution, greedy_rule,
                     proportional_greedy_rule, randomized_greedy_rule,
                     sampled_output_distribution, selection_profile,
                     deterministic_greedy, tv_distance)
from subsens.distributions import NodeBudgetExceededError, OutputDistribution


def modular(*weights):
    return build_function(FunctionSpec("modular", n=len(weights),
                                       weights=tuple(float(w) for w in weights)))


# --- exact enumeration ------------------------------------------------------


def test_deterministic_greedy_is_point_mass():
    f = build_function(FunctionSpec("curvature_det_lb", n=9, k=4, c=0.5))
    d = exact_output_distribution(greedy_rule(), f, 4)
    direct, _ = deterministic_greedy(f, 4)
    assert d.probs == {direct: 1.0}


def test_randgreedy_forced_exhaustion():
    f = modular(4, 3, 2)
    d = exact_output_distribution(randomized_greedy_rule(), f, 3)
    assert d.probs == pytest.approx({0b111: 1.0})


def test_randgreedy_tail_count_distribution_referees_closed_form():
    """Enumerated tail-count mass vs the claimed p_{k-i-1}/k closed form.

    The claimed form is exact for every positive tail count; at zero it
    misses the extra ((k-1)/k)^k mass from runs that never pick the heavy
    element.  The enumeration is the referee: we assert the true values.
    """
    for k, n in ((2, 10), (3, 16), (4, 20)):
        f = build_function(FunctionSpec("randgreedy_lb", n=n, k=k))
        d = exact_output_distribution(randomized_greedy_rule(), f, k)
        tail_mask = f.meta["tail"]
        by_count = {}
        for mask, p in d.probs.items():
            i = (mask & tail_mask).bit_count()
            by_count[i] = by_count.get(i, 0.0) + p
        p_ratio = (k - 1) / k
        for i in range(1, k):
            claimed = p_ratio ** (k - i - 1) / k
            assert by_count.get(i, 0.0) == pytest.approx(claimed, abs=1e-12), (k, i)
        zero_true = p_ratio ** (k - 1) / k + p_ratio ** k
        assert by_count.get(0, 0.0) == pytest.approx(zero_true, abs=1e-12)
        # the claimed i = 0 value is the same expression without the extra term
        assert by_count.get(0, 0.0) > p_ratio ** (k - 1) / k


def test_node_budget_exceeded():
    f = build_function(FunctionSpec("appendixD_lb", n=14, c=0.75))
    with pytest.raises(NodeBudgetExceededError):
        exact_output_distribution(proportional_greedy_rule(), f, 4, node_budget=50)


def test_exact_distribution_validates():
    f = modular(3, 2, 1, 1)
    d = exact_output_distribution(randomized_greedy_rule(), f, 2)
    assert sum(d.probs.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(m.bit_count() == 2 for m in d.probs)


def test_branch_order_canonicalization():
    f = build_function(FunctionSpec("randgreedy_lb", n=12, k=3))
    d1 = exact_output_distribution(randomized_greedy_rule(), f, 3, branch_order="asc")
    d2 = exact_output_distribution(randomized_greedy_rule(), f, 3, branch_order="desc")
    assert set(d1.probs) == set(d2.probs)
    for m in d1.probs:
        assert d1.probs[m] == pytest.approx(d2.probs[m], abs=1e-12)


def test_start_mask_conditions_the_run():
    f = build_function(FunctionSpec("appendixD_lb", n=9, c=0.75))
    d = exact_output_distribution(proportional_greedy_rule(), f, 2, start_mask=1)
    assert all(m & 1 for m in d.probs)
    assert all(m.bit_count() == 3 for m in d.probs)


def test_pruning_reports_lost_mass():
    f = build_function(FunctionSpec("prop_lb", n=8))
    d = exact_output_distribution(proportional_greedy_rule(), f, 4, p_min=1e-6)
    assert 0 < d.lost_mass < 1e-2
    assert sum(d.probs.values()) == pytest.approx(1.0 - d.lost_mass, abs=1e-9)


# --- sampling ---------------------------------------------------------------


def test_sampled_deterministic_point_mass():
    f = modular(5, 4, 3, 2)
    d = sampled_output_distribution(greedy_rule(), f, 2, trials=50, seed=1)
    assert d.probs == {0b11: 1.0}
    assert d.trials == 50


def test_sampled_close_to_exact():
    f = modular(*range(10, 0, -1))
    rule = randomized_greedy_rule()
    exact = exact_output_distribution(rule, f, 3)
    emp = sampled_output_distribution(rule, f, 3, trials=100_000, seed=3)
    assert tv_distance(exact, emp) < 0.02


def test_sampled_seed_determinism():
    f = build_function(FunctionSpec("randgreedy_lb", n=10, k=2))
    d1 = sampled_output_distribution(randomized_greedy_rule(), f, 2, trials=400, seed=11)
    d2 = sampled_output_distribution(randomized_greedy_rule(), f, 2, trials=400, seed=11)
    assert d1.probs == d2.probs


def test_sampled_needs_positive_trials():
    f = modular(1, 2)
    with pytest.raises(ValueError):
        sampled_output_distribution(greedy_rule(), f, 1, trials=0, seed=0)


# --- selection profile ------------------------------------------------------


def test_profile_first_step_uniform_top_k():
    f = modular(*range(12, 0, -1))
    prof = selection_profile(randomized_greedy_rule(), f, 4)
    assert prof.p[0, 0] == pytest.approx(0.25)
    assert prof.p[0, 4:].sum() == 0.0


def test_profile_deterministic_is_indicator():
    f = build_function(FunctionSpec("curvature_det_lb", n=9, k=4, c=0.5))
    prof = selection_profile(greedy_rule(), f, 4)
    assert set(np.unique(np.round(prof.P, 12))) <= {0.0, 1.0}


def test_profile_large_element_coverage_condition():
    # by the step floor((1 - alpha/2) k), the first k elements carry at least
    # alpha k / 2 cumulative selection mass, alpha = 1 - 1/e
    alpha = 1 - 1 / math.e
    for k, n in ((3, 9), (4, 12)):
        f = build_function(FunctionSpec("large_element", n=n, k=k))
        prof = selection_profile(OrdinalSchedule.randomized_greedy(k), f, k)
        t = math.ceil((1 - alpha / 2) * k)
        total = sum(prof.P[t - 1, e] for e in range(k))
        assert total >= alpha * k / 2


def test_profile_consistent_with_distribution():
    f = build_function(FunctionSpec("randgreedy_lb", n=12, k=3))
    rule = randomized_greedy_rule()
    d = exact_output_distribution(rule, f, 3)
    prof = selection_profile(rule, f, 3)
    incl = d.inclusion_probabilities()
    assert np.allclose(incl, prof.P[-1], atol=1e-9)


def test_profile_rows_sum_to_one_and_P_monotone():
    f = build_function(FunctionSpec("greedi_lb", n=10, c=0.5))
    prof = selection_profile(proportional_greedy_rule(), f, 4)
    assert np.allclose(prof.p.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(np.diff(prof.P, axis=0) >= -1e-12)


# --- serialization ----------------------------------------------------------


def test_distribution_csv_round_trip():
    f = build_function(FunctionSpec("randgreedy_lb", n=10, k=2))
    d = exact_output_distribution(randomized_greedy_rule(), f, 2)
    again = OutputDistribution.from_csv(d.to_csv(), n=10)
    assert again.probs == d.probs


def test_profile_csv_shape():
    f = modular(3, 2, 1)
    prof = selection_profile(randomized_greedy_rule(), f, 2)
    lines = prof.to_csv().strip().splitlines()
    assert lines[0] == "step,element,p,P"
    assert len(lines) == 1 + 2 * 3
