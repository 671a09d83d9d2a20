"""Exact EMD solver: hand examples, brute-force agreement, metric axioms,
duality certificates, serialization."""

from fractions import Fraction

import numpy as np
import pytest

from subsens import (OutputDistribution, emd,
                     inclusion_probability_lower_bound, mask_of,
                     sym_diff_cost, tv_distance)
from subsens.transport import (InfeasibleMarginalsError,
                               SupportCapExceededError)

from _oracles import bruteforce_emd


def dist(n, k, mapping, **kw):
    return OutputDistribution(n, k, dict(mapping), **kw)


# --- symmetric difference cost ----------------------------------------------


def test_sym_diff_identical():
    assert sym_diff_cost(0b1011, 0b1011) == 0


def test_sym_diff_hand_count():
    s = mask_of([0, 1, 2])
    t = mask_of([0, 3])
    assert sym_diff_cost(s, t) == 3


def test_sym_diff_disjoint_k_sets():
    assert sym_diff_cost(0b000111, 0b111000) == 6


# --- EMD hand examples ------------------------------------------------------


def test_emd_identity_is_zero():
    d = dist(4, 2, {0b0011: 0.25, 0b0110: 0.75})
    value, plan = emd(d, d)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_emd_point_masses():
    d1 = dist(5, 2, {0b00011: 1.0})
    d2 = dist(5, 2, {0b11000: 1.0})
    value, _ = emd(d1, d2)
    assert value == pytest.approx(4.0)


def test_emd_two_point_example():
    d1 = dist(4, 1, {0b0001: 0.5, 0b0010: 0.5})
    d2 = dist(4, 1, {0b0001: 1.0})
    value, plan = emd(d1, d2)
    assert value == pytest.approx(1.0, abs=1e-12)
    assert tv_distance(d1, d2) == pytest.approx(0.5)


def test_emd_mass_mismatch_rejected():
    d1 = dist(3, 1, {0b001: 0.6, 0b010: 0.6})
    d2 = dist(3, 1, {0b001: 1.0})
    with pytest.raises(InfeasibleMarginalsError):
        emd(d1, d2)


def test_support_cap():
    d1 = dist(6, 2, {mask_of([0, e]): 1 / 5 for e in range(1, 6)})
    with pytest.raises(SupportCapExceededError):
        emd(d1, d1, support_cap=5)


def test_ground_set_mismatch():
    d1 = dist(4, 1, {0b1: 1.0})
    d2 = dist(5, 1, {0b1: 1.0})
    with pytest.raises(ValueError):
        emd(d1, d2)


# --- solver correctness -----------------------------------------------------


def _random_dist(rng, n, k, support):
    masks = set()
    while len(masks) < support:
        ids = rng.choice(n, size=k, replace=False)
        masks.add(int(sum(1 << int(e) for e in ids)))
    p = rng.random(len(masks))
    p /= p.sum()
    return dist(n, k, dict(zip(sorted(masks), p)))


def test_emd_matches_vertex_enumeration():
    rng = np.random.default_rng(42)
    for _ in range(100):
        d1 = _random_dist(rng, 6, 3, int(rng.integers(1, 5)))
        d2 = _random_dist(rng, 6, 3, int(rng.integers(1, 5)))
        value, _ = emd(d1, d2)
        ref = bruteforce_emd(
            [d1.probs[m] for m in d1.support()],
            [d2.probs[m] for m in d2.support()],
            [[sym_diff_cost(s, t) for t in d2.support()] for s in d1.support()])
        assert value == pytest.approx(ref, abs=1e-9)


def test_emd_metric_axioms():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d1, d2, d3 = (_random_dist(rng, 6, 3, int(rng.integers(1, 6)))
                      for _ in range(3))
        e12 = emd(d1, d2)[0]
        e21 = emd(d2, d1)[0]
        e13 = emd(d1, d3)[0]
        e23 = emd(d2, d3)[0]
        assert emd(d1, d1)[0] <= 1e-12
        assert e12 == pytest.approx(e21, abs=1e-9)
        assert e13 <= e12 + e23 + 1e-9


def test_inclusion_bound_below_emd():
    rng = np.random.default_rng(13)
    for _ in range(100):
        d1 = _random_dist(rng, 6, 3, int(rng.integers(1, 6)))
        d2 = _random_dist(rng, 6, 3, int(rng.integers(1, 6)))
        value, _ = emd(d1, d2)
        assert inclusion_probability_lower_bound(d1, d2) <= value + 1e-9


def test_inclusion_bound_tight_on_disjoint_point_masses():
    d1 = dist(8, 3, {0b00000111: 1.0})
    d2 = dist(8, 3, {0b01110000: 1.0})
    lb = inclusion_probability_lower_bound(d1, d2)
    value, _ = emd(d1, d2)
    assert lb == pytest.approx(6.0)
    assert value == pytest.approx(6.0)


def test_inclusion_bound_zero_on_identical():
    d = dist(5, 2, {0b00011: 0.5, 0b00110: 0.5})
    assert inclusion_probability_lower_bound(d, d) == pytest.approx(0.0)


def test_emd_bounded_by_2k():
    rng = np.random.default_rng(3)
    for _ in range(40):
        k = int(rng.integers(1, 4))
        d1 = _random_dist(rng, 8, k, int(rng.integers(1, 5)))
        d2 = _random_dist(rng, 8, k, int(rng.integers(1, 5)))
        value, _ = emd(d1, d2)
        assert value <= 2 * k + 1e-9


# --- plan and certificate ---------------------------------------------------


def test_plan_marginals_and_certificate():
    rng = np.random.default_rng(21)
    for _ in range(25):
        d1 = _random_dist(rng, 7, 3, int(rng.integers(2, 6)))
        d2 = _random_dist(rng, 7, 3, int(rng.integers(2, 6)))
        value, plan = emd(d1, d2)
        assert plan.certificate_ok()
        assert plan.max_marginal_residual <= 1e-9
        # row/column sums reproduce the inputs
        row = {}
        col = {}
        for s, t, m in plan.entries:
            row[s] = row.get(s, 0.0) + m
            col[t] = col.get(t, 0.0) + m
        for s, p in d1.probs.items():
            assert row.get(s, 0.0) == pytest.approx(p, abs=1e-9)
        for t, p in d2.probs.items():
            assert col.get(t, 0.0) == pytest.approx(p, abs=1e-9)
        # duality: dual objective equals the primal optimum
        dual = (sum(plan.potentials_source[i] * d1.probs[s]
                    for i, s in enumerate(plan.sources))
                + sum(plan.potentials_target[j] * d2.probs[t]
                      for j, t in enumerate(plan.targets)))
        assert dual == pytest.approx(value, abs=1e-7)


def test_rational_cost_for_matched_empirical_pairs():
    d1 = dist(4, 1, {0b0001: 0.5, 0b0010: 0.5}, mode="empirical", trials=8)
    d2 = dist(4, 1, {0b0001: 0.75, 0b0100: 0.25}, mode="empirical", trials=8)
    value, plan = emd(d1, d2)
    assert plan.cost_rational is not None
    assert plan.cost_rational == Fraction(value).limit_denominator(1000)
    # exact vs exact gets no rational
    e1 = dist(4, 1, {0b0001: 0.5, 0b0010: 0.5})
    assert emd(e1, e1)[1].cost_rational is None


def test_plan_csv_round_trip_values():
    d1 = dist(4, 1, {0b0001: 0.5, 0b0010: 0.5})
    d2 = dist(4, 1, {0b0001: 1.0})
    _, plan = emd(d1, d2)
    lines = plan.to_csv().strip().splitlines()
    assert lines[0] == "source_hex,target_hex,mass,cost_contrib"
    total = 0.0
    for ln in lines[1:]:
        s, t, m, cc = ln.split(",")
        assert float(cc) == pytest.approx(float(m) * sym_diff_cost(int(s, 16), int(t, 16)))
        total += float(cc)
    assert total == pytest.approx(plan.cost)


def test_tv_distance_disjoint_supports():
    d1 = dist(4, 1, {0b0001: 1.0})
    d2 = dist(4, 1, {0b0010: 1.0})
    assert tv_distance(d1, d2) == pytest.approx(1.0)


def test_degenerate_mass_patterns_agree_with_bruteforce():
    # near-zero masses break exact supply/demand balance in float; the
    # initial-basis construction must stay a spanning tree regardless
    rng = np.random.default_rng(99)
    for _ in range(150):
        r = int(rng.integers(1, 5))
        c = int(rng.integers(1, 5))
        a = rng.random(r)
        a[rng.random(r) < 0.4] = 1e-12
        a /= a.sum()
        b = rng.random(c)
        b[rng.random(c) < 0.4] = 1e-12
        b /= b.sum()
        d1 = dist(6, 2, dict(zip([0b11 << i for i in range(r)], a)))
        d2 = dist(6, 2, dict(zip([0b11 << i for i in range(c)], b)))
        value, plan = emd(d1, d2)
        ref = bruteforce_emd(list(a), list(b),
                             [[sym_diff_cost(s, t) for t in d2.support()]
                              for s in d1.support()])
        assert value == pytest.approx(ref, abs=1e-9)
        assert plan.certificate_ok()


def test_extreme_mass_ratio_cascade_shape():
    # regression: pruned cascade distributions mix ~1e-22 and ~0.999 masses
    from subsens import (FunctionSpec, build_function, exact_output_distribution,
                         proportional_greedy_rule, restrict)
    f = build_function(FunctionSpec("prop_lb", n=12))
    rule = proportional_greedy_rule()
    d1 = exact_output_distribution(rule, f, 5, p_min=1e-13)
    red = restrict(f, 1)
    d2 = exact_output_distribution(rule, red, 5, p_min=1e-13).remapped(red.index_map, 12)
    value, plan = emd(d1, d2)
    assert plan.certificate_ok()
    assert 0.0 <= value <= 10.0
