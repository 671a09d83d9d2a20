"""In-process simulation of distributed executions: two-phase distributed
greedy over a random partition, and the multi-round pool-growing framework
that lifts a centralized algorithm onto groups of machines.

Machines are simulated by masking element visibility: every run sees only
its shard (plus the shared pool), while the oracle object itself is shared
read-only.  Sub-seeds derive from (seed, round, group, machine).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .algorithms import (DecisionRule, OrdinalSchedule, KOutOfRangeError,
                         deterministic_greedy, derive_rng,
                         independent_sequential, run_sequential)
from .oracle import ValueOracle


class PoolOverflowError(RuntimeError):
    """Strict-MPC capacity exceeded by the element pool."""


BaseAlgorithm = Union[None, DecisionRule, OrdinalSchedule]  # None = deterministic greedy


@dataclass(frozen=True)
class MpcConfig:
    """Machine/group/round layout for the framework simulation.

    Defaults follow rounds = ceil(1/eps) and groups = ceil(1/(alpha eps));
    ``strict`` additionally enforces machines and capacity below n^0.9 and
    makes pool overflow an error.
    """

    machines: int
    groups: int = 1
    rounds: int = 1
    capacity: Optional[int] = None
    eps: float = 0.2
    alpha: float = 1.0 - 1.0 / math.e
    strict: bool = False

    def __post_init__(self):
        if self.machines < 1 or self.groups < 1 or self.rounds < 1:
            raise ValueError("machines, groups and rounds must all be >= 1")
        if not 0 < self.eps <= 1 or not 0 < self.alpha <= 1:
            raise ValueError("eps and alpha must lie in (0, 1]")

    @classmethod
    def from_accuracy(cls, machines: int, alpha: float, eps: float,
                      capacity: Optional[int] = None, strict: bool = False) -> "MpcConfig":
        rounds = math.ceil(1.0 / eps)
        groups = math.ceil(1.0 / (alpha * eps))
        return cls(machines=machines, groups=groups, rounds=rounds,
                   capacity=capacity, eps=eps, alpha=alpha, strict=strict)

    def check_strict(self, n: int):
        if not self.strict:
            return
        limit = n ** 0.9
        if self.machines >= limit:
            raise ValueError(f"strict MPC needs machines < n^0.9 = {limit:.1f}")
        if self.capacity is not None and self.capacity >= limit:
            raise ValueError(f"strict MPC needs capacity < n^0.9 = {limit:.1f}")


@dataclass(frozen=True)
class DistTraceRow:
    round: int
    group: int
    machine: int          # 0 is the merge step
    shard_size: int
    solution: int
    value: float
    shard: int = 0        # full shard mask (export lines keep the size only)


@dataclass
class DistTrace:
    rows: list[DistTraceRow] = field(default_factory=list)
    round_best: list[float] = field(default_factory=list)
    pool_sizes: list[int] = field(default_factory=list)
    pools: list[int] = field(default_factory=list)
    tie_occurred: bool = False

    def export_lines(self) -> list[str]:
        header = ["round,group,machine,shard_size,solution,value"]
        return header + [
            f"{r.round},{r.group},{r.machine},{r.shard_size},{r.solution:#x},{r.value!r}"
            for r in self.rows]


def _partition(n: int, machines: int, rng: np.random.Generator) -> list[int]:
    """iid-uniform machine assignment; returns one shard mask per machine."""
    assignment = rng.integers(0, machines, size=n)
    shards = [0] * machines
    for e in range(n):
        shards[int(assignment[e])] |= 1 << e
    return shards


def _run_base(base: BaseAlgorithm, oracle: ValueOracle, k: int, allowed: int,
              seed_key: tuple) -> int:
    budget = min(k, allowed.bit_count())
    if budget == 0:
        return 0
    if base is None:
        mask, _ = deterministic_greedy(oracle, budget, allowed=allowed)
    elif isinstance(base, OrdinalSchedule):
        mask, _ = independent_sequential(oracle, budget, base, 0,
                                         allowed=allowed, seed_key=seed_key)
    else:
        mask, _ = run_sequential(oracle, budget, base, 0,
                                 allowed=allowed, seed_key=seed_key)
    return mask


def greedi(oracle: ValueOracle, k: int, m: int, seed: int) -> tuple[int, DistTrace]:
    """Two-phase distributed greedy.

    Elements are assigned to machines iid-uniformly; each machine runs the
    deterministic greedy on its shard; the union of the partial solutions is
    re-solved on one machine; the answer is the best of the merged solution
    and the partials.  Ties prefer the merged solution, then the lowest
    machine index (the tie is flagged on the trace).
    """
    if m < 1:
        raise ValueError(f"need m >= 1 machines, got {m}")
    if k < 1 or k > oracle.n:
        raise KOutOfRangeError(f"k={k} outside 1..{oracle.n}")
    trace = DistTrace()
    shards = _partition(oracle.n, m, derive_rng(seed, 0, 0, 0))
    partials = []
    for i, shard in enumerate(shards, start=1):
        sol = _run_base(None, oracle, k, shard, (seed, 1, 1, i))
        partials.append(sol)
        trace.rows.append(DistTraceRow(1, 1, i, shard.bit_count(), sol,
                                       oracle.value(sol), shard=shard))
    union = 0
    for sol in partials:
        union |= sol
    merged = _run_base(None, oracle, k, union, (seed, 2, 1, 0))
    trace.rows.append(DistTraceRow(2, 1, 0, union.bit_count(), merged,
                                   oracle.value(merged), shard=union))
    best, best_value = merged, oracle.value(merged)
    for sol in partials:
        v = oracle.value(sol)
        if v > best_value:
            best, best_value = sol, v
        elif v == best_value and sol != best:
            trace.tie_occurred = True
    trace.round_best = [best_value]
    return best, trace


def barbosa_framework(oracle: ValueOracle, k: int, cfg: MpcConfig,
                      base: BaseAlgorithm, seed: int) -> tuple[int, DistTrace]:
    """Multi-round pool-growing framework.

    Each round, every group partitions the ground set over its machines;
    each machine runs the base algorithm on shard plus pool; the incumbent
    keeps the best solution seen and the pool accumulates every round
    solution.
    """
    if k < 1 or k > oracle.n:
        raise KOutOfRangeError(f"k={k} outside 1..{oracle.n}")
    cfg.check_strict(oracle.n)
    trace = DistTrace()
    pool = 0
    best, best_value = 0, float("-inf")
    for r in range(1, cfg.rounds + 1):
        round_solutions = []
        for g in range(1, cfg.groups + 1):
            shards = _partition(oracle.n, cfg.machines, derive_rng(seed, r, g, 0))
            for i, shard in enumerate(shards, start=1):
                allowed = shard | pool
                sol = _run_base(base, oracle, k, allowed, (seed, r, g, i))
                round_solutions.append(sol)
                trace.rows.append(DistTraceRow(r, g, i, shard.bit_count(), sol,
                                               oracle.value(sol), shard=shard))
        for sol in round_solutions:
            v = oracle.value(sol)
            if v > best_value:
                best, best_value = sol, v
            pool |= sol
        if cfg.strict and cfg.capacity is not None and pool.bit_count() > cfg.capacity:
            raise PoolOverflowError(
                f"pool holds {pool.bit_count()} elements, capacity {cfg.capacity}")
        trace.round_best.append(best_value)
        trace.pool_sizes.append(pool.bit_count())
        trace.pools.append(pool)
    return best, trace


def sampled_distribution(runner, trials: int, n: int, k: int) -> "OutputDistribution":
    """Empirical output distribution of a distributed runner over seeds
    0..trials-1.  ``runner(seed)`` must return a subset mask."""
    from .distributions import OutputDistribution
    counts: dict[int, int] = {}
    for t in range(trials):
        mask = runner(t)
        counts[mask] = counts.get(mask, 0) + 1
    probs = {mask: c / trials for mask, c in counts.items()}
    return OutputDistribution(n, k, probs, mode="empirical", trials=trials)
