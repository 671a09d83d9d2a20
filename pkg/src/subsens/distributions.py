"""Output distributions of (randomized) sequential algorithms, computed
exactly by execution-tree enumeration or empirically by sampling, plus the
per-step selection profile p_i(e) / P_i(e).

The exact enumerator is a level-by-level forward DP memoized on the
unordered current set: every supported rule depends only on (oracle, S),
and schedules only add the step index, which equals |S| + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .algorithms import (DecisionRule, OrdinalSchedule,
                         independent_sequential, run_sequential,
                         schedule_step_support)
from .oracle import ValueOracle, GroundSet

Algorithm = Union[DecisionRule, OrdinalSchedule]


class NodeBudgetExceededError(RuntimeError):
    """Execution tree wider than the configured branch budget; sample instead."""


DEFAULT_NODE_BUDGET = 10_000_000


@dataclass
class OutputDistribution:
    """Probability distribution over canonical subsets (bitmasks).

    mode is "exact" (enumerated; probabilities sum to 1 within 1e-9 minus
    any pruned mass, which is recorded) or "empirical" (counts / trials).
    """

    n: int
    k: int
    probs: dict[int, float]
    mode: str = "exact"
    trials: Optional[int] = None
    lost_mass: float = 0.0

    def validate(self, tol: float = 1e-9):
        sizes = {mask.bit_count() for mask in self.probs}
        if len(sizes) > 1:
            raise ValueError(f"support mixes set sizes {sorted(sizes)}")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")
        total = sum(self.probs.values())
        if abs(total + self.lost_mass - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total} (lost {self.lost_mass})")
        return self

    def support(self) -> list[int]:
        return sorted(self.probs)

    def inclusion_probabilities(self) -> np.ndarray:
        """Pr[e in S] per element, in this distribution's id space."""
        out = np.zeros(self.n)
        for mask, p in self.probs.items():
            m = mask
            while m:
                b = m & -m
                out[b.bit_length() - 1] += p
                m ^= b
        return out

    def expected_value(self, oracle: ValueOracle) -> float:
        return sum(p * oracle.value(mask) for mask, p in sorted(self.probs.items()))

    def remapped(self, index_map: tuple[int, ...], n: int) -> "OutputDistribution":
        """Translate support masks through an id map into a larger ground set."""
        remapped = {}
        for mask, p in self.probs.items():
            out = 0
            m = mask
            while m:
                b = m & -m
                out |= 1 << index_map[b.bit_length() - 1]
                m ^= b
            remapped[out] = remapped.get(out, 0.0) + p
        return OutputDistribution(n, self.k, remapped, self.mode, self.trials, self.lost_mass)

    def to_csv(self) -> str:
        lines = ["set_bitmask_hex,probability"]
        for mask in sorted(self.probs):
            lines.append(f"{mask:#x},{self.probs[mask]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, n: int, mode: str = "exact",
                 trials: Optional[int] = None) -> "OutputDistribution":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "set_bitmask_hex,probability":
            raise ValueError("not an OutputDistribution CSV")
        probs = {}
        for ln in lines[1:]:
            mask_hex, _, p = ln.partition(",")
            probs[int(mask_hex, 16)] = float(p)
        k = max((m.bit_count() for m in probs), default=0)
        return cls(n, k, probs, mode=mode, trials=trials)


def _step_support(alg: Algorithm, oracle: ValueOracle, current: int, step: int,
                  k: int, allowed: Optional[int]) -> list[tuple[int, float]]:
    """Nonzero (element, probability) pairs for one step, deterministic order."""
    if isinstance(alg, OrdinalSchedule):
        support = schedule_step_support(alg, oracle, current, step, allowed)
        merged: dict[int, float] = {}
        for e, q, _ in support:
            merged[e] = merged.get(e, 0.0) + q
        return sorted(merged.items())
    probs = alg.probabilities(oracle, current, k, allowed)
    return [(int(e), float(probs[e])) for e in np.flatnonzero(probs)]


def exact_output_distribution(alg: Algorithm, oracle: ValueOracle, k: int, *,
                              node_budget: int = DEFAULT_NODE_BUDGET,
                              p_min: float = 0.0, start_mask: int = 0,
                              branch_order: str = "asc",
                              allowed: Optional[int] = None) -> OutputDistribution:
    """Enumerate the output distribution exactly (up to float accumulation).

    ``p_min`` > 0 prunes branches whose path probability falls below it; the
    dropped mass is reported in ``lost_mass``.  ``start_mask`` conditions the
    run on a forced initial set; k more elements are then selected.
    ``branch_order`` only changes the accumulation order (canonicalization
    check hook).
    """
    GroundSet(oracle.n).require_exact()
    steps = min(k, oracle.n - start_mask.bit_count())
    level = {start_mask: 1.0}
    budget = node_budget
    lost = 0.0
    for step in range(1, steps + 1):
        nxt: dict[int, float] = {}
        for current in sorted(level):
            q = level[current]
            pairs = _step_support(alg, oracle, current, step, k, allowed)
            if branch_order == "desc":
                pairs = list(reversed(pairs))
            budget -= len(pairs)
            if budget < 0:
                raise NodeBudgetExceededError(
                    f"node budget {node_budget} exhausted at step {step}; "
                    "use sampled_output_distribution")
            for e, p in pairs:
                if p <= 0.0:
                    continue
                mass = q * p
                if p_min > 0.0 and mass < p_min:
                    lost += mass
                    continue
                key = current | (1 << e)
                nxt[key] = nxt.get(key, 0.0) + mass
        level = nxt
    dist = OutputDistribution(oracle.n, steps + start_mask.bit_count(), level,
                              mode="exact", lost_mass=lost)
    return dist.validate()


def sampled_output_distribution(alg: Algorithm, oracle: ValueOracle, k: int,
                                trials: int, seed: int, *,
                                allowed: Optional[int] = None) -> OutputDistribution:
    """Empirical measure of `trials` independent runs; trial t uses the
    substream keyed (seed, t)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    counts: dict[int, int] = {}
    for t in range(trials):
        if isinstance(alg, OrdinalSchedule):
            mask, _ = independent_sequential(oracle, k, alg, seed,
                                             allowed=allowed, seed_key=(seed, t))
        else:
            mask, _ = run_sequential(oracle, k, alg, seed,
                                     allowed=allowed, seed_key=(seed, t))
        counts[mask] = counts.get(mask, 0) + 1
    probs = {mask: c / trials for mask, c in counts.items()}
    k_eff = min(k, oracle.n)
    return OutputDistribution(oracle.n, k_eff, probs, mode="empirical",
                              trials=trials).validate()


@dataclass
class SelectionProfile:
    """p[i][e]: probability of selecting e at step i (1-based rows);
    P[i][e]: probability of having selected e by step i (cumulative)."""

    n: int
    k: int
    p: np.ndarray  # shape (k, n)
    P: np.ndarray  # shape (k, n)
    lost_mass: float = 0.0

    def validate(self, tol: float = 1e-9):
        if np.any(self.p < -tol) or np.any(self.P > 1 + tol):
            raise ValueError("selection profile outside [0, 1]")
        if np.any(np.diff(self.P, axis=0) < -tol):
            raise ValueError("P[i][e] must be non-decreasing in i")
        row_sums = self.p.sum(axis=1)
        if np.any(row_sums > 1 + tol) or np.any(row_sums < 1 - self.lost_mass - tol):
            raise ValueError(f"step rows sum to {row_sums}")
        return self

    def to_csv(self) -> str:
        lines = ["step,element,p,P"]
        for i in range(self.k):
            for e in range(self.n):
                lines.append(f"{i + 1},{e},{self.p[i, e]!r},{self.P[i, e]!r}")
        return "\n".join(lines) + "\n"


def selection_profile(alg: Algorithm, oracle: ValueOracle, k: int, *,
                      node_budget: int = DEFAULT_NODE_BUDGET,
                      p_min: float = 0.0,
                      allowed: Optional[int] = None) -> SelectionProfile:
    """p_i(e) = sum over reach-probability-weighted per-step rule masses."""
    GroundSet(oracle.n).require_exact()
    steps = min(k, oracle.n)
    p = np.zeros((steps, oracle.n))
    level = {0: 1.0}
    budget = node_budget
    lost = 0.0
    for step in range(1, steps + 1):
        nxt: dict[int, float] = {}
        for current in sorted(level):
            q = level[current]
            pairs = _step_support(alg, oracle, current, step, k, allowed)
            budget -= len(pairs)
            if budget < 0:
                raise NodeBudgetExceededError(f"node budget {node_budget} exhausted")
            for e, pr in pairs:
                if pr <= 0.0:
                    continue
                mass = q * pr
                p[step - 1, e] += mass
                if p_min > 0.0 and mass < p_min:
                    lost += mass
                    continue
                key = current | (1 << e)
                nxt[key] = nxt.get(key, 0.0) + mass
        level = nxt
    prof = SelectionProfile(oracle.n, steps, p, np.cumsum(p, axis=0), lost_mass=lost)
    return prof.validate()
