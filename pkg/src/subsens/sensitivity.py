"""Worst-case and average sensitivity measurements, plus every closed-form
bound the analysis provides for side-by-side comparison.

Sensitivity of an algorithm on f is the (max or mean over deleted elements
e of the) earth mover's distance between the output distributions on f and
on f with e removed.  EMD is always computed in the original id space: the
deleted element simply never appears in the restricted run's support.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algorithms import derive_rng
from .distributions import (Algorithm, OutputDistribution,
                            exact_output_distribution, DEFAULT_NODE_BUDGET)
from .oracle import ValueOracle, restrict
from .transport import emd, inclusion_probability_lower_bound


class DegenerateDError(ValueError):
    """The denominator D = (1-alpha) n + (1-c) alpha n does not exceed k."""


LB_CONSTANT_NOTE = (
    "lower-bound constant implemented as (1-sqrt(1-c))^2/c * k, matching the "
    "derivation it is paired with; the '(1-(1-sqrt(c))^2)/c' rendering "
    "sometimes quoted for it is inconsistent with that derivation")


@dataclass(frozen=True)
class ElementSensitivity:
    element: int
    emd: float
    inclusion_lb: float
    mode: str
    trials: Optional[int] = None
    bootstrap_halfwidth: Optional[float] = None


@dataclass
class SensitivityReport:
    algorithm: str
    function: str
    n: int
    k: int
    mode: str
    per_element: tuple[ElementSensitivity, ...]
    aggregate: str = "worst_case"       # which aggregate the caller asked for
    trials: Optional[int] = None
    bounds: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def worst_case(self) -> float:
        return max(r.emd for r in self.per_element)

    @property
    def worst_element(self) -> int:
        best = max(self.per_element, key=lambda r: (r.emd, -r.element))
        return best.element

    @property
    def average(self) -> float:
        return sum(r.emd for r in self.per_element) / len(self.per_element)

    def validate(self):
        limit = 2 * self.k + 1e-9
        for r in self.per_element:
            if r.emd < -1e-12 or r.emd > limit:
                raise ValueError(f"per-element EMD {r.emd} outside [0, 2k]")
        if self.worst_case < self.average - 1e-12:
            raise ValueError("worst-case below average")
        return self

    def to_csv(self) -> str:
        lines = ["deleted_element,emd,mode,trials"]
        for r in self.per_element:
            lines.append(f"{r.element},{r.emd!r},{r.mode},{r.trials if r.trials else ''}")
        lines.append("")
        lines.append("worst_case,average,bound_ub,bound_lb,pass")
        ub = self.bounds.get("upper")
        lb = self.bounds.get("lower")
        ok = self.bounds.get("pass")
        lines.append(
            f"{self.worst_case!r},{self.average!r},"
            f"{'' if ub is None else repr(ub)},{'' if lb is None else repr(lb)},"
            f"{'' if ok is None else ok}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_csv(cls, text: str) -> dict:
        """Round-trip helper: per-element values and the summary row."""
        lines = text.splitlines()
        if not lines or lines[0] != "deleted_element,emd,mode,trials":
            raise ValueError("not a SensitivityReport CSV")
        rows = []
        i = 1
        while i < len(lines) and lines[i].strip():
            e, v, mode, trials = lines[i].split(",")
            rows.append((int(e), float(v), mode, int(trials) if trials else None))
            i += 1
        summary = {}
        if i + 2 <= len(lines) and lines[i + 1] == "worst_case,average,bound_ub,bound_lb,pass":
            parts = lines[i + 2].split(",")
            summary = {"worst_case": float(parts[0]), "average": float(parts[1]),
                       "bound_ub": float(parts[2]) if parts[2] else None,
                       "bound_lb": float(parts[3]) if parts[3] else None,
                       "pass": parts[4] or None}
        return {"rows": rows, "summary": summary}


def _threads() -> int:
    raw = os.environ.get("SENS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _distribution(alg, oracle, k, mode, trials, seed_tag,
                  p_min, node_budget) -> OutputDistribution:
    if mode == "exact":
        return exact_output_distribution(alg, oracle, k, p_min=p_min,
                                         node_budget=node_budget)
    if mode == "sampled":
        if not trials:
            raise ValueError("sampled mode needs trials")
        return _sampled_with_key(alg, oracle, k, trials, seed_tag)
    raise ValueError(f"unknown mode {mode!r}")


def _sampled_with_key(alg, oracle, k, trials, seed_key) -> OutputDistribution:
    """Empirical distribution over `trials` runs, one substream per trial.

    Uses inverse-CDF draws from the per-step probability vectors; this is
    distributionally identical to the sequential runners but avoids per-step
    generator construction in the trial loop.
    """
    from .algorithms import OrdinalSchedule, schedule_step_support
    is_schedule = isinstance(alg, OrdinalSchedule)
    steps = min(k, oracle.n)
    counts: dict[int, int] = {}
    for t in range(trials):
        rng = derive_rng(*seed_key, t)
        draws = rng.random(steps)
        current = 0
        for i in range(1, steps + 1):
            x = draws[i - 1]
            if is_schedule:
                support = schedule_step_support(alg, oracle, current, i)
                acc = 0.0
                chosen = support[-1][0]
                for e, q, _ in support:
                    acc += q
                    if x < acc:
                        chosen = e
                        break
            else:
                probs = alg.probabilities(oracle, current, k)
                cum = np.cumsum(probs)
                chosen = int(np.searchsorted(cum, x * cum[-1], side="right"))
                while chosen < oracle.n - 1 and probs[chosen] == 0.0:
                    chosen += 1
            current |= 1 << chosen
        counts[current] = counts.get(current, 0) + 1
    probs_out = {m: c / trials for m, c in counts.items()}
    return OutputDistribution(oracle.n, steps, probs_out,
                              mode="empirical", trials=trials).validate()


def _bootstrap_halfwidth(d1: OutputDistribution, d2: OutputDistribution,
                         resamples: int, seed_key: tuple) -> Optional[float]:
    """Percentile half-width of the EMD over multinomial resamples."""
    if resamples <= 0 or not d1.trials or not d2.trials:
        return None
    rng = derive_rng(*seed_key, 0xB007)
    s1, s2 = d1.support(), d2.support()
    p1 = np.array([d1.probs[m] for m in s1])
    p2 = np.array([d2.probs[m] for m in s2])
    values = []
    for _ in range(resamples):
        c1 = rng.multinomial(d1.trials, p1 / p1.sum())
        c2 = rng.multinomial(d2.trials, p2 / p2.sum())
        r1 = OutputDistribution(d1.n, d1.k, {m: c / d1.trials for m, c in zip(s1, c1) if c},
                                mode="empirical", trials=d1.trials)
        r2 = OutputDistribution(d2.n, d2.k, {m: c / d2.trials for m, c in zip(s2, c2) if c},
                                mode="empirical", trials=d2.trials)
        values.append(emd(r1, r2)[0])
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float((hi - lo) / 2)


def _measure_element(alg, oracle, k, e, base_dist, mode, trials, seed,
                     p_min, node_budget, bootstrap) -> ElementSensitivity:
    reduced = restrict(oracle, e)
    if mode == "exact":
        d2 = exact_output_distribution(alg, reduced, k, p_min=p_min,
                                       node_budget=node_budget)
    else:
        d2 = _sampled_with_key(alg, reduced, k, trials, (seed, 1, e))
    d2 = d2.remapped(reduced.index_map, oracle.n)
    value, _ = emd(base_dist, d2)
    value = float(value)
    lb = float(inclusion_probability_lower_bound(base_dist, d2))
    half = None
    if mode == "sampled":
        half = _bootstrap_halfwidth(base_dist, d2, bootstrap, (seed, 2, e))
    return ElementSensitivity(e, value, lb, mode, trials if mode == "sampled" else None, half)


def _sensitivity_scan(alg, oracle, k, mode, seed, trials, elements, p_min,
                      node_budget, bootstrap, aggregate, alg_name) -> SensitivityReport:
    if elements is None:
        elements = list(range(oracle.n))
    base = _distribution(alg, oracle, k, mode, trials, (seed, 0),
                         p_min, node_budget)
    workers = _threads()
    if workers > 1 and len(elements) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda e: _measure_element(alg, oracle, k, e, base, mode, trials,
                                           seed, p_min, node_budget, bootstrap),
                elements))
    else:
        results = [_measure_element(alg, oracle, k, e, base, mode, trials,
                                    seed, p_min, node_budget, bootstrap)
                   for e in elements]
    results.sort(key=lambda r: r.element)
    report = SensitivityReport(
        algorithm=alg_name or getattr(alg, "name", type(alg).__name__),
        function=oracle.name, n=oracle.n, k=k, mode=mode,
        per_element=tuple(results), aggregate=aggregate,
        trials=trials if mode == "sampled" else None)
    return report.validate()


def worst_case_sensitivity(alg: Algorithm, oracle: ValueOracle, k: int,
                           mode: str = "exact", seed: int = 0,
                           trials: Optional[int] = None,
                           elements: Optional[Sequence[int]] = None,
                           p_min: float = 0.0,
                           node_budget: int = DEFAULT_NODE_BUDGET,
                           bootstrap: int = 200,
                           alg_name: str = "") -> SensitivityReport:
    """max_e EMD(A(f), A(f minus e)); restrict ``elements`` to scan a known
    witness set (the reported max is then a lower bound on the true max)."""
    return _sensitivity_scan(alg, oracle, k, mode, seed, trials, elements,
                             p_min, node_budget, bootstrap, "worst_case", alg_name)


def average_sensitivity(alg: Algorithm, oracle: ValueOracle, k: int,
                        mode: str = "exact", seed: int = 0,
                        trials: Optional[int] = None,
                        p_min: float = 0.0,
                        node_budget: int = DEFAULT_NODE_BUDGET,
                        bootstrap: int = 200,
                        alg_name: str = "") -> SensitivityReport:
    """Uniform average over all deleted elements (never a partial scan)."""
    return _sensitivity_scan(alg, oracle, k, mode, seed, trials, None,
                             p_min, node_budget, bootstrap, "average", alg_name)


# ---------------------------------------------------------------------------
# closed-form bounds


def bound_prop_greedy_sensitivity(c: float, k: int) -> float:
    """((1 - sqrt(1-c))^2 / c) * (k - 1) + 2, continuously extended to 2 at c=0."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c={c} outside [0, 1]")
    if c == 0.0:
        return 2.0
    return ((1.0 - math.sqrt(1.0 - c)) ** 2 / c) * (k - 1) + 2.0


def bound_prop_greedy_sensitivity_lb(c: float, k: int) -> float:
    """((1 - sqrt(1-c))^2 / c) * k, the eps-free limit of the lower bound."""
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c={c} outside (0, 1]")
    return ((1.0 - math.sqrt(1.0 - c)) ** 2 / c) * k


def bound_prop_greedy_approx(c: float) -> float:
    """1 - exp(-c / (1 - c)) for c in [0, 1); the c=1 limit (1) is excluded."""
    if not 0.0 <= c < 1.0:
        raise ValueError(f"c={c} outside [0, 1)")
    return 1.0 - math.exp(-c / (1.0 - c))


def bound_randgreedy_lb(k: int) -> float:
    """2k (1 - 2 ((k-1)/k)^k)."""
    if k < 2:
        raise ValueError(f"k={k} must be >= 2")
    return 2.0 * k * (1.0 - 2.0 * ((k - 1) / k) ** k)


def bound_pA_pB(k: int, n: int, c: float) -> tuple[float, float]:
    """Lower bound on p_A and upper bound on p_B for the heavy-element
    instance: p_A >= k/D (1 - (k-1)/(2(D-k))), p_B <= (1-c) k / (D-k),
    with alpha = (1 - sqrt(1-c))/c and D = (1-alpha) n + (1-c) alpha n
    (equivalently D = n sqrt(1-c)).

    At c = 1 the weight classes degenerate (no unit-class elements, the
    discounted class contributes nothing), so both bounds are returned as 0
    without touching the vanishing denominator.
    """
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c={c} outside (0, 1]")
    if c == 1.0:
        return 0.0, 0.0
    alpha = (1.0 - math.sqrt(1.0 - c)) / c
    d = (1.0 - alpha) * n + (1.0 - c) * alpha * n
    if d <= k:
        raise DegenerateDError(f"D={d} <= k={k}")
    p_a = (k / d) * (1.0 - (k - 1) / (2.0 * (d - k)))
    p_b = (1.0 - c) * k / (d - k)
    return p_a, p_b


def attach_bounds(report: SensitivityReport, c: float, k: int) -> SensitivityReport:
    """Record the upper/lower closed-form bounds and a pass flag on a report."""
    upper = bound_prop_greedy_sensitivity(c, k)
    lower = bound_prop_greedy_sensitivity_lb(c, k) if c > 0 else None
    report.bounds = {
        "c": c,
        "upper": upper,
        "lower": lower,
        "pass": "yes" if report.worst_case <= upper + 1e-6 else "no",
    }
    report.notes = report.notes + (LB_CONSTANT_NOTE,)
    return report
