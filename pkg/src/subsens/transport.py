"""Exact earth mover's distance between subset distributions under the
symmetric-difference ground cost, plus total variation distance and the
inclusion-probability lower bound.

The solver is a transportation-specialized network simplex on the dense
cost matrix.  Entering arcs are chosen by most-negative reduced cost; if
the objective stalls on degenerate pivots the solver switches to Bland's
rule until it makes progress, which guarantees termination.  Every solve
returns an optimal plan together with feasible dual potentials
(complementary slackness within 1e-7).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .distributions import OutputDistribution


class SupportCapExceededError(RuntimeError):
    """Combined support larger than the configured cap."""


class InfeasibleMarginalsError(ValueError):
    """Input distributions do not carry equal total mass."""


DEFAULT_SUPPORT_CAP = 50_000
PIVOT_TOL = 1e-12
CERT_TOL = 1e-7
MASS_TOL = 1e-9


def sym_diff_cost(a: int, b: int) -> int:
    """|S △ T| via popcount of xor."""
    return (a ^ b).bit_count()


def tv_distance(d1: OutputDistribution, d2: OutputDistribution) -> float:
    """Half the L1 distance between the two distributions."""
    if d1.n != d2.n:
        raise ValueError(f"ground sets differ: {d1.n} vs {d2.n}")
    keys = set(d1.probs) | set(d2.probs)
    return 0.5 * sum(abs(d1.probs.get(m, 0.0) - d2.probs.get(m, 0.0)) for m in sorted(keys))


def inclusion_probability_lower_bound(d1: OutputDistribution,
                                      d2: OutputDistribution) -> float:
    """sum_e |Pr_1[e in S] - Pr_2[e in S]|; a lower bound on the EMD since
    |S △ S'| = sum_e |1_S(e) - 1_S'(e)| pointwise."""
    if d1.n != d2.n:
        raise ValueError(f"ground sets differ: {d1.n} vs {d2.n}")
    return float(np.abs(d1.inclusion_probabilities() - d2.inclusion_probabilities()).sum())


@dataclass
class TransportPlan:
    """Optimal coupling between two subset distributions."""

    sources: list[int]               # support masks, row order
    targets: list[int]               # support masks, column order
    entries: list[tuple[int, int, float]]   # (source mask, target mask, mass)
    cost: float
    cost_rational: Optional[Fraction] = None
    potentials_source: Optional[np.ndarray] = None
    potentials_target: Optional[np.ndarray] = None
    max_negative_reduced_cost: float = 0.0
    max_marginal_residual: float = 0.0
    max_slackness_violation: float = 0.0
    pivots: int = 0

    def certificate_ok(self, tol: float = CERT_TOL) -> bool:
        return (self.max_negative_reduced_cost <= tol
                and self.max_marginal_residual <= MASS_TOL
                and self.max_slackness_violation <= tol)

    def to_csv(self) -> str:
        lines = ["source_hex,target_hex,mass,cost_contrib"]
        for s, t, mass in self.entries:
            lines.append(f"{s:#x},{t:#x},{mass!r},{mass * sym_diff_cost(s, t)!r}")
        return "\n".join(lines) + "\n"


def _leastcost_initial(a: np.ndarray, b: np.ndarray, cost: np.ndarray):
    """Initial basic feasible solution by the least-cost crossing-out rule.

    Cells are visited in ascending (cost, i, j) order; each visited cell with
    both endpoints still active is saturated and deactivates exactly one node
    (ties deactivate the row), so the r + c - 1 chosen arcs form a spanning
    tree just as in the northwest-corner rule, but start near the optimum.
    """
    r, c = cost.shape
    ra, rb = a.copy(), b.copy()
    row_active = [True] * r
    col_active = [True] * c
    basis = []
    flows = []
    order = np.argsort(cost, axis=None, kind="stable")
    remaining = r + c
    rows_left, cols_left = r, c
    for flat in order:
        if remaining <= 1:
            break
        i, j = divmod(int(flat), c)
        if not (row_active[i] and col_active[j]):
            continue
        f = min(ra[i], rb[j])
        basis.append((i, j))
        flows.append(f)
        ra[i] -= f
        rb[j] -= f
        # deactivate exactly one endpoint, chosen so neither side dies while
        # the other still has >= 2 live nodes; comparing ra/rb alone is not
        # safe because float residue breaks the exact supply/demand balance
        if cols_left == 1 and rows_left > 1:
            kill_row = True
        elif rows_left == 1 and cols_left > 1:
            kill_row = False
        else:
            kill_row = ra[i] <= rb[j]
        if kill_row:
            row_active[i] = False
            rows_left -= 1
        else:
            col_active[j] = False
            cols_left -= 1
        remaining -= 1
    return basis, flows


def _network_simplex(a: np.ndarray, b: np.ndarray, cost: np.ndarray):
    """Transportation simplex with tree-maintained potentials.

    Entering arc: most negative reduced cost, switching to Bland's rule
    (first negative, row-major) after a run of degenerate pivots.  Leaving
    arc on ties: lexicographically smallest, which keeps Bland's guarantee.
    """
    r, c = cost.shape
    n_nodes = r + c
    basis, flows = _leastcost_initial(a, b, cost)
    # adjacency: node -> {neighbor: arc index}
    adj: list[dict] = [dict() for _ in range(n_nodes)]
    for idx, (i, j) in enumerate(basis):
        adj[i][r + j] = idx
        adj[r + j][i] = idx
    # potentials from scratch once; maintained incrementally afterwards
    u = np.zeros(r)
    v = np.zeros(c)
    seen = [False] * n_nodes
    seen[0] = True
    reached = 1
    stack = [0]
    while stack:
        node = stack.pop()
        for nb, idx in adj[node].items():
            if seen[nb]:
                continue
            seen[nb] = True
            reached += 1
            i, j = basis[idx]
            if nb >= r:
                v[nb - r] = cost[i, j] - u[i]
            else:
                u[nb] = cost[i, j] - v[j]
            stack.append(nb)
    if reached != n_nodes:
        raise RuntimeError(
            f"initial transportation basis is not spanning ({reached}/{n_nodes})")

    bi = np.empty(len(basis), dtype=np.intp)
    bj = np.empty(len(basis), dtype=np.intp)
    stall = 0
    bland = False
    pivots = 0
    max_pivots = 200 * n_nodes * max(r, c) + 1000
    parent = [0] * n_nodes
    parent_arc = [0] * n_nodes
    while True:
        rc = cost - u[:, None] - v[None, :]
        for idx, (i, j) in enumerate(basis):
            bi[idx] = i
            bj[idx] = j
        rc[bi, bj] = 0.0        # guard float dust on basic arcs
        if bland:
            neg = np.argwhere(rc < -PIVOT_TOL)
            if len(neg) == 0:
                break
            ei, ej = int(neg[0][0]), int(neg[0][1])
        else:
            flat = int(np.argmin(rc))
            ei, ej = divmod(flat, c)
            if rc[ei, ej] >= -PIVOT_TOL:
                break
        rc_enter = rc[ei, ej]
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("network simplex failed to converge")

        # unique tree path from row node ei to col node r+ej
        goal = r + ej
        for node in range(n_nodes):
            parent[node] = -1
        parent[ei] = ei
        stack = [ei]
        while stack:
            node = stack.pop()
            if node == goal:
                break
            for nb, idx in adj[node].items():
                if parent[nb] < 0:
                    parent[nb] = node
                    parent_arc[nb] = idx
                    stack.append(nb)
        path = []
        node = goal
        while node != ei:
            path.append(parent_arc[node])
            node = parent[node]
        path.reverse()

        # pushing theta on the entering arc drains the first path arc at row
        # ei, refills the next, and so on: even walk positions lose flow
        minus_arcs = path[0::2]
        plus_arcs = path[1::2]
        theta = min(flows[idx] for idx in minus_arcs)
        leave = min((idx for idx in minus_arcs if flows[idx] <= theta + 1e-18),
                    key=lambda idx: basis[idx])
        for idx in minus_arcs:
            flows[idx] -= theta
        for idx in plus_arcs:
            flows[idx] += theta

        li, lj = basis[leave]
        del adj[li][r + lj]
        del adj[r + lj][li]
        basis[leave] = (ei, ej)
        flows[leave] = theta
        # re-root: the component now containing col ej (after removing the
        # leaving arc) shifts potentials by the entering reduced cost
        comp = [goal]
        mark = {goal}
        while comp:
            node = comp.pop()
            if node >= r:
                v[node - r] += rc_enter
            else:
                u[node] -= rc_enter
            for nb in adj[node]:
                if nb not in mark:
                    mark.add(nb)
                    comp.append(nb)
        adj[ei][goal] = leave
        adj[goal][ei] = leave

        if theta <= PIVOT_TOL:
            stall += 1
            if stall > n_nodes:
                bland = True
        else:
            stall = 0
            bland = False
    return basis, flows, u, v, pivots


def emd(d1: OutputDistribution, d2: OutputDistribution, *,
        support_cap: int = DEFAULT_SUPPORT_CAP) -> tuple[float, TransportPlan]:
    """Minimum expected |S △ S'| over couplings of d1 and d2.

    Returns the optimal value and a TransportPlan carrying the coupling and
    an LP-duality certificate.  When both inputs are empirical with the same
    trial count the objective is also reported as an exact rational.
    """
    if d1.n != d2.n:
        raise ValueError(f"ground sets differ: {d1.n} vs {d2.n}")
    sources = d1.support()
    targets = d2.support()
    if len(sources) + len(targets) > support_cap:
        raise SupportCapExceededError(
            f"support {len(sources)}+{len(targets)} exceeds cap {support_cap}")
    a = np.array([d1.probs[m] for m in sources], dtype=float)
    b = np.array([d2.probs[m] for m in targets], dtype=float)
    if abs(a.sum() - b.sum()) > MASS_TOL:
        raise InfeasibleMarginalsError(f"mass mismatch: {a.sum()} vs {b.sum()}")
    # absorb sub-tolerance residual so the transportation problem balances
    b[int(np.argmax(b))] += a.sum() - b.sum()
    cost = np.empty((len(sources), len(targets)), dtype=float)
    for i, s in enumerate(sources):
        for j, t in enumerate(targets):
            cost[i, j] = (s ^ t).bit_count()
    basis, flows, u, v, pivots = _network_simplex(a, b, cost)

    entries = []
    total = 0.0
    row_sums = np.zeros(len(sources))
    col_sums = np.zeros(len(targets))
    slack = 0.0
    for (i, j), f in zip(basis, flows):
        row_sums[i] += f
        col_sums[j] += f
        if f > 0:
            entries.append((sources[i], targets[j], float(f)))
            total += f * cost[i, j]
            slack = max(slack, abs(cost[i, j] - u[i] - v[j]))
    entries.sort()
    total = float(total)
    rc = cost - u[:, None] - v[None, :]
    plan = TransportPlan(
        sources=sources, targets=targets, entries=entries, cost=total,
        potentials_source=u, potentials_target=v,
        max_negative_reduced_cost=float(max(0.0, -rc.min())),
        max_marginal_residual=float(max(np.abs(row_sums - a).max(),
                                        np.abs(col_sums - b).max())),
        max_slackness_violation=float(slack),
        pivots=pivots,
    )
    plan.cost_rational = _rational_cost(d1, d2, basis, flows, cost)
    if not plan.certificate_ok():
        raise RuntimeError(
            f"EMD certificate failed: rc={plan.max_negative_reduced_cost}, "
            f"residual={plan.max_marginal_residual}, slack={plan.max_slackness_violation}")
    return total, plan


def _rational_cost(d1, d2, basis, flows, cost) -> Optional[Fraction]:
    """Exact objective when both inputs are empirical with matching trials.

    Basic solutions of a transportation problem with integral marginals are
    integral, so flows should be integer multiples of 1/trials; verify the
    rounding before trusting it.
    """
    if d1.mode != "empirical" or d2.mode != "empirical":
        return None
    if not d1.trials or d1.trials != d2.trials:
        return None
    t = d1.trials
    total = Fraction(0)
    for (i, j), f in zip(basis, flows):
        count = round(f * t)
        if abs(f * t - count) > 1e-6:
            return None
        total += Fraction(count, t) * int(cost[i, j])
    return total
