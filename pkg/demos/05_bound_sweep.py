"""Closed-form bound curves over the curvature range, plus the measured
sensitivity of proportional greedy on the bounded-curvature instance --
the data behind a bound-vs-measurement plot.
"""

import numpy as np

from subsens import (FunctionSpec, build_function, curvature,
                     bound_prop_greedy_approx, bound_prop_greedy_sensitivity,
                     bound_prop_greedy_sensitivity_lb, bound_randgreedy_lb,
                     proportional_greedy_rule, worst_case_sensitivity)

k = 4
print("c      ub(c,k)   lb(c,k)   approx(c)")
for c in np.linspace(0.05, 0.95, 10):
    print(f"{c:.2f}   {bound_prop_greedy_sensitivity(c, k):7.4f}   "
          f"{bound_prop_greedy_sensitivity_lb(c, k):7.4f}   "
          f"{bound_prop_greedy_approx(c):7.4f}")

print()
print("randomized-greedy lower bound 2k(1 - 2((k-1)/k)^k):")
for kk in (2, 3, 4, 8, 16):
    print(f"  k={kk:2d}: {bound_randgreedy_lb(kk):.4f}")

print()
print("measured worst-case sensitivity of proportional greedy (exact):")
print("c      measured   upper bound")
rule = proportional_greedy_rule()
for c in (0.25, 0.5, 0.75, 1.0):
    f = build_function(FunctionSpec("curvature_det_lb", n=2 * k + 1, k=k, c=c))
    rep = worst_case_sensitivity(rule, f, k, alg_name="proportional")
    print(f"{c:.2f}   {rep.worst_case:8.4f}   {bound_prop_greedy_sensitivity(curvature(f), k):8.4f}")
