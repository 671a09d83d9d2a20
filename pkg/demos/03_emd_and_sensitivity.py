"""Earth mover's distance between output distributions, and a full
sensitivity report with the closed-form bounds attached.
"""

from subsens import (FunctionSpec, OutputDistribution, attach_bounds,
                     build_function, curvature, emd,
                     inclusion_probability_lower_bound,
                     proportional_greedy_rule, tv_distance,
                     worst_case_sensitivity)

# tiny hand example: half mass must move across a 2-element gap
d1 = OutputDistribution(4, 1, {0b0001: 0.5, 0b0010: 0.5})
d2 = OutputDistribution(4, 1, {0b0001: 1.0})
value, plan = emd(d1, d2)
print("emd(half/half vs point) =", value)
print("tv  =", tv_distance(d1, d2))
print("inclusion lower bound =", inclusion_probability_lower_bound(d1, d2))
print("plan:")
print(plan.to_csv())

# sensitivity of proportional greedy on the tight lower-bound instance
f = build_function(FunctionSpec("appendixD_lb", n=12, c=0.75))
k = 2
report = worst_case_sensitivity(proportional_greedy_rule(), f, k,
                                alg_name="proportional")
attach_bounds(report, curvature(f), k)
print(f"worst-case sensitivity = {report.worst_case:.4f} "
      f"(witness element {report.worst_element})")
print(f"average sensitivity    = {report.average:.4f}")
print(f"upper bound            = {report.bounds['upper']:.4f}  "
      f"(holds: {report.bounds['pass']})")
print(f"lower-bound target     = {report.bounds['lower']:.4f}")
print()
print(report.to_csv())
