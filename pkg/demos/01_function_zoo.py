"""Tour of the adversarial function families.

Builds one instance of every family, prints a few values, verifies
monotone submodularity exhaustively, and reports the measured curvature.
"""

from subsens import (build_function, check_monotone_submodular, curvature,
                     mask_of, shipped_default_specs)

print("family".ljust(20), "n", " curvature", " structure")
for spec in shipped_default_specs(12):
    oracle = build_function(spec)
    report = check_monotone_submodular(oracle)
    try:
        c = f"{curvature(oracle):.4f}"
    except ValueError:
        c = "  n/a "
    print(spec.family.ljust(20), str(oracle.n).rjust(2), "   " + c,
          "   ok" if report.ok else f"   {len(report.violations)} violations!")

print()
print("A few spot values on the bounded-curvature greedy instance:")
f = build_function(shipped_default_specs(12)[3])  # curvature_det_lb k=5 c=0.5
for members in ([0], [0, 1], [1, 2, 3], [6, 7]):
    print(f"  f({members}) = {f.value(mask_of(members))}")
print(f"  oracle made {f.calls} queries so far")
