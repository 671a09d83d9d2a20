"""Distributed simulation: the two-phase distributed greedy and the
multi-round pool-growing framework, on the instances that make them flip.
"""

from subsens import (FunctionSpec, MpcConfig, barbosa_framework, build_function,
                     greedi, ids_of, restrict)

n, k, m = 64, 4, 4
f = build_function(FunctionSpec("greedi_lb", n=n, c=0.5))

mask, trace = greedi(f, k, m, seed=3)
print("distributed greedy on f:", ids_of(mask))
for row in trace.export_lines():
    print("  ", row)

g = restrict(f, 0)
mask2, _ = greedi(g, k, m, seed=3)
print("after deleting the heavy element:", [g.index_map[e] for e in ids_of(mask2)])
print("symmetric difference:", (mask ^ g.to_original_ids(mask2)).bit_count())

print()
fw = build_function(FunctionSpec("framework_lb", n=128, k=4, c=0.5))
cfg = MpcConfig(machines=4, groups=2, rounds=3)
best, trace = barbosa_framework(fw, 4, cfg, None, seed=11)
print("framework incumbent:", ids_of(best))
print("best value per round:", [round(v, 3) for v in trace.round_best])
print("pool size per round: ", trace.pool_sizes)
