"""Sensitivity measurement for submodular maximization under a cardinality
constraint: adversarial instance families, greedy-style algorithms, exact
output-distribution enumeration, earth mover's distance, and in-process
distributed simulation."""

from .oracle import (FunctionSpec, GroundSet, StructureReport, ValueOracle,
                     build_function, check_monotone_submodular, curvature,
                     family_names, ids_of, marginal, mask_of, restrict,
                     shipped_default_specs)
from .algorithms import (DecisionRule, OrdinalSchedule, RunTrace, StepRecord,
                         deterministic_greedy, derive_rng, greedy_rule,
                         independent_sequential, proportional_greedy_rule,
                         randomized_greedy_rule, run_sequential)
from .distributions import (OutputDistribution, SelectionProfile,
                            exact_output_distribution,
                            sampled_output_distribution, selection_profile)
from .transport import (TransportPlan, emd, inclusion_probability_lower_bound,
                        sym_diff_cost, tv_distance)
from .sensitivity import (SensitivityReport, attach_bounds, average_sensitivity,
                          bound_pA_pB, bound_prop_greedy_approx,
                          bound_prop_greedy_sensitivity,
                          bound_prop_greedy_sensitivity_lb, bound_randgreedy_lb,
                          worst_case_sensitivity)
from .distsim import DistTrace, MpcConfig, barbosa_framework, greedi

__version__ = "0.1.0"

__all__ = [
    "FunctionSpec", "GroundSet", "StructureReport", "ValueOracle",
    "build_function", "check_monotone_submodular", "curvature", "family_names",
    "ids_of", "marginal", "mask_of", "restrict", "shipped_default_specs",
    "DecisionRule", "OrdinalSchedule", "RunTrace", "StepRecord",
    "deterministic_greedy", "derive_rng", "greedy_rule",
    "independent_sequential", "proportional_greedy_rule",
    "randomized_greedy_rule", "run_sequential",
    "OutputDistribution", "SelectionProfile", "exact_output_distribution",
    "sampled_output_distribution", "selection_profile",
    "TransportPlan", "emd", "inclusion_probability_lower_bound",
    "sym_diff_cost", "tv_distance",
    "SensitivityReport", "attach_bounds", "average_sensitivity", "bound_pA_pB",
    "bound_prop_greedy_approx", "bound_prop_greedy_sensitivity",
    "bound_prop_greedy_sensitivity_lb", "bound_randgreedy_lb",
    "worst_case_sensitivity",
    "DistTrace", "MpcConfig", "barbosa_framework", "greedi",
]
