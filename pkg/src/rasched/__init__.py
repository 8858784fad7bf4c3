"""Restricted-assignment makespan scheduling with certified lower bounds."""

from .rational import Frac, frac, ratio_str, BACKEND
from .model import (Instance, ScaledInstance, Schedule, JobClass,
                    classify_job, rounded_sizes, machine_load,
                    validate_partial_schedule, parse_instance,
                    serialize_instance, make_instance, scale_instance)
from .seed import seed_small_medium, SeedInfeasible
from .engine import InsertionEngine, insert_huge_job, StuckState, layer_cap
from .certificate import (build_dual_certificate, verify_certificate,
                          config_lp_lower_bound, DualCertificate)
from .oracle import (exact_optimal_makespan, exact_config_lp_feasible,
                     knapsack_max_value, KnapsackQuery)
from .generator import GenSpec, generate_instance
from .driver import solve, SolveReport

__version__ = "0.1.0"
