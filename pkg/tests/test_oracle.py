import itertools
import random

import pytest

from rasched.rational import Frac, ZERO
from rasched.model import make_instance
from rasched.oracle import (KnapsackQuery, knapsack_max_value,
                            exact_optimal_makespan, exact_config_lp_feasible,
                            enumerate_configurations, CapExceededError)
from rasched.seed import solve_assignment_lp
from rasched.model import scale_instance
from rasched.generator import GenSpec, generate_instance

from conftest import EPS


def brute_knapsack(items, capacity):
    best = ZERO
    for r in range(len(items) + 1):
        for combo in itertools.combinations(range(len(items)), r):
            w = sum((items[k][0] for k in combo), ZERO)
            if w <= capacity:
                v = sum((items[k][1] for k in combo), ZERO)
                best = max(best, v)
    return best


def brute_makespan(inst):
    best = None
    choices = [sorted(inst.gamma[j]) for j in inst.jobs]
    for combo in itertools.product(*choices):
        loads = {}
        for j, i in zip(inst.jobs, combo):
            loads[i] = loads.get(i, ZERO) + inst.sizes[j]
        worst = max(loads.values())
        best = worst if best is None or worst < best else best
    return best


class TestKnapsack:
    def test_degenerate_capacity_zero(self):
        q = KnapsackQuery(((Frac(1, 2), Frac(3)),), Frac(0))
        assert knapsack_max_value(q) == (ZERO, ())

    def test_three_halves(self):
        q = KnapsackQuery(((Frac(1, 2), Frac(3)), (Frac(1, 2), Frac(4)),
                           (Frac(1, 2), Frac(5))), Frac(1))
        value, subset = knapsack_max_value(q)
        assert value == 9 and subset == (1, 2)

    def test_single_item_too_heavy(self):
        q = KnapsackQuery(((Frac(3), Frac(10)),), Frac(2))
        assert knapsack_max_value(q) == (ZERO, ())

    def test_cap_enforced(self):
        items = tuple((Frac(1), Frac(1)) for _ in range(31))
        with pytest.raises(CapExceededError):
            knapsack_max_value(KnapsackQuery(items, Frac(1)))

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_enumeration(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 12)
        items = tuple((Frac(rng.randint(1, 30), 30), Frac(rng.randint(0, 20), 7))
                      for _ in range(n))
        cap = Frac(rng.randint(1, 45), 30)
        value, subset = knapsack_max_value(KnapsackQuery(items, cap))
        assert value == brute_knapsack(items, cap)
        assert sum((items[k][0] for k in subset), ZERO) <= cap
        assert sum((items[k][1] for k in subset), ZERO) == value


class TestMakespan:
    def test_single_job(self):
        inst = make_instance(1, [(Frac(7, 5), {1})])
        assert exact_optimal_makespan(inst) == Frac(7, 5)

    def test_two_unit_jobs_split(self):
        inst = make_instance(2, [(Frac(1), {1, 2}), (Frac(1), {1, 2})])
        assert exact_optimal_makespan(inst) == 1

    def test_cap_enforced(self):
        inst = make_instance(1, [(Frac(1), {1})] * 13)
        with pytest.raises(CapExceededError):
            exact_optimal_makespan(inst)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_full_enumeration(self, seed):
        inst = generate_instance(GenSpec(machines=3, jobs=8, seed=seed,
                                         density=Frac(2, 3)))
        assert exact_optimal_makespan(inst) == brute_makespan(inst)


class TestConfigLP:
    def test_single_machine_needs_total(self):
        inst = make_instance(1, [(Frac(3, 4), {1}), (Frac(1), {1})])
        assert not exact_config_lp_feasible(inst, Frac(7, 4) - Frac(1, 100))
        assert exact_config_lp_feasible(inst, Frac(7, 4))

    def test_two_machines_two_units(self):
        inst = make_instance(2, [(Frac(1), {1, 2}), (Frac(1), {1, 2})])
        assert exact_config_lp_feasible(inst, 1)
        assert not exact_config_lp_feasible(inst, Frac(99, 100))

    def test_uncoverable_job_infeasible(self):
        inst = make_instance(2, [(Frac(1), {1}), (Frac(1, 3), {2})])
        assert not exact_config_lp_feasible(inst, Frac(9, 10))

    def test_relaxations_order_on_private_halves_instance(self):
        # private half jobs plus a shared unit job: the assignment LP over all
        # three jobs is feasible strictly below the integral optimum 3/2,
        # while the covering LP threshold coincides with the optimum.
        inst = make_instance(2, [(Frac(1, 2), {1}), (Frac(1, 2), {2}),
                                 (Frac(1), {1, 2})])
        assert exact_optimal_makespan(inst) == Frac(3, 2)
        assert not exact_config_lp_feasible(inst, Frac(3, 2) - Frac(1, 60))
        assert exact_config_lp_feasible(inst, Frac(3, 2))
        # the job-splitting relaxation is feasible at T=13/10 < 3/2 (the unit
        # job is medium at that scale and may split across both machines)
        sc = scale_instance(inst, Frac(13, 10), EPS)
        fa = solve_assignment_lp(sc)
        assert fa.job_sum(3) == 1
        assert not exact_config_lp_feasible(inst, Frac(13, 10))

    def test_integral_optimum_is_lp_feasible(self):
        for seed in range(8):
            inst = generate_instance(GenSpec(machines=3, jobs=7, seed=seed))
            assert exact_config_lp_feasible(inst, exact_optimal_makespan(inst))

    @pytest.mark.parametrize("seed", range(8))
    def test_maximal_equals_all_enumeration(self, seed):
        inst = generate_instance(GenSpec(machines=2, jobs=6, seed=seed,
                                         preset="huge_heavy"))
        for T in (inst.max_size(), (inst.max_size() + inst.total_size()) / 2,
                  inst.total_size()):
            assert (exact_config_lp_feasible(inst, T, configs="maximal")
                    == exact_config_lp_feasible(inst, T, configs="all"))

    @pytest.mark.parametrize("seed", range(6))
    def test_feasibility_monotone_in_threshold(self, seed):
        inst = generate_instance(GenSpec(machines=3, jobs=6, seed=seed,
                                         preset="collision"))
        lo, hi = inst.max_size(), inst.total_size()
        grid = [lo + (hi - lo) * Frac(k, 6) for k in range(7)]
        flags = [exact_config_lp_feasible(inst, T) for T in grid]
        assert flags == sorted(flags)  # False... then True...

    def test_maximal_configurations_subset_of_all(self):
        inst = make_instance(1, [(Frac(1, 3), {1}), (Frac(1, 2), {1}),
                                 (Frac(2, 3), {1})])
        allc = set(enumerate_configurations(inst, 1, Frac(5, 6)))
        maxc = set(enumerate_configurations(inst, 1, Frac(5, 6), maximal_only=True))
        assert maxc <= allc
        for c in allc:
            assert any(c <= m for m in maxc)

    def test_job_cap_enforced(self):
        inst = make_instance(1, [(Frac(1, 2), {1})] * 16)
        with pytest.raises(CapExceededError):
            exact_config_lp_feasible(inst, 10)
