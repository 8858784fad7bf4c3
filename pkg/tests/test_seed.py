import random

import pytest

from rasched.rational import Frac, ZERO
from rasched.model import scale_instance, validate_partial_schedule
from rasched.seed import (FractionalAssignment, SeedInfeasible,
                          solve_assignment_lp, eliminate_support_cycles,
                          round_forest, seed_small_medium, _support_cycle)
from rasched.generator import GenSpec, generate_instance
from rasched.oracle import exact_config_lp_feasible

from conftest import EPS, scaled_of


class TestAssignmentLP:
    def test_forced_assignment(self):
        sc = scaled_of([(Frac(1, 2), {1})], 1)
        fa = solve_assignment_lp(sc)
        assert fa.entries == {(1, 1): 1}

    def test_two_two_thirds_on_one_machine_infeasible(self):
        sc = scaled_of([(Frac(2, 3), {1}), (Frac(2, 3), {1})], 1)
        with pytest.raises(SeedInfeasible):
            solve_assignment_lp(sc)

    def test_huge_jobs_do_not_participate(self):
        sc = scaled_of([(Frac(9, 10), {1}), (Frac(1, 3), {1})], 1)
        fa = solve_assignment_lp(sc)
        assert fa.jobs == [1] and sc.is_small(1)

    @pytest.mark.parametrize("seed", range(12))
    def test_feasible_solutions_satisfy_both_row_families(self, seed):
        inst = generate_instance(GenSpec(machines=3, jobs=6, seed=seed,
                                         density=Frac(2, 3)))
        guess = inst.total_size() / 2
        sc = scale_instance(inst, guess, EPS)
        try:
            fa = solve_assignment_lp(sc)
        except SeedInfeasible:
            # soundness: the covering relaxation must also fail at this guess
            assert not exact_config_lp_feasible(inst, guess)
            return
        for j in fa.jobs:
            assert fa.job_sum(j) == 1
        for i in sc.base.machines:
            assert fa.machine_load(sc, i) <= 1
        for (j, i), v in fa.entries.items():
            assert 0 < v <= 1 and i in sc.base.gamma[j]

    def test_support_is_forest(self):
        for seed in range(8):
            inst = generate_instance(GenSpec(machines=4, jobs=9, seed=seed))
            sc = scale_instance(inst, inst.total_size(), EPS)
            fa = solve_assignment_lp(sc)
            assert _support_cycle(fa.entries) is None
            assert len(fa.entries) <= len(fa.jobs) + sc.base.num_machines


class TestCycleElimination:
    def test_hand_built_cycle_is_cancelled_load_preservingly(self):
        # two jobs split across two machines in a 4-cycle
        sc = scaled_of([(Frac(1, 3), {1, 2}), (Frac(1, 4), {1, 2})], 2)
        fa = FractionalAssignment({(1, 1): Frac(1, 2), (1, 2): Frac(1, 2),
                                   (2, 1): Frac(1, 2), (2, 2): Frac(1, 2)},
                                  [1, 2])
        loads = {i: fa.machine_load(sc, i) for i in (1, 2)}
        cancelled = eliminate_support_cycles(fa, sc)
        assert cancelled == 1
        assert _support_cycle(fa.entries) is None
        for j in (1, 2):
            assert fa.job_sum(j) == 1
        for i in (1, 2):
            assert fa.machine_load(sc, i) == loads[i]

    def test_forest_input_is_untouched(self):
        sc = scaled_of([(Frac(1, 3), {1, 2})], 2)
        fa = FractionalAssignment({(1, 1): Frac(1, 2), (1, 2): Frac(1, 2)}, [1])
        assert eliminate_support_cycles(fa, sc) == 0
        assert fa.entries == {(1, 1): Frac(1, 2), (1, 2): Frac(1, 2)}


class TestRounding:
    def test_integral_input_identity(self):
        sc = scaled_of([(Frac(1, 2), {1, 2}), (Frac(1, 3), {2})], 2)
        fa = FractionalAssignment({(1, 2): Frac(1), (2, 2): Frac(1)}, [1, 2])
        sched = round_forest(fa, sc)
        assert sched.machine_of(1) == 2 and sched.machine_of(2) == 2

    def test_half_half_split_lands_once_with_bound(self):
        # both machines carry integral load 1/2 plus the split job
        sc = scaled_of([(Frac(1, 2), {1}), (Frac(1, 2), {2}),
                        (Frac(1, 2), {1, 2})], 2)
        fa = FractionalAssignment({(1, 1): Frac(1), (2, 2): Frac(1),
                                   (3, 1): Frac(1, 2), (3, 2): Frac(1, 2)},
                                  [1, 2, 3])
        sched = round_forest(fa, sc)
        landing = sched.machine_of(3)
        assert landing in (1, 2)
        assert sched.load(landing) <= fa.machine_load(sc, landing) + sc.size[3] / 2
        assert sched.load(landing) <= 1 + sc.size[3]

    def test_three_job_star_gives_center_at_most_one(self):
        sizes = [Frac(1, 3), Frac(2, 5), Frac(1, 2)]
        sc = scaled_of([(sizes[0], {1, 2}), (sizes[1], {1, 3}), (sizes[2], {1, 4})], 4)
        fa = FractionalAssignment({
            (1, 1): Frac(1, 2), (1, 2): Frac(1, 2),
            (2, 1): Frac(1, 2), (2, 3): Frac(1, 2),
            (3, 1): Frac(1, 2), (3, 4): Frac(1, 2),
        }, [1, 2, 3])
        sched = round_forest(fa, sc)
        assert len(sched.on_machine[1]) <= 1
        assert all(sched.machine_of(j) is not None for j in (1, 2, 3))

    def test_deterministic_tie_break_lowest_child_machine(self):
        # rooted at the lowest machine (1); the job matches its lowest child
        sc = scaled_of([(Frac(1, 2), {1, 2, 3})], 3)
        fa = FractionalAssignment({(1, 1): Frac(1, 3), (1, 2): Frac(1, 3),
                                   (1, 3): Frac(1, 3)}, [1])
        assert round_forest(fa, sc).machine_of(1) == 2


class TestSeedPipeline:
    def test_only_huge_jobs_yields_empty_schedule(self):
        sc = scaled_of([(Frac(9, 10), {1}), (Frac(19, 20), {1})], 1)
        sched = seed_small_medium(sc)
        assert sched.assigned_jobs() == []
        assert validate_partial_schedule(sched) == []

    def test_single_small_job_lands_in_gamma(self):
        sc = scaled_of([(Frac(1, 3), {2})], 3)
        sched = seed_small_medium(sc)
        assert sched.machine_of(1) == 2

    @pytest.mark.parametrize("seed", range(20))
    def test_seed_bound_and_validity(self, seed):
        rng = random.Random(seed)
        inst = generate_instance(GenSpec(machines=rng.randint(2, 4),
                                         jobs=rng.randint(3, 9),
                                         preset=("uniform", "huge_heavy")[seed % 2],
                                         density=Frac(2, 3), seed=seed))
        guess = inst.max_size() * Frac(rng.randint(100, 160), 100)
        sc = scale_instance(inst, guess, EPS)
        try:
            sched = seed_small_medium(sc)
        except SeedInfeasible:
            assert not exact_config_lp_feasible(inst, guess)
            return
        p_max = max((sc.size[j] for j in sc.base.jobs if not sc.is_huge(j)),
                    default=ZERO)
        for i in sc.base.machines:
            assert sched.load(i) <= 1 + p_max <= Frac(11, 6)
        for j in sc.base.jobs:
            if sc.is_huge(j):
                assert sched.machine_of(j) is None
            else:
                assert sched.machine_of(j) in sc.base.gamma[j]
        assert validate_partial_schedule(sched) == []
