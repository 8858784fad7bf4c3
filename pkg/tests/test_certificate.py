import pytest

from rasched.rational import Frac, ZERO
from rasched.model import parse_instance, make_instance, scale_instance
from rasched.engine import BlockerType, StuckState, insert_huge_job
from rasched.seed import seed_small_medium
from rasched.certificate import (build_dual_certificate, verify_objective_negative,
                                 verify_dual_feasibility, verify_certificate,
                                 check_bs_s_machine_counts,
                                 check_covered_machine_margin,
                                 check_big_job_value_bound,
                                 certificate_to_text, certificate_from_text,
                                 recheck_certificate, config_lp_feasible_cg,
                                 config_lp_lower_bound)
from rasched.oracle import exact_config_lp_feasible
from rasched.generator import GenSpec, generate_instance

from conftest import EPS, scaled_of, schedule_of

DELTA = 1 - EPS  # 23/24

# engine-produced stuck state with BB, BS and S blockers alive (frozen run)
RICH_TEXT = """ra 1
machines 3
job j1 3/20 : 1
job j2 1/1 : 2 3
job j3 1/5 : 2 3
job j4 4/5 : 3
job j5 23/60 : 1 2
job j6 1/10 : 1
job j7 17/20 : 2
job j8 1/1 : 3
job j9 59/60 : 1 3
"""
RICH_GUESS = Frac(26, 25)


def three_smalls_stuck():
    sc = scaled_of([(Frac(7, 20), {1}), (Frac(7, 20), {1}), (Frac(7, 20), {1}),
                    (Frac(9, 10), {1})], 1)
    sched = schedule_of(sc, {1: 1, 2: 1, 3: 1})
    result, _ = insert_huge_job(sched, 4, audit=True)
    assert isinstance(result, StuckState)
    return result, sc


def rich_stuck():
    inst = parse_instance(RICH_TEXT)
    sc = scale_instance(inst, RICH_GUESS, EPS)
    sched = seed_small_medium(sc)
    for j in sorted(sc.huge_jobs(), reverse=True):
        result, _ = insert_huge_job(sched, j, audit=True)
        if isinstance(result, StuckState):
            return result, sc
    pytest.fail("frozen fixture no longer reaches a stuck state")


class TestBuild:
    def test_new_job_value_and_inactives(self):
        stuck, sc = three_smalls_stuck()
        cert = build_dual_certificate(stuck)
        assert cert.K == 48 and cert.delta == DELTA
        assert cert.z[4] == DELTA * Frac(5, 6) == Frac(115, 144)
        for j in (1, 2, 3):  # trivially blocked smalls at layer 1
            assert cert.z[j] == DELTA * Frac(7, 20) == Frac(161, 480)
        assert cert.w[1] == sum((cert.z[j] for j in (1, 2, 3)), ZERO)
        assert cert.y[1] == DELTA ** 48 + cert.w[1]

    def test_inactive_job_gets_zero(self):
        stuck, sc = rich_stuck()
        cert = build_dual_certificate(stuck)
        unassigned_huge = [j for j in sc.base.jobs
                           if stuck.schedule.machine_of(j) is None and j != stuck.engine.j_new]
        assert unassigned_huge and all(cert.z[j] == 0 for j in unassigned_huge)

    def test_w_corrections_on_bs_and_s_machines(self):
        stuck, sc = rich_stuck()
        eng = stuck.engine
        types = {b.btype for b in eng.tree.blockers()}
        assert {BlockerType.BB, BlockerType.BS, BlockerType.S} <= types
        cert = build_dual_certificate(stuck)
        for b in eng.tree.blockers():
            base = sum((cert.z[j] for j in eng.active_on(b.machine)), ZERO)
            if b.btype is BlockerType.BS:
                assert cert.w[b.machine] == base + DELTA ** b.layer / 6
            elif b.btype is BlockerType.S:
                assert cert.w[b.machine] == base - DELTA ** b.layer / 6
        plain = [i for i in sc.base.machines
                 if all(b.machine != i or b.btype not in (BlockerType.BS, BlockerType.S)
                        for b in eng.tree.blockers())]
        for i in plain:
            assert cert.w[i] == sum((cert.z[j] for j in eng.active_on(i)), ZERO)


class TestVerify:
    def test_three_smalls_certificate_verifies(self):
        stuck, sc = three_smalls_stuck()
        cert = build_dual_certificate(stuck)
        assert verify_objective_negative(cert)
        ok, witnesses = verify_dual_feasibility(cert, sc)
        assert ok and witnesses == []
        assert len(cert.transcript) == 1 + sc.base.num_machines

    def test_rich_certificate_verifies(self):
        stuck, sc = rich_stuck()
        cert = build_dual_certificate(stuck)
        assert verify_certificate(cert, sc)

    def test_scaling_homogeneity(self):
        stuck, sc = rich_stuck()
        cert = build_dual_certificate(stuck)
        for alpha in (Frac(3, 2), Frac(1, 7), Frac(12)):
            scaled_cert = cert.scaled_copy(alpha)
            assert verify_objective_negative(scaled_cert)
            assert verify_dual_feasibility(scaled_cert, sc)[0]

    def test_corrupted_z_is_caught_with_witness(self):
        stuck, sc = three_smalls_stuck()
        cert = build_dual_certificate(stuck)
        cert.z[4] *= 2
        ok, witnesses = verify_dual_feasibility(cert, sc)
        assert not ok
        machine, config, value, bound = witnesses[0]
        assert machine == 1 and 4 in config and value > bound

    def test_claim_checks_on_stuck_states(self):
        for stuck, sc in (three_smalls_stuck(), rich_stuck()):
            cert = build_dual_certificate(stuck)
            ok, counts = check_bs_s_machine_counts(stuck)
            assert ok
            assert check_covered_machine_margin(stuck, cert) == []
            assert check_big_job_value_bound(stuck, cert) == []

    def test_rich_counts_include_balanced_layer(self):
        stuck, _ = rich_stuck()
        _, counts = check_bs_s_machine_counts(stuck)
        assert counts == {1: (1, 1)}


class TestSerialization:
    def test_round_trip_and_recheck(self):
        stuck, sc = rich_stuck()
        cert = build_dual_certificate(stuck)
        verify_certificate(cert, sc)
        inst = sc.base
        text = certificate_to_text(cert, inst)
        again = certificate_from_text(text, inst)
        assert again.z == cert.z and again.y == cert.y
        assert again.K == cert.K and again.guess == cert.guess
        assert recheck_certificate(again, inst)
        assert certificate_to_text(again, inst).splitlines()[:6] == text.splitlines()[:6]

    def test_tampered_text_fails_recheck(self):
        stuck, sc = three_smalls_stuck()
        cert = build_dual_certificate(stuck)
        inst = sc.base
        text = certificate_to_text(cert, inst)
        tampered = text.replace("guess 1/1", "guess 2/1")
        again = certificate_from_text(tampered, inst)
        assert not recheck_certificate(again, inst)


class TestConfigLPBounds:
    def test_single_machine_exact_total(self):
        inst = make_instance(1, [(Frac(3, 4), {1}), (Frac(1), {1})])
        bound = config_lp_lower_bound(inst, Frac(1, 100))
        assert bound.lower <= Frac(7, 4) <= bound.upper
        assert bound.upper <= bound.lower * Frac(101, 100)
        assert exact_config_lp_feasible(inst, bound.upper)
        if bound.lower_certified:
            assert not exact_config_lp_feasible(inst, bound.lower)

    def test_perfect_split_found_at_trivial_bound(self):
        inst = make_instance(2, [(Frac(1), {1, 2}), (Frac(1), {1, 2})])
        bound = config_lp_lower_bound(inst, Frac(1, 100))
        assert bound.lower == bound.upper == 1
        assert not bound.lower_certified  # the trivial bound is already tight

    def test_feasible_run_produces_covering_weights(self):
        inst = make_instance(2, [(Frac(1, 2), {1}), (Frac(1, 2), {2}), (Frac(1), {1, 2})])
        run = config_lp_feasible_cg(inst, Frac(3, 2))
        assert run.status == "feasible"
        cover = {j: ZERO for j in inst.jobs}
        used = {i: ZERO for i in inst.machines}
        for (i, conf), wgt in run.weights.items():
            assert wgt > 0
            assert sum((inst.sizes[j] for j in conf), ZERO) <= Frac(3, 2)
            used[i] += wgt
            for j in conf:
                assert i in inst.gamma[j]
                cover[j] += wgt
        assert all(v <= 1 for v in used.values())
        assert all(cover[j] >= 1 for j in inst.jobs)

    def test_infeasible_run_produces_knapsack_checked_ray(self):
        from rasched.oracle import KnapsackQuery, knapsack_max_value
        inst = make_instance(2, [(Frac(1, 2), {1}), (Frac(1, 2), {2}), (Frac(1), {1, 2})])
        T = Frac(13, 10)
        run = config_lp_feasible_cg(inst, T)
        assert run.status == "infeasible"
        assert sum(run.dual_z.values(), ZERO) > sum(run.dual_y.values(), ZERO)
        for i in inst.machines:
            items = [(inst.sizes[j], run.dual_z[j]) for j in inst.jobs
                     if i in inst.gamma[j] and inst.sizes[j] <= T and run.dual_z[j] > 0]
            best = knapsack_max_value(KnapsackQuery(tuple(items), T))[0] if items else ZERO
            assert best <= run.dual_y[i]

    @pytest.mark.parametrize("seed", range(6))
    def test_bracket_contains_enumeration_threshold(self, seed):
        inst = generate_instance(GenSpec(machines=2, jobs=5, seed=seed,
                                         preset="collision"))
        bound = config_lp_lower_bound(inst, Frac(1, 50))
        assert exact_config_lp_feasible(inst, bound.upper)
        if bound.lower_certified:
            assert not exact_config_lp_feasible(inst, bound.lower)
        assert bound.upper <= bound.lower * Frac(51, 50)

    def test_agreement_with_stuck_guesses(self):
        stuck, sc = rich_stuck()
        assert not exact_config_lp_feasible(sc.base, sc.guess)
        run = config_lp_feasible_cg(sc.base, sc.guess)
        assert run.status == "infeasible"
