"""End-to-end pipeline: binary search over the guess, seeding, insertions.

Each probe either produces a schedule of makespan <= (1+R) * T or a certified
reason the guess is too small (seed LP infeasible, or a stuck search whose
dual certificate is verified on the spot). The bracket shrinks until
high/low <= 1 + tau; the reported schedule comes from the lowest successful
probe, and reports serialize byte-identically for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rational import Frac, ZERO, frac, ratio_str, as_float
from .model import (Instance, Schedule, scale_instance,
                    validate_partial_schedule, UNASSIGNED)
from .seed import SeedInfeasible, seed_small_medium
from .engine import InsertionEngine, StuckState, EngineInvariantError
from .certificate import (DualCertificate, build_dual_certificate,
                          verify_certificate, check_bs_s_machine_counts,
                          check_covered_machine_margin, check_big_job_value_bound,
                          certificate_to_text, config_lp_lower_bound,
                          CertificateError)
from .oracle import exact_optimal_makespan, MAKESPAN_JOB_CAP


@dataclass
class RunLog:
    """Event log and final tree snapshot of one insertion run."""

    guess: object
    j_new: int
    outcome: str  # "assigned" | "stuck"
    events: list
    snapshot: list  # blocker dicts of the final tree


@dataclass
class ProbeResult:
    guess: object
    outcome: str  # "success" | "seed-infeasible" | "stuck"
    schedule: Schedule | None = None
    certificate: DualCertificate | None = None
    stuck_reason: str | None = None


@dataclass
class SolveReport:
    instance: Instance
    epsilon: object
    tau: object
    assignment: dict  # original job name -> machine id
    makespan: object
    guess_final: object
    lower_bound: object
    lower_bound_kind: str
    ratio_bound: object
    iterations: dict
    probes: list  # (guess, outcome) in probe order
    certificates: list  # (guess, DualCertificate)
    run_logs: list = field(default_factory=list)

    def to_text(self) -> str:
        inst = self.instance
        lines = [
            "ra-report 1",
            f"machines {inst.num_machines}",
            f"jobs {inst.num_jobs}",
            f"epsilon {ratio_str(self.epsilon)}",
            f"tau {ratio_str(self.tau)}",
            f"makespan {ratio_str(self.makespan)} ~{as_float(self.makespan):.6f}",
            f"guess-final {ratio_str(self.guess_final)}",
            f"lower-bound {ratio_str(self.lower_bound)} kind={self.lower_bound_kind}",
            f"ratio-bound {ratio_str(self.ratio_bound)} ~{as_float(self.ratio_bound):.6f}",
        ]
        for phase in sorted(self.iterations):
            lines.append(f"iterations {phase} {self.iterations[phase]}")
        for guess, outcome in self.probes:
            lines.append(f"probe {ratio_str(guess)} {outcome}")
        for name in inst.names:
            lines.append(f"assign {name} {self.assignment[name]}")
        for guess, cert in self.certificates:
            lines.append(f"certificate-at {ratio_str(guess)}")
            body = certificate_to_text(cert, inst).rstrip("\n")
            lines.extend("  " + ln for ln in body.splitlines())
        return "\n".join(lines) + "\n"


def _probe(inst: Instance, guess, epsilon, *, audit, log_events, run_logs,
           counters) -> ProbeResult:
    scaled = scale_instance(inst, guess, epsilon)
    counters["seed_lps"] = counters.get("seed_lps", 0) + 1
    try:
        schedule = seed_small_medium(scaled)
    except SeedInfeasible:
        return ProbeResult(guess, "seed-infeasible")
    huge = sorted(scaled.huge_jobs(), reverse=True)  # decreasing size, det. ties
    for j_new in huge:
        engine = InsertionEngine(schedule, j_new, audit=audit, log_events=log_events)
        result = engine.run()
        counters["engine_iterations"] = counters.get("engine_iterations", 0) + engine.iterations
        counters["engine_moves"] = counters.get("engine_moves", 0) + engine.moves
        counters["engine_adds"] = counters.get("engine_adds", 0) + engine.adds
        counters["signature_checkpoints"] = (
            counters.get("signature_checkpoints", 0) + len(engine.checkpoints)
        )
        counters["signature_dips"] = (
            counters.get("signature_dips", 0) + len(engine.signature_dips)
        )
        if log_events:
            run_logs.append(RunLog(
                guess=guess, j_new=j_new,
                outcome="stuck" if isinstance(result, StuckState) else "assigned",
                events=engine.events,
                snapshot=_tree_snapshot(engine),
            ))
        if isinstance(result, StuckState):
            counters["stuck_events"] = counters.get("stuck_events", 0) + 1
            cert = build_dual_certificate(result)
            if not verify_certificate(cert, scaled):
                raise CertificateError(
                    f"stuck-state certificate failed to verify at guess {ratio_str(guess)}"
                )
            ok_counts, _ = check_bs_s_machine_counts(result)
            counters["bs_s_checks"] = counters.get("bs_s_checks", 0) + 1
            if not ok_counts:
                raise EngineInvariantError("per-layer BS/S machine count balance broke")
            if audit:
                bad = (check_covered_machine_margin(result, cert)
                       + check_big_job_value_bound(result, cert))
                if bad:
                    raise EngineInvariantError("; ".join(bad))
            return ProbeResult(guess, "stuck", certificate=cert,
                               stuck_reason=result.reason)
        schedule = result
    bad = validate_partial_schedule(schedule)
    if bad:
        raise EngineInvariantError("; ".join(bad))
    return ProbeResult(guess, "success", schedule=schedule)


def _tree_snapshot(engine: InsertionEngine) -> list:
    out = []
    for b in engine.tree.blockers():
        out.append({
            "job": b.job, "machine": b.machine, "type": b.btype.value,
            "layer": b.layer, "sublayer": b.sublayer, "stamp": b.stamp,
            "parent_stamp": b.parent.stamp if b.parent else None,
        })
    return out


def solve(inst: Instance, epsilon=Frac(1, 24), tau=Frac(1, 100), *,
          audit: bool = False, log_events: bool = False,
          lp_bound: bool = False, use_oracle: bool = False) -> SolveReport:
    """Binary search for a (1+R)-factor schedule with certified lower bounds."""
    epsilon, tau = frac(epsilon), frac(tau)
    if not (0 < epsilon < Frac(1, 12)):
        raise ValueError("epsilon must lie strictly between 0 and 1/12")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if inst.num_jobs == 0:
        return SolveReport(inst, epsilon, tau, {}, ZERO, ZERO, ZERO,
                           "empty-instance", Frac(1), {}, [], [])

    counters: dict = {}
    run_logs: list = []
    probes: list = []
    certificates: list = []

    lo = inst.max_size()
    lower_kind = "max-job-size"
    hi = inst.total_size()

    first = _probe(inst, hi, epsilon, audit=audit, log_events=log_events,
                   run_logs=run_logs, counters=counters)
    probes.append((hi, first.outcome))
    if first.outcome != "success":
        raise EngineInvariantError(
            "the probe at the total size cannot fail on a feasible instance"
        )
    best_guess, best_schedule = hi, first.schedule

    while hi > lo * (1 + tau):
        mid = (lo + hi) / 2
        res = _probe(inst, mid, epsilon, audit=audit, log_events=log_events,
                     run_logs=run_logs, counters=counters)
        probes.append((mid, res.outcome))
        if res.outcome == "success":
            hi = mid
            best_guess, best_schedule = mid, res.schedule
        elif res.outcome == "seed-infeasible":
            lo, lower_kind = mid, "seed-lp-infeasible"
        else:
            certificates.append((mid, res.certificate))
            lo, lower_kind = mid, "stuck-certificate"
    counters["probes"] = len(probes)

    lower = lo
    if lp_bound:
        bound = config_lp_lower_bound(inst, tau)
        counters["lp_bound_probes"] = bound.probes
        if bound.lower > lower:
            lower, lower_kind = bound.lower, "config-lp"
    if use_oracle and inst.num_jobs <= MAKESPAN_JOB_CAP:
        opt = exact_optimal_makespan(inst)
        if opt > lower:
            lower, lower_kind = opt, "oracle-optimum"

    assignment = {}
    makespan = ZERO
    loads = {i: ZERO for i in inst.machines}
    for j in inst.jobs:
        i = best_schedule.machine_of(j)
        if i is UNASSIGNED:
            raise EngineInvariantError(f"job {j} left unassigned by a successful probe")
        assignment[inst.name_of(j)] = i
        loads[i] += inst.sizes[j]
    makespan = max(loads.values())
    scaled_cap = best_schedule.scaled.load_cap
    if makespan > scaled_cap * best_guess:
        raise EngineInvariantError("final makespan exceeds the probe guarantee")

    return SolveReport(
        instance=inst, epsilon=epsilon, tau=tau, assignment=assignment,
        makespan=makespan, guess_final=best_guess, lower_bound=lower,
        lower_bound_kind=lower_kind, ratio_bound=makespan / lower,
        iterations=counters, probes=probes, certificates=certificates,
        run_logs=run_logs,
    )
