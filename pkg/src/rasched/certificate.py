"""Dual certificates of infeasibility and configuration-LP bounds.

A stuck search state yields an exact dual assignment (z per job, y per
machine) whose objective gap and per-machine knapsack feasibility are
machine-checkable: together they certify that no fractional schedule of
makespan 1 (scaled) exists, i.e. the probed guess is below the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rational import Frac, ZERO, frac, parse_ratio, ratio_str
from .model import Instance, ScaledInstance, scale_instance
from .engine import BlockerType, StuckState, ALL_UNDESIRABLE
from .oracle import KnapsackQuery, knapsack_max_value
from .simplex import simplex_min


class CertificateError(RuntimeError):
    """A certificate that was required to verify did not."""


@dataclass
class DualCertificate:
    guess: object
    epsilon: object
    delta: object  # 1 - epsilon
    K: int
    num_machines: int
    z: dict  # internal job id -> nonnegative rational (0 for inactive jobs)
    y: dict  # machine id -> rational
    w: dict  # machine id -> rational
    transcript: list = field(default_factory=list)

    def z_total(self):
        return sum(self.z.values(), ZERO)

    def y_total(self):
        return sum(self.y.values(), ZERO)

    def scaled_copy(self, alpha) -> "DualCertificate":
        alpha = frac(alpha)
        return DualCertificate(
            guess=self.guess, epsilon=self.epsilon, delta=self.delta, K=self.K,
            num_machines=self.num_machines,
            z={j: v * alpha for j, v in self.z.items()},
            y={i: v * alpha for i, v in self.y.items()},
            w={i: v * alpha for i, v in self.w.items()},
        )


def minimal_value_layer(engine, j) -> int:
    """Smallest layer at which the active job j qualifies: its head layer or
    the first prefix that blocks it (small jobs); 1 for the inserted job."""
    if j == engine.j_new:
        return 1
    options = []
    parent = engine.activator_of(j)
    if parent is not None:
        options.append(engine.head_layer_from(parent, j))
    if engine.scaled.is_small(j) and j in engine.blocked_small_jobs():
        blocked_at = engine.min_blocked_layer(j)
        if blocked_at is not None:
            options.append(blocked_at)
    if not options:
        raise CertificateError(f"job {j} is not active")
    return min(options)


def build_dual_certificate(stuck: StuckState) -> DualCertificate:
    """Populate (z, y, w) from the final tree per the stuck-state construction."""
    engine = stuck.engine
    sc = engine.scaled
    delta = 1 - sc.epsilon
    K = engine.K
    active = engine.active_jobs()

    z = {j: ZERO for j in sc.base.jobs}
    for j in active:
        k = minimal_value_layer(engine, j)
        z[j] = delta ** k * sc.size_down(j)

    # Unique layer per machine among the all-undesirable blockers.
    bs_layer, s_layer = {}, {}
    for b in engine.tree.blockers():
        if b.btype is BlockerType.BS:
            bs_layer[b.machine] = b.layer
        elif b.btype is BlockerType.S:
            s_layer[b.machine] = b.layer

    w, y = {}, {}
    sixth = Frac(1, 6)
    for i in sc.base.machines:
        base = sum((z[j] for j in engine.active_on(i)), ZERO)
        if i in bs_layer:
            w[i] = base + delta ** bs_layer[i] * sixth
        elif i in s_layer:
            w[i] = base - delta ** s_layer[i] * sixth
        else:
            w[i] = base
        y[i] = delta ** K + w[i]
    return DualCertificate(
        guess=sc.guess, epsilon=sc.epsilon, delta=delta, K=K,
        num_machines=sc.base.num_machines, z=z, y=y, w=w,
    )


def verify_objective_negative(cert: DualCertificate) -> bool:
    """Exact check that sum(z) exceeds sum(y); both sides go to the transcript."""
    zs, ys = cert.z_total(), cert.y_total()
    ok = zs > ys
    cert.transcript.append(
        f"objective z_total={ratio_str(zs)} y_total={ratio_str(ys)} "
        f"{'PASS' if ok else 'FAIL'}"
    )
    return ok


def verify_dual_feasibility(cert: DualCertificate, scaled: ScaledInstance):
    """For every machine, maximize z over permitted configurations of size <= 1
    by exact knapsack and compare with y. Returns (ok, witnesses)."""
    witnesses = []
    ok = True
    for i in scaled.base.machines:
        jobs = [j for j in scaled.base.jobs
                if i in scaled.base.gamma[j] and cert.z[j] > 0 and scaled.size[j] <= 1]
        if jobs:
            value, subset = knapsack_max_value(
                KnapsackQuery(tuple((scaled.size[j], cert.z[j]) for j in jobs), Frac(1))
            )
            config = tuple(jobs[t] for t in subset)
        else:
            value, config = ZERO, ()
        passed = value <= cert.y[i]
        cert.transcript.append(
            f"machine {i} max-config z={ratio_str(value)} y={ratio_str(cert.y[i])} "
            f"{'PASS' if passed else 'FAIL'}"
        )
        if not passed:
            ok = False
            witnesses.append((i, config, value, cert.y[i]))
    return ok, witnesses


def verify_certificate(cert: DualCertificate, scaled: ScaledInstance) -> bool:
    ok1 = verify_objective_negative(cert)
    ok2, _ = verify_dual_feasibility(cert, scaled)
    return ok1 and ok2


def check_bs_s_machine_counts(stuck: StuckState):
    """Per layer, machines holding BS blockers never outnumber machines
    holding S blockers. Returns (ok, per-layer counts)."""
    per_layer = {}
    for b in stuck.engine.tree.blockers():
        if b.btype in (BlockerType.BS, BlockerType.S):
            entry = per_layer.setdefault(b.layer, [set(), set()])
            entry[0 if b.btype is BlockerType.BS else 1].add(b.machine)
    counts = {k: (len(v[0]), len(v[1])) for k, v in per_layer.items()}
    ok = all(bs <= s for bs, s in counts.values())
    return ok, counts


def check_covered_machine_margin(stuck: StuckState, cert: DualCertificate):
    """Audit: on every machine carrying an all-undesirable blocker at layer k,
    w >= z(active_i) + delta^k * (1 - delta * p_down(active_i))."""
    engine = stuck.engine
    sc = engine.scaled
    delta = cert.delta
    violations = []
    for b in engine.tree.blockers():
        if b.btype not in ALL_UNDESIRABLE:
            continue
        i, k = b.machine, b.layer
        active_i = engine.active_on(i)
        z_active = sum((cert.z[j] for j in active_i), ZERO)
        p_down = sum((sc.size_down(j) for j in active_i), ZERO)
        bound = z_active + delta ** k * (1 - delta * p_down)
        if cert.w[i] < bound:
            violations.append(
                f"machine {i} layer {k}: w={ratio_str(cert.w[i])} < bound={ratio_str(bound)}"
            )
    return violations


def check_big_job_value_bound(stuck: StuckState, cert: DualCertificate):
    """Audit: for each big active job j with head layer k and each permitted
    machine i (not all-undesirable within the prefix, sigma(j) != i), the worst
    configuration through i still retains z(active_i^<=k \\ C) >= z_j."""
    engine = stuck.engine
    sc = engine.scaled
    sched = engine.schedule
    violations = []

    bigs = []
    if sc.size[engine.j_new] <= 1:
        bigs.append((engine.j_new, 1))
    for j in sched.assigned_jobs():
        if sc.is_small(j) or sc.size[j] > 1:
            continue
        parent = engine.activator_of(j)
        if parent is not None:
            bigs.append((j, engine.head_layer_from(parent, j)))

    for j, k in bigs:
        covered = engine.covered_machines(prefix=k)
        home = sched.machine_of(j)
        for i in sc.base.gamma[j]:
            if i == home or i in covered:
                continue
            active_prefix = {
                jj for jj in sched.on_machine[i]
                if jj in engine.blocked_small_jobs(prefix=k)
                or any(b.machine == i and b.layer <= k and engine.marks_undesirable(b, jj)
                       for b in engine.tree.blockers())
            }
            z_all = sum((cert.z[jj] for jj in active_prefix), ZERO)
            items = [jj for jj in sorted(active_prefix)
                     if i in sc.base.gamma[jj] and cert.z[jj] > 0
                     and sc.size[jj] <= 1 - sc.size[j]]
            if items:
                overlap, _ = knapsack_max_value(KnapsackQuery(
                    tuple((sc.size[jj], cert.z[jj]) for jj in items),
                    1 - sc.size[j],
                ))
            else:
                overlap = ZERO
            if cert.z[j] > z_all - overlap:
                violations.append(
                    f"job {j} head {k} machine {i}: z_j={ratio_str(cert.z[j])} "
                    f"> retained={ratio_str(z_all - overlap)}"
                )
    return violations


# ---------- serialization ----------

def certificate_to_text(cert: DualCertificate, inst: Instance) -> str:
    lines = [
        "ra-certificate 1",
        f"guess {ratio_str(cert.guess)}",
        f"epsilon {ratio_str(cert.epsilon)}",
        f"delta {ratio_str(cert.delta)}",
        f"K {cert.K}",
        f"machines {cert.num_machines}",
    ]
    for orig in range(len(inst.names)):
        j = inst.internal_of[orig]
        lines.append(f"z {inst.names[orig]} {ratio_str(cert.z[j])}")
    for i in range(1, cert.num_machines + 1):
        lines.append(f"y {i} {ratio_str(cert.y[i])}")
    for entry in cert.transcript:
        lines.append(f"# {entry}")
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str, inst: Instance) -> DualCertificate:
    fields = {}
    z_by_name, y = {}, {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] == "ra-certificate":
            continue
        if toks[0] in ("guess", "epsilon", "delta"):
            fields[toks[0]] = parse_ratio(toks[1])
        elif toks[0] in ("K", "machines"):
            fields[toks[0]] = int(toks[1])
        elif toks[0] == "z":
            z_by_name[toks[1]] = parse_ratio(toks[2])
        elif toks[0] == "y":
            y[int(toks[1])] = parse_ratio(toks[2])
        else:
            raise ValueError(f"unknown certificate line: {line!r}")
    name_to_internal = {
        inst.names[orig]: inst.internal_of[orig] for orig in range(len(inst.names))
    }
    z = {name_to_internal[name]: v for name, v in z_by_name.items()}
    for j in inst.jobs:
        z.setdefault(j, ZERO)
    return DualCertificate(
        guess=fields["guess"], epsilon=fields["epsilon"], delta=fields["delta"],
        K=fields["K"], num_machines=fields["machines"], z=z, y=y, w={},
    )


def recheck_certificate(cert: DualCertificate, inst: Instance) -> bool:
    """Re-verify a deserialized certificate against its instance."""
    scaled = scale_instance(inst, cert.guess, cert.epsilon)
    return verify_certificate(cert, scaled)


# ---------- configuration-LP feasibility and bounds ----------

@dataclass
class ConfigLPRun:
    status: str  # "feasible" | "infeasible" | "unresolved"
    T: object
    weights: dict | None = None  # (machine, config tuple) -> weight when feasible
    dual_z: dict | None = None  # infeasibility ray otherwise
    dual_y: dict | None = None
    rounds: int = 0


def config_lp_feasible_cg(inst: Instance, T, *, max_rounds: int = 500) -> ConfigLPRun:
    """Column generation on the covering LP at makespan T.

    The restricted master minimizes uncovered job mass; pricing is an exact
    knapsack per machine on the current duals. A zero optimum returns sparse
    configuration weights; otherwise the final duals give an exact improving
    ray (z per job, y per machine) with z(C) <= y_i for every configuration,
    verified by the pricing knapsacks themselves.
    """
    T = frac(T)
    m, n = inst.num_machines, inst.num_jobs
    if n == 0:
        return ConfigLPRun("feasible", T, weights={})
    job_row = {j: m + idx for idx, j in enumerate(inst.jobs)}
    one = Frac(1)

    columns, keys = [], []

    def add_config(i, conf):
        columns.append([(i - 1, one)] + [(job_row[j], one) for j in sorted(conf)])
        keys.append((i, tuple(sorted(conf))))

    generated = set()
    for i in inst.machines:
        for j in inst.jobs:
            if i in inst.gamma[j] and inst.sizes[j] <= T and (i, (j,)) not in generated:
                generated.add((i, (j,)))
                add_config(i, (j,))
    slack_first = len(columns)
    for i in range(m):  # machine slack u_i
        columns.append([(i, one)])
        keys.append(None)
    for idx in range(n):  # cover shortfall s_j (cost 1) and surplus e_j
        columns.append([(m + idx, one)])
        keys.append(None)
    for idx in range(n):
        columns.append([(m + idx, -one)])
        keys.append(None)

    rhs = [one] * (m + n)
    for round_no in range(1, max_rounds + 1):
        costs = [ZERO] * len(columns)
        for idx in range(n):
            costs[slack_first + m + idx] = one
        basis = list(range(slack_first, slack_first + m + n))
        out = simplex_min(m + n, columns, costs, rhs, basis)
        if out.status != "optimal":
            raise CertificateError("covering master cannot be unbounded")
        if out.objective == 0:
            weights = {}
            for k, v in out.values.items():
                if keys[k] is not None and v > 0:
                    weights[keys[k]] = v
            return ConfigLPRun("feasible", T, weights=weights, rounds=round_no)
        alpha = out.duals[:m]
        beta = out.duals[m:]
        improving = False
        for i in inst.machines:
            jobs = [j for j in inst.jobs
                    if i in inst.gamma[j] and inst.sizes[j] <= T and beta[job_row[j] - m] > 0]
            if not jobs:
                value, conf = ZERO, ()
            else:
                value, subset = knapsack_max_value(KnapsackQuery(
                    tuple((inst.sizes[j], beta[job_row[j] - m]) for j in jobs), T
                ))
                conf = tuple(sorted(jobs[t] for t in subset))
            if value + alpha[i - 1] > 0:
                if (i, conf) in generated:
                    raise CertificateError("pricing regenerated an existing column")
                generated.add((i, conf))
                add_config(i, conf)
                improving = True
        if not improving:
            dual_z = {j: beta[job_row[j] - m] for j in inst.jobs}
            dual_y = {i: -alpha[i - 1] for i in inst.machines}
            return ConfigLPRun("infeasible", T, dual_z=dual_z, dual_y=dual_y,
                               rounds=round_no)
    return ConfigLPRun("unresolved", T, rounds=max_rounds)


@dataclass
class ConfigLPBound:
    lower: object  # largest T certified infeasible (or the trivial bound)
    upper: object  # smallest T with a feasible primal found
    lower_certified: bool  # True when `lower` carries an infeasibility ray
    feasible_weights: dict
    probes: int


def config_lp_lower_bound(inst: Instance, tolerance, *, max_rounds=500) -> ConfigLPBound:
    """Bracket the configuration-LP optimum within a relative tolerance."""
    if inst.num_jobs == 0:
        raise ValueError("instance has no jobs")
    tolerance = frac(tolerance)
    lo = inst.max_size()
    hi = inst.total_size()
    hi_run = config_lp_feasible_cg(inst, hi, max_rounds=max_rounds)
    if hi_run.status != "feasible":
        raise CertificateError("covering LP must be feasible at the total size")
    weights = hi_run.weights
    probes = 1
    lo_certified = False
    if lo < hi:
        lo_run = config_lp_feasible_cg(inst, lo, max_rounds=max_rounds)
        probes += 1
        if lo_run.status == "feasible":
            return ConfigLPBound(lo, lo, False, lo_run.weights, probes)
        lo_certified = lo_run.status == "infeasible"
    while hi > lo * (1 + tolerance):
        mid = (lo + hi) / 2
        run = config_lp_feasible_cg(inst, mid, max_rounds=max_rounds)
        probes += 1
        if run.status == "feasible":
            hi, weights = mid, run.weights
        elif run.status == "infeasible":
            lo, lo_certified = mid, True
        else:  # unresolved pricing: stop refining rather than overclaim
            break
    return ConfigLPBound(lo, hi, lo_certified, weights, probes)
