"""Core data model: instances, scaling, job classes, schedules.

Jobs are re-sorted at parse time so internal ids 1..n are nondecreasing in
(size, original position); min/max over id sets are therefore deterministic.
Schedules keep incremental per-machine loads in three size systems: plain,
rounded-up (huge jobs count as 1) and rounded-down (huge jobs count as 5/6).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .rational import Frac, ZERO, frac, parse_ratio, ratio_str

HALF = Frac(1, 2)
FIVE_SIXTHS = Frac(5, 6)


class InstanceFormatError(ValueError):
    """Malformed instance text; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class JobClass(enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    HUGE = "huge"


def classify_job(p) -> JobClass:
    """Small: p <= 1/2; medium: 1/2 < p <= 5/6; huge: p > 5/6 (scaled sizes)."""
    if p <= HALF:
        return JobClass.SMALL
    if p <= FIVE_SIXTHS:
        return JobClass.MEDIUM
    return JobClass.HUGE


def rounded_sizes(p):
    """Return (p_up, p_down): huge sizes round to (1, 5/6), others unchanged."""
    if p > FIVE_SIXTHS:
        return Frac(1), FIVE_SIXTHS
    return p, p


@dataclass(frozen=True)
class Instance:
    """Jobs with exact rational sizes and permitted machine sets.

    Internal job ids are 1..n ordered by nondecreasing (size, original
    position); `names[orig]` and the id maps translate to the input order.
    """

    num_machines: int
    sizes: tuple  # sizes[j] for internal id j, index 0 unused
    gamma: tuple  # frozenset of permitted machine ids per internal id
    names: tuple  # job names in original (file) order
    orig_of: tuple  # orig_of[j] = original 0-based position of internal id j
    internal_of: tuple  # internal_of[orig] = internal id

    @property
    def num_jobs(self) -> int:
        return len(self.sizes) - 1

    @property
    def jobs(self):
        return range(1, len(self.sizes))

    @property
    def machines(self):
        return range(1, self.num_machines + 1)

    def name_of(self, j: int) -> str:
        return self.names[self.orig_of[j]]

    def total_size(self):
        return sum(self.sizes[1:], ZERO)

    def max_size(self):
        return max(self.sizes[1:])


def make_instance(num_machines: int, jobs: list, names: list | None = None) -> Instance:
    """Build an Instance from (size, permitted-set) pairs in original order."""
    if names is None:
        names = [f"j{k + 1}" for k in range(len(jobs))]
    for size, perm in jobs:
        if size <= 0:
            raise ValueError("job sizes must be positive")
        if not perm:
            raise ValueError("empty permitted set")
        if any(i < 1 or i > num_machines for i in perm):
            raise ValueError("permitted machine out of range")
    order = sorted(range(len(jobs)), key=lambda k: (jobs[k][0], k))
    sizes = [None] + [jobs[k][0] for k in order]
    gamma = [frozenset()] + [frozenset(jobs[k][1]) for k in order]
    internal_of = [0] * len(jobs)
    for internal, orig in enumerate(order, start=1):
        internal_of[orig] = internal
    return Instance(
        num_machines=num_machines,
        sizes=tuple(sizes),
        gamma=tuple(gamma),
        names=tuple(names),
        orig_of=tuple([0] + order),
        internal_of=tuple(internal_of),
    )


def parse_instance(text: str) -> Instance:
    """Parse the line-oriented instance format.

    Header 'ra 1', then 'machines <m>', then one 'job <name> <n>/<d> :
    <machines>' line per job. '#' starts a comment; blank lines are ignored.
    """
    lines = text.splitlines()
    entries = []  # (lineno, tokens)
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            entries.append((lineno, stripped.split()))
    if not entries:
        raise InstanceFormatError(1, "empty instance file")
    lineno, header = entries[0]
    if header != ["ra", "1"]:
        raise InstanceFormatError(lineno, "expected header 'ra 1'")
    if len(entries) < 2 or entries[1][1][0] != "machines":
        raise InstanceFormatError(entries[1][0] if len(entries) > 1 else lineno,
                                  "expected 'machines <m>' line")
    lineno, mtoks = entries[1]
    if len(mtoks) != 2:
        raise InstanceFormatError(lineno, "expected 'machines <m>' line")
    try:
        num_machines = int(mtoks[1])
    except ValueError:
        raise InstanceFormatError(lineno, f"bad machine count {mtoks[1]!r}") from None
    if num_machines < 1:
        raise InstanceFormatError(lineno, "machine count must be >= 1")

    jobs, names, seen = [], [], set()
    for lineno, toks in entries[2:]:
        if toks[0] != "job":
            raise InstanceFormatError(lineno, f"expected 'job' line, got {toks[0]!r}")
        if len(toks) < 4 or ":" not in toks:
            raise InstanceFormatError(lineno, "expected 'job <name> <size> : <machines>'")
        name = toks[1]
        if name in seen:
            raise InstanceFormatError(lineno, f"duplicate job name {name!r}")
        seen.add(name)
        try:
            size = parse_ratio(toks[2])
        except ValueError:
            raise InstanceFormatError(lineno, f"bad size {toks[2]!r}") from None
        if size <= 0:
            raise InstanceFormatError(lineno, f"nonpositive size {toks[2]!r}")
        if toks[3] != ":":
            raise InstanceFormatError(lineno, "expected ':' after size")
        try:
            perm = sorted(int(t) for t in toks[4:])
        except ValueError:
            raise InstanceFormatError(lineno, "bad machine id in permitted set") from None
        if not perm:
            raise InstanceFormatError(lineno, f"empty permitted set for job {name!r}")
        if any(i < 1 or i > num_machines for i in perm):
            raise InstanceFormatError(lineno, f"machine id out of range for job {name!r}")
        jobs.append((size, frozenset(perm)))
        names.append(name)
    return make_instance(num_machines, jobs, names)


def serialize_instance(inst: Instance) -> str:
    """Canonical text form; jobs in original order, machine lists ascending."""
    out = ["ra 1", f"machines {inst.num_machines}"]
    for orig in range(len(inst.names)):
        j = inst.internal_of[orig]
        machs = " ".join(str(i) for i in sorted(inst.gamma[j]))
        out.append(f"job {inst.names[orig]} {ratio_str(inst.sizes[j])} : {machs}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ScaledInstance:
    """An instance with sizes divided by the guess T; carries epsilon and R."""

    base: Instance
    guess: object  # positive rational T
    epsilon: object  # rational in (0, 1/12)
    size: tuple  # scaled sizes, index 0 unused
    R: object = field(init=False)
    job_class: tuple = field(init=False)

    def __post_init__(self):
        if not (0 < self.epsilon < Frac(1, 12)):
            raise ValueError("epsilon must lie strictly between 0 and 1/12")
        object.__setattr__(self, "R", FIVE_SIXTHS + 2 * self.epsilon)
        object.__setattr__(
            self, "job_class",
            tuple([None] + [classify_job(p) for p in self.size[1:]]),
        )

    @property
    def load_cap(self):
        return 1 + self.R

    def size_up(self, j):
        return Frac(1) if self.job_class[j] is JobClass.HUGE else self.size[j]

    def size_down(self, j):
        return FIVE_SIXTHS if self.job_class[j] is JobClass.HUGE else self.size[j]

    def is_small(self, j) -> bool:
        return self.job_class[j] is JobClass.SMALL

    def is_medium(self, j) -> bool:
        return self.job_class[j] is JobClass.MEDIUM

    def is_huge(self, j) -> bool:
        return self.job_class[j] is JobClass.HUGE

    def small_jobs(self):
        return [j for j in self.base.jobs if self.is_small(j)]

    def medium_jobs(self):
        return [j for j in self.base.jobs if self.is_medium(j)]

    def huge_jobs(self):
        return [j for j in self.base.jobs if self.is_huge(j)]


def scale_instance(inst: Instance, guess, epsilon) -> ScaledInstance:
    """Divide all sizes by the guess T exactly; the base is never mutated."""
    if guess <= 0:
        raise ValueError("guess must be positive")
    guess = frac(guess)
    sizes = tuple([None] + [inst.sizes[j] / guess for j in inst.jobs])
    return ScaledInstance(base=inst, guess=guess, epsilon=frac(epsilon), size=sizes)


UNASSIGNED = None

PLAIN, UP, DOWN = "plain", "up", "down"


class Schedule:
    """Total map job -> machine-or-unassigned with incremental load accounting."""

    def __init__(self, scaled: ScaledInstance):
        self.scaled = scaled
        n = scaled.base.num_jobs
        m = scaled.base.num_machines
        self.assignment = [UNASSIGNED] * (n + 1)
        self.on_machine = [set() for _ in range(m + 1)]
        self.mediums = [set() for _ in range(m + 1)]
        self.huges = [set() for _ in range(m + 1)]
        self._load = {PLAIN: [ZERO] * (m + 1), UP: [ZERO] * (m + 1), DOWN: [ZERO] * (m + 1)}

    def copy(self) -> "Schedule":
        dup = Schedule.__new__(Schedule)
        dup.scaled = self.scaled
        dup.assignment = list(self.assignment)
        dup.on_machine = [set(s) for s in self.on_machine]
        dup.mediums = [set(s) for s in self.mediums]
        dup.huges = [set(s) for s in self.huges]
        dup._load = {k: list(v) for k, v in self._load.items()}
        return dup

    def machine_of(self, j: int):
        return self.assignment[j]

    def assign(self, j: int, i: int):
        """Set sigma(j) <- i (j must currently be unassigned)."""
        assert self.assignment[j] is UNASSIGNED
        sc = self.scaled
        self.assignment[j] = i
        self.on_machine[i].add(j)
        cls = sc.job_class[j]
        if cls is JobClass.MEDIUM:
            self.mediums[i].add(j)
        elif cls is JobClass.HUGE:
            self.huges[i].add(j)
        self._load[PLAIN][i] += sc.size[j]
        self._load[UP][i] += sc.size_up(j)
        self._load[DOWN][i] += sc.size_down(j)

    def unassign(self, j: int):
        i = self.assignment[j]
        assert i is not UNASSIGNED
        sc = self.scaled
        self.assignment[j] = UNASSIGNED
        self.on_machine[i].discard(j)
        self.mediums[i].discard(j)
        self.huges[i].discard(j)
        self._load[PLAIN][i] -= sc.size[j]
        self._load[UP][i] -= sc.size_up(j)
        self._load[DOWN][i] -= sc.size_down(j)

    def move(self, j: int, i: int):
        if self.assignment[j] is not UNASSIGNED:
            self.unassign(j)
        self.assign(j, i)

    def load(self, i: int, system: str = PLAIN):
        return self._load[system][i]

    def load_from_scratch(self, i: int, system: str = PLAIN):
        """Recompute the load by summation; used by audits and tests."""
        sc = self.scaled
        sel = {PLAIN: lambda j: sc.size[j], UP: sc.size_up, DOWN: sc.size_down}[system]
        return sum((sel(j) for j in self.on_machine[i]), ZERO)

    def min_medium(self, i: int):
        """Smallest-id medium job on machine i, or None."""
        return min(self.mediums[i]) if self.mediums[i] else None

    def assigned_jobs(self):
        return [j for j in self.scaled.base.jobs if self.assignment[j] is not UNASSIGNED]

    def makespan_plain(self):
        m = self.scaled.base.num_machines
        return max((self._load[PLAIN][i] for i in range(1, m + 1)), default=ZERO)


def machine_load(schedule: Schedule, i: int, system: str = PLAIN):
    return schedule.load(i, system)


def validate_partial_schedule(schedule: Schedule) -> list:
    """Return violation strings; empty iff the schedule is a valid partial one."""
    sc = schedule.scaled
    cap = sc.load_cap
    violations = []
    for j in sc.base.jobs:
        i = schedule.assignment[j]
        if i is not UNASSIGNED and i not in sc.base.gamma[j]:
            violations.append(f"job {j} assigned to machine {i} outside its permitted set")
    for i in sc.base.machines:
        load = schedule.load(i, PLAIN)
        if load > cap:
            violations.append(
                f"machine {i} load {ratio_str(load)} exceeds cap {ratio_str(cap)}"
            )
        if len(schedule.huges[i]) > 1:
            violations.append(f"machine {i} carries {len(schedule.huges[i])} huge jobs")
    return violations
