"""Blocker-tree local search: insert one huge job into a valid partial schedule.

The engine keeps an ordered tree of blockers (moves it wants to perform,
typed by what they make undesirable on their target machine), arranged in
layers of five sublayers each. Each loop iteration either performs the valid
move in the lowest sublayer or adds the highest-priority potential move to
the lowest possible layer; when neither is possible below the layer cap, the
search is stuck and the final tree certifies that the guess was too small.

Determinism: additions tie-break by (job id, machine id), valid moves by
insertion stamp, so identical inputs replay identical event sequences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .rational import Frac, ZERO
from .model import Schedule, UNASSIGNED, UP, JobClass, validate_partial_schedule


class EngineInvariantError(RuntimeError):
    """An internal invariant failed; indicates a bug, never an input error."""


class BlockerType(enum.Enum):
    BB = "bb"  # huge or medium mover; huge jobs undesirable on the target
    BS = "bs"  # huge mover; all jobs undesirable
    MS = "ms"  # medium mover; all jobs undesirable
    S = "s"  # small mover; all jobs undesirable
    M = "m"  # huge mover; mediums up to the smallest medium undesirable
    MM = "mm"  # huge mover; all mediums undesirable


SUBLAYER = {
    BlockerType.BB: 1,
    BlockerType.BS: 2,
    BlockerType.MS: 2,
    BlockerType.S: 3,
    BlockerType.M: 4,
    BlockerType.MM: 5,
}

PRIORITY = {
    BlockerType.BB: 5,
    BlockerType.S: 4,
    BlockerType.MS: 3,
    BlockerType.BS: 3,
    BlockerType.M: 2,
    BlockerType.MM: 1,
}

ALL_UNDESIRABLE = (BlockerType.S, BlockerType.MS, BlockerType.BS)


def layer_cap(num_machines: int, epsilon) -> int:
    """Highest layer the search may use: ceil((2/epsilon) * ceil(ln m + 1))."""
    t = max(1, math.ceil(math.log(num_machines) + 1))
    while math.exp(t - 1) < num_machines:  # float guard at the boundary
        t += 1
    product = Frac(2) * t / epsilon
    return int(-((-product.numerator) // product.denominator))


class Blocker:
    __slots__ = ("job", "machine", "btype", "layer", "stamp", "parent", "alive")

    def __init__(self, job, machine, btype, layer, stamp, parent):
        self.job = job
        self.machine = machine
        self.btype = btype
        self.layer = layer
        self.stamp = stamp
        self.parent = parent  # Blocker or None for children of the root
        self.alive = True

    @property
    def sublayer(self) -> int:
        return SUBLAYER[self.btype]

    def position(self):
        return (self.layer, self.sublayer, self.stamp)

    def __repr__(self):
        return (f"Blocker(j{self.job}->m{self.machine} {self.btype.value}"
                f" L{self.layer}.{self.sublayer} #{self.stamp})")


class BlockerTree:
    """Layers of five insertion-ordered sublayers; deletions are suffix wipes."""

    def __init__(self):
        self.layers = {}  # layer -> [list of Blocker] * 5
        self.version = 0
        self._stamp = 0

    def _bump(self):
        self.version += 1

    def next_stamp(self) -> int:
        self._stamp += 1
        return self._stamp

    def occupied_layers(self):
        return sorted(k for k, subs in self.layers.items() if any(subs))

    def sublayer_list(self, layer: int, sub: int):
        subs = self.layers.get(layer)
        return subs[sub - 1] if subs else []

    def append(self, blocker: Blocker):
        subs = self.layers.setdefault(blocker.layer, [[], [], [], [], []])
        subs[blocker.sublayer - 1].append(blocker)
        self._bump()

    def blockers(self):
        """All live blockers in (layer, sublayer, stamp) order."""
        out = []
        for k in self.occupied_layers():
            for sub in self.layers[k]:
                out.extend(sub)
        return out

    def contains_move(self, job, machine) -> bool:
        return any(b.job == job and b.machine == machine for b in self.blockers())

    def machines_of(self, types, max_layer=None):
        got = set()
        for b in self.blockers():
            if b.btype in types and (max_layer is None or b.layer <= max_layer):
                got.add(b.machine)
        return got

    def _wipe(self, blockers) -> int:
        for b in blockers:
            b.alive = False
        return len(blockers)

    def delete_after_sublayer(self, layer: int, sub: int) -> int:
        """Remove every blocker in a sublayer strictly after (layer, sub)."""
        removed = 0
        for k, subs in self.layers.items():
            for s in range(1, 6):
                if (k, s) > (layer, sub) and subs[s - 1]:
                    removed += self._wipe(subs[s - 1])
                    subs[s - 1] = []
        if removed:
            self._bump()
        return removed

    def delete_sublayer(self, layer: int, sub: int) -> int:
        subs = self.layers.get(layer)
        if not subs or not subs[sub - 1]:
            return 0
        removed = self._wipe(subs[sub - 1])
        subs[sub - 1] = []
        self._bump()
        return removed


_MARKS = {
    BlockerType.S: "all",
    BlockerType.MS: "all",
    BlockerType.BS: "all",
    BlockerType.BB: "huge",
    BlockerType.MM: "medium",
    BlockerType.M: "medium-min",
}


@dataclass
class StuckState:
    """Terminal search state used to build the dual certificate."""

    engine: "InsertionEngine"
    reason: str  # "no-potential-move" | "layer-overflow"

    @property
    def schedule(self):
        return self.engine.schedule

    @property
    def tree(self):
        return self.engine.tree


class InsertionEngine:
    def __init__(self, schedule: Schedule, j_new: int, *, audit: bool = False,
                 log_events: bool = False, watchdog: int = 10 ** 6):
        scaled = schedule.scaled
        if not scaled.is_huge(j_new):
            raise ValueError("only huge jobs are inserted by the search")
        if schedule.machine_of(j_new) is not UNASSIGNED:
            raise ValueError("job to insert must be unassigned")
        self.scaled = scaled
        self.schedule = schedule
        self.j_new = j_new
        self.K = layer_cap(scaled.base.num_machines, scaled.epsilon)
        self.tree = BlockerTree()
        self.audit = audit
        self.watchdog = watchdog
        self.iterations = 0
        self.moves = 0
        self.adds = 0
        self.events = [] if log_events else None
        self.checkpoints = []  # (kind, signature) at add / run-end checkpoints
        self.signature_dips = []  # run-end checkpoints that failed to increase
        self._last_checkpoint = None
        self._last_add_checkpoint = None
        self._moves_since_checkpoint = 0
        self._pending_move_sig = None
        self._blocked_memo = (None, None)

    # ---------- derived sets ----------

    def _blocked_small_table(self):
        """Cumulative (boundary_layer, covered_machines, blocked_smalls) rows.

        Row 0 is the empty prefix; further rows are added at each occupied
        layer that carries all-jobs-undesirable blockers. Memoized per tree
        version.
        """
        if self._blocked_memo[0] == self.tree.version:
            return self._blocked_memo[1]
        sched, sc = self.schedule, self.scaled
        smalls = [j for j in sc.base.jobs if sc.is_small(j)]

        def blocked(j, covered):
            home = sched.machine_of(j)
            return all(i in covered for i in sc.base.gamma[j] if i != home)

        covered = set()
        rows = [(0, frozenset(), frozenset(j for j in smalls if blocked(j, covered)))]
        for k in self.tree.occupied_layers():
            adds = {
                b.machine
                for s in (1, 2, 3, 4, 5)
                for b in self.tree.sublayer_list(k, s)
                if b.btype in ALL_UNDESIRABLE
            }
            if adds - covered:
                covered |= adds
                rows.append(
                    (k, frozenset(covered),
                     frozenset(j for j in smalls if blocked(j, covered)))
                )
        self._blocked_memo = (self.tree.version, rows)
        return rows

    def blocked_small_jobs(self, prefix=None):
        """Small jobs undesirable on every alternative machine (prefix <= k)."""
        rows = self._blocked_small_table()
        if prefix is None:
            return rows[-1][2]
        best = rows[0][2]
        for layer, _cov, blocked in rows[1:]:
            if layer <= prefix:
                best = blocked
        return best

    def covered_machines(self, prefix=None):
        rows = self._blocked_small_table()
        if prefix is None:
            return rows[-1][1]
        best = rows[0][1]
        for layer, cov, _ in rows[1:]:
            if layer <= prefix:
                best = cov
        return best

    def blocked_smalls_on(self, i, prefix=None):
        return {j for j in self.blocked_small_jobs(prefix) if self.schedule.machine_of(j) == i}

    def min_blocked_layer(self, j):
        """Smallest layer whose prefix blocks small job j, or None."""
        for layer, _cov, blocked in self._blocked_small_table():
            if j in blocked:
                return max(1, layer)
        return None

    def marks_undesirable(self, blocker: Blocker, j) -> bool:
        """Does this blocker make job j undesirable on the blocker's machine?"""
        kind = _MARKS[blocker.btype]
        if kind == "all":
            return True
        cls = self.scaled.job_class[j]
        if kind == "huge":
            return cls is JobClass.HUGE
        if kind == "medium":
            return cls is JobClass.MEDIUM
        if cls is not JobClass.MEDIUM:
            return False
        mn = self.schedule.min_medium(blocker.machine)
        return mn is not None and j <= mn

    def undesirable_on(self, j, i, prefix=None) -> bool:
        """Is job j undesirable on machine i w.r.t. the prefix's blockers?"""
        if i in self.covered_machines(prefix):
            return True
        cls = self.scaled.job_class[j]
        for b in self.tree.blockers():
            if b.machine != i or (prefix is not None and b.layer > prefix):
                continue
            if b.btype is BlockerType.BB and cls is JobClass.HUGE:
                return True
            if cls is JobClass.MEDIUM:
                if b.btype is BlockerType.MM:
                    return True
                if b.btype is BlockerType.M:
                    mn = self.schedule.min_medium(i)
                    if mn is not None and j <= mn:
                        return True
        return False

    def activator_of(self, j):
        """Earliest-stamped live blocker for sigma(j) that marks j undesirable."""
        home = self.schedule.machine_of(j)
        if home is UNASSIGNED:
            return None
        best = None
        for b in self.tree.blockers():
            if b.machine == home and self.marks_undesirable(b, j):
                if best is None or b.stamp < best.stamp:
                    best = b
        return best

    def head_layer_from(self, parent: Blocker | None, j) -> int:
        """Layer where blockers for j would be placed, given its activator."""
        if parent is None:
            return 1  # children of the root
        if parent.btype is BlockerType.BB:
            return parent.layer
        if parent.btype is BlockerType.BS and self.scaled.is_small(j):
            return parent.layer
        return parent.layer + 1

    def active_jobs(self):
        """j_new, blocked small jobs, and jobs undesirable where they sit."""
        out = {self.j_new} | set(self.blocked_small_jobs())
        for j in self.schedule.assigned_jobs():
            if self.activator_of(j) is not None:
                out.add(j)
        return out

    def active_on(self, i):
        return {j for j in self.active_jobs() if self.schedule.machine_of(j) == i}

    # ---------- move classification ----------

    def _plain_minus_huge(self, i):
        sched = self.schedule
        return sched.load(i) - sum((self.scaled.size[h] for h in sched.huges[i]), ZERO)

    def _sum_sizes(self, jobs):
        return sum((self.scaled.size[j] for j in jobs), ZERO)

    def classify_potential_move(self, j, i, k):
        """Blocker type the move (j, i) would get in layer k, or None.

        None when the move is already in the tree, j is undesirable on i
        w.r.t. the prefix, or no load condition row matches.
        """
        if self.tree.contains_move(j, i):
            return None
        if self.undesirable_on(j, i, prefix=k):
            return None
        sc = self.scaled
        cap = sc.load_cap
        p_j = sc.size[j]
        cls = sc.job_class[j]
        if cls is JobClass.SMALL:
            return BlockerType.S
        a = self._plain_minus_huge(i) + p_j
        if cls is JobClass.MEDIUM:
            return BlockerType.BB if a <= cap else BlockerType.MS
        if a <= cap:
            return BlockerType.BB
        s_set = self.blocked_smalls_on(i, prefix=k)
        s_sum = self._sum_sizes(s_set)
        mediums = self.schedule.mediums[i]
        if s_sum + self._sum_sizes(mediums) + p_j <= cap:
            return BlockerType.BS
        mn = self.schedule.min_medium(i)
        min_sum = sc.size[mn] if mn is not None else ZERO
        if s_sum + min_sum + p_j <= cap:
            return BlockerType.MM
        if s_sum + p_j <= cap:
            return BlockerType.M
        return None

    def starred_conditions_hold(self, b: Blocker) -> bool:
        """Re-check the conditions marked for re-evaluation on the blocker's
        type against the current schedule (using the blocker's own layer)."""
        sc = self.scaled
        cap = sc.load_cap
        p_j = sc.size[b.job]
        if b.btype in (BlockerType.BB, BlockerType.S):
            return True
        if b.btype in (BlockerType.MS, BlockerType.BS):
            return self._plain_minus_huge(b.machine) + p_j > cap
        s_sum = self._sum_sizes(self.blocked_smalls_on(b.machine, prefix=b.layer))
        mn = self.schedule.min_medium(b.machine)
        min_sum = sc.size[mn] if mn is not None else ZERO
        if b.btype is BlockerType.M:
            return s_sum + min_sum + p_j > cap
        mediums_sum = self._sum_sizes(self.schedule.mediums[b.machine])
        return (s_sum + mediums_sum + p_j > cap) and (s_sum + min_sum + p_j <= cap)

    # ---------- the loop pieces ----------

    def move_is_valid(self, j, i) -> bool:
        sched = self.schedule
        if sched.machine_of(j) == i:
            return False
        if sched.load(i, UP) + self.scaled.size[j] > self.scaled.load_cap:
            return False
        return not (self.scaled.is_huge(j) and sched.huges[i])

    def find_valid_move(self):
        """Live blocker with a valid move in the lowest (layer, sublayer),
        ties within a sublayer by insertion stamp."""
        for k in self.tree.occupied_layers():
            for s in (1, 2, 3, 4, 5):
                for b in self.tree.sublayer_list(k, s):
                    if self.move_is_valid(b.job, b.machine):
                        return b
        return None

    def select_addition(self):
        """Highest-priority potential move at the minimum head layer.

        Returns (j, i, type, layer), or the string "layer-overflow" /
        "no-potential-move" when the search is stuck.
        """
        sched = self.schedule
        heads = {self.j_new: 1}
        for j in sched.assigned_jobs():
            parent = self.activator_of(j)
            if parent is not None and j != self.j_new:
                heads[j] = self.head_layer_from(parent, j)
        by_layer = {}
        for j, k in heads.items():
            by_layer.setdefault(k, []).append(j)
        for k in sorted(by_layer):
            candidates = []
            for j in sorted(by_layer[k]):
                home = sched.machine_of(j)
                for i in sorted(self.scaled.base.gamma[j]):
                    if i == home:
                        continue
                    btype = self.classify_potential_move(j, i, k)
                    if btype is not None:
                        candidates.append((-PRIORITY[btype], j, i, btype))
            if candidates:
                if k > self.K:
                    return "layer-overflow"
                _, j, i, btype = min(candidates)
                return (j, i, btype, k)
        return "no-potential-move"

    def add_blocker(self, j, i, btype, layer) -> Blocker:
        parent = None if j == self.j_new else self.activator_of(j)
        if j != self.j_new and parent is None:
            raise EngineInvariantError(f"no activator for job {j} at add time")
        b = Blocker(j, i, btype, layer, self.tree.next_stamp(), parent)
        self.tree.append(b)
        removed = self.tree.delete_after_sublayer(layer, b.sublayer)
        self.adds += 1
        sig = self.signature_vector()
        self._checkpoint(sig, "add")
        self._log("add", b, sig, removed)
        return b

    def execute_move(self, b: Blocker) -> bool:
        """Perform the blocker's move; True when the new job got assigned."""
        j, target = b.job, b.machine
        self.schedule.move(j, target)
        self.moves += 1
        if j == self.j_new:
            self._log("move", b, self.signature_vector(), 0)
            return True
        parent = b.parent
        if parent is None or not parent.alive:
            raise EngineInvariantError("executed blocker lost its activator")
        removed = self.tree.delete_after_sublayer(parent.layer, parent.sublayer)
        # The run-end checkpoint measures the potential here, before the
        # starred-condition prune of the activator's own sublayer; pruning
        # first would make the measured potential non-monotone.
        sig = self.signature_vector()
        self._pending_move_sig = sig
        self._moves_since_checkpoint += 1
        if not self.starred_conditions_hold(parent):
            extra = self.tree.delete_sublayer(parent.layer, parent.sublayer)
            if extra:
                self._log("delete", parent, None, extra)
            removed += extra
        self._log("move", b, sig, removed)
        return False

    # ---------- signature & checkpoints ----------

    def signature_vector(self):
        """Per-layer 5-tuples of sublayer potentials, layers 1..last occupied."""
        occupied = self.tree.occupied_layers()
        if not occupied:
            return ()
        n = self.scaled.base.num_jobs
        sched = self.schedule
        out = []
        for k in range(1, occupied[-1] + 1):
            comp = [0, 0, 0, 0, 0]
            for s in (1, 2, 3, 4, 5):
                for b in self.tree.sublayer_list(k, s):
                    i = b.machine
                    if b.btype is BlockerType.BB:
                        comp[0] += n - len(sched.huges[i])
                    elif b.btype in (BlockerType.MS, BlockerType.BS):
                        comp[1] += n - len(sched.on_machine[i])
                    elif b.btype is BlockerType.S:
                        comp[2] += n - len(sched.on_machine[i])
                    elif b.btype is BlockerType.M:
                        mn = sched.min_medium(i)
                        comp[3] += mn if mn is not None else 0
                    else:
                        comp[4] += n - len(sched.mediums[i])
            out.append(tuple(comp))
        return tuple(out)

    @staticmethod
    def signature_lt(a, b) -> bool:
        """Lexicographic order with absent trailing components read as zero."""
        width = max(len(a), len(b))
        pad = ((0, 0, 0, 0, 0),)
        return a + pad * (width - len(a)) < b + pad * (width - len(b))

    def _checkpoint(self, sig, kind):
        """Record a potential checkpoint and police monotonicity.

        The sequence of add checkpoints provably increases strictly (the new
        blocker's positive term lands at the lowest touched position, and no
        component before it ever shrinks while the activator chain survives),
        so a violation there is a hard error. Run-end checkpoints are
        expected to increase as well but can legitimately dip when the final
        move's activator loses its own sublayer term (e.g. the machine of a
        min-medium blocker losing its last medium job just before the starred
        prune); those dips are recorded, not fatal, and the following add
        restores the order by landing in a strictly smaller sublayer.
        """
        if self._last_checkpoint is not None and not self.signature_lt(self._last_checkpoint, sig):
            if kind == "run-end":
                self.signature_dips.append((self._last_checkpoint, sig))
            else:
                raise EngineInvariantError(
                    f"signature did not increase at {kind} checkpoint: "
                    f"{self._last_checkpoint} -> {sig}"
                )
        if kind == "add":
            if self._last_add_checkpoint is not None and not self.signature_lt(
                    self._last_add_checkpoint, sig):
                raise EngineInvariantError(
                    f"signature did not increase across add checkpoints: "
                    f"{self._last_add_checkpoint} -> {sig}"
                )
            self._last_add_checkpoint = sig
        self._last_checkpoint = sig
        self.checkpoints.append((kind, sig))

    def _close_move_run(self):
        if self._moves_since_checkpoint:
            self._checkpoint(self._pending_move_sig, "run-end")
            self._moves_since_checkpoint = 0
            self._pending_move_sig = None

    def _log(self, event, b, sig, removed):
        if self.events is None:
            return
        self.events.append({
            "iteration": self.iterations,
            "event": event,
            "job": b.job if b else None,
            "machine": b.machine if b else None,
            "type": b.btype.value if b else None,
            "layer": b.layer if b else None,
            "sublayer": b.sublayer if b else None,
            "signature": [list(c) for c in sig] if sig is not None else None,
            "removed": removed,
        })

    # ---------- audit ----------

    def check_invariants(self):
        """Loop-top invariant suite; returns a list of violation strings."""
        sc, sched, tree = self.scaled, self.schedule, self.tree
        cap = sc.load_cap
        out = []
        live = tree.blockers()
        seen_moves = set()
        sma_machines = set()
        layer_of_job = {}
        for b in live:
            key = (b.job, b.machine)
            if key in seen_moves:
                out.append(f"duplicate move {key} in tree")
            seen_moves.add(key)
            if b.btype in ALL_UNDESIRABLE:
                if b.machine in sma_machines:
                    out.append(f"machine {b.machine} in two all-undesirable blockers")
                sma_machines.add(b.machine)
            if b.parent is not None:
                if not b.parent.alive:
                    out.append(f"{b} has a dead activator")
                elif b.parent.position() > b.position():
                    out.append(f"{b} precedes its activator")
                expected = self.head_layer_from(b.parent, b.job)
                if b.layer != expected:
                    out.append(f"{b} sits in layer {b.layer}, child rule says {expected}")
            elif b.job != self.j_new:
                out.append(f"{b} is rootless but not the inserted job")
            prev = layer_of_job.get(b.job)
            if prev is not None and prev != b.layer:
                out.append(f"job {b.job} has blockers in layers {prev} and {b.layer}")
            layer_of_job[b.job] = b.layer

            p_j = sc.size[b.job]
            if b.btype is BlockerType.BB:
                if self._plain_minus_huge(b.machine) + p_j > cap:
                    out.append(f"{b}: huge-target load condition broke")
            elif b.btype in (BlockerType.BS, BlockerType.MS):
                if self._plain_minus_huge(b.machine) + p_j <= cap:
                    out.append(f"{b}: overload condition no longer holds")
            elif b.btype is BlockerType.M:
                s_sum = self._sum_sizes(self.blocked_smalls_on(b.machine, prefix=b.layer))
                mn = sched.min_medium(b.machine)
                min_sum = sc.size[mn] if mn is not None else ZERO
                if s_sum + min_sum + p_j <= cap:
                    out.append(f"{b}: min-medium condition no longer holds")
                if not sched.mediums[b.machine]:
                    out.append(f"{b}: machine lost all medium jobs")
            elif b.btype is BlockerType.MM:
                if len(sched.mediums[b.machine]) < 2:
                    out.append(f"{b}: machine has fewer than two medium jobs")
        for i in sc.base.machines:
            for system in ("plain", "up", "down"):
                if sched.load(i, system) != sched.load_from_scratch(i, system):
                    out.append(f"machine {i} incremental {system} load drifted")
        out.extend(validate_partial_schedule(sched))
        return out

    # ---------- main loop ----------

    def run(self):
        """Insert the job, or return the StuckState that certifies failure."""
        while True:
            self.iterations += 1
            if self.iterations > self.watchdog:
                raise EngineInvariantError("iteration watchdog exceeded")
            if self.audit:
                violations = self.check_invariants()
                if violations:
                    raise EngineInvariantError("; ".join(violations))
            blocker = self.find_valid_move()
            if blocker is not None:
                if self.execute_move(blocker):
                    return self.schedule
                continue
            self._close_move_run()
            selection = self.select_addition()
            if isinstance(selection, str):
                return StuckState(engine=self, reason=selection)
            self.add_blocker(*selection)


def insert_huge_job(schedule: Schedule, j_new: int, *, audit=False,
                    log_events=False, watchdog=10 ** 6):
    """One-shot wrapper around InsertionEngine.run()."""
    engine = InsertionEngine(schedule, j_new, audit=audit,
                             log_events=log_events, watchdog=watchdog)
    result = engine.run()
    return result, engine
