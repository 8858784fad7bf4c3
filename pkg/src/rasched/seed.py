"""Initial schedule of all small and medium jobs.

Solves the assignment feasibility LP at scaled threshold 1 exactly, converts
the solution to a vertex (forest support), then rounds the forest so that
every machine receives at most one extra fractional job. The resulting plain
load per machine is at most 1 + max small/medium size <= 11/6.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rational import Frac, ZERO
from .simplex import solve_equality_feasibility, SimplexError
from .model import Schedule, ScaledInstance


class SeedInfeasible(Exception):
    """The assignment LP has no solution at this guess (so neither has the
    configuration LP): the guess is below the optimum."""


@dataclass
class FractionalAssignment:
    entries: dict  # (job, machine) -> value in (0, 1]
    jobs: list  # participating (small+medium) jobs

    def support_of(self, j):
        return [i for (jj, i) in self.entries if jj == j]

    def job_sum(self, j):
        return sum((v for (jj, _), v in self.entries.items() if jj == j), ZERO)

    def machine_load(self, scaled, i):
        return sum(
            (scaled.size[j] * v for (j, ii), v in self.entries.items() if ii == i),
            ZERO,
        )


def solve_assignment_lp(scaled: ScaledInstance) -> FractionalAssignment:
    """Exact basic feasible solution of the small/medium assignment LP.

    Rows: sum_i x[j,i] = 1 per job, sum_j p_j x[j,i] + slack = 1 per machine.
    Raises SeedInfeasible when the LP is empty (the solver verifies the Farkas
    vector it produces).
    """
    sm_jobs = [j for j in scaled.base.jobs if not scaled.is_huge(j)]
    m = scaled.base.num_machines
    if not sm_jobs:
        return FractionalAssignment({}, [])
    job_row = {j: idx for idx, j in enumerate(sm_jobs)}
    nrows = len(sm_jobs) + m

    columns = []
    keys = []
    one = Frac(1)
    for j in sm_jobs:
        for i in sorted(scaled.base.gamma[j]):
            columns.append([(job_row[j], one), (len(sm_jobs) + i - 1, scaled.size[j])])
            keys.append((j, i))
    for i in range(m):  # machine slack
        columns.append([(len(sm_jobs) + i, one)])
        keys.append(None)

    rhs = [one] * nrows
    out = solve_equality_feasibility(nrows, columns, rhs, artificial_rows=range(len(sm_jobs)))
    if not out.feasible:
        raise SeedInfeasible
    entries = {}
    for k, v in out.values.items():
        if keys[k] is not None and v > 0:
            entries[keys[k]] = v
    return FractionalAssignment(entries, sm_jobs)


def _support_cycle(entries):
    """Return one cycle of the bipartite support graph as an alternating node
    list [("j", job), ("m", machine), ...], or None when it is a forest."""
    adj = {}
    for (j, i) in entries:
        adj.setdefault(("j", j), []).append(("m", i))
        adj.setdefault(("m", i), []).append(("j", j))
    for node in adj:
        adj[node].sort()
    visited = set()

    def dfs(node, parent, path):
        visited.add(node)
        path.append(node)
        for nxt in adj[node]:
            if nxt == parent:
                continue
            if nxt in path:
                return path[path.index(nxt):]
            if nxt not in visited:
                found = dfs(nxt, node, path)
                if found is not None:
                    return found
        path.pop()
        return None

    for start in sorted(adj):
        if start not in visited:
            cycle = dfs(start, None, [])
            if cycle is not None:
                return cycle
    return None


def eliminate_support_cycles(fa: FractionalAssignment, scaled: ScaledInstance) -> int:
    """Cancel support cycles with load-preserving alternating adjustments.

    Around the even cycle j_0, m_0, j_1, m_1, ..., job j_k's two cycle entries
    get +t_k / -t_k with t_k = p(j_0)/p(j_k), which keeps every job sum and
    every machine load exactly unchanged; theta runs until an entry hits zero.
    Basic solutions are vertices and already forests, so this is a guarded
    safety pass. Returns the number of cancelled cycles.
    """
    cancelled = 0
    while True:
        nodes = _support_cycle(fa.entries)
        if nodes is None:
            return cancelled
        cancelled += 1
        if nodes[0][0] == "m":
            nodes = nodes[1:] + nodes[:1]
        q = len(nodes) // 2
        jobs_seq = [nodes[2 * k][1] for k in range(q)]
        machines_seq = [nodes[2 * k + 1][1] for k in range(q)]
        deltas = {}
        for k in range(q):
            j = jobs_seq[k]
            t_k = scaled.size[jobs_seq[0]] / scaled.size[j]
            deltas[(j, machines_seq[k])] = t_k
            deltas[(j, machines_seq[k - 1])] = -t_k

        before = {i: fa.machine_load(scaled, i) for i in machines_seq}
        theta = min(fa.entries[e] / -d for e, d in deltas.items() if d < 0)
        assert theta > 0
        for e, d in deltas.items():
            fa.entries[e] += d * theta
            assert fa.entries[e] >= 0
            if fa.entries[e] == 0:
                del fa.entries[e]
        for i in machines_seq:  # loads are preserved exactly by construction
            assert fa.machine_load(scaled, i) == before[i]


def round_forest(fa: FractionalAssignment, scaled: ScaledInstance) -> Schedule:
    """Round a forest-supported assignment: integral jobs stay, each tree is
    rooted at its lowest machine, and every remaining fractional job goes to
    its lowest-id child machine, so machines gain at most one extra job."""
    schedule = Schedule(scaled)
    fractional = set()
    for j in fa.jobs:
        support = fa.support_of(j)
        placed = [i for i in support if fa.entries[(j, i)] == 1]
        if placed:
            schedule.assign(j, placed[0])
        elif not support:
            raise SimplexError(f"job {j} lost all assignment mass")
        else:
            fractional.add(j)

    if not fractional:
        return schedule

    adj_j = {j: sorted(fa.support_of(j)) for j in fractional}
    adj_m = {}
    for j, machines in adj_j.items():
        for i in machines:
            adj_m.setdefault(i, []).append(j)

    visited_m, visited_j = set(), set()
    for root in sorted(adj_m):
        if root in visited_m:
            continue
        queue = [("m", root, None)]  # oriented away from the machine root
        while queue:
            kind, node, parent = queue.pop(0)
            if kind == "m":
                if node in visited_m:
                    continue
                visited_m.add(node)
                for j in sorted(adj_m[node]):
                    if j != parent:
                        queue.append(("j", j, node))
            else:
                if node in visited_j:
                    continue
                visited_j.add(node)
                children = [i for i in adj_j[node] if i != parent]
                if not children:  # fractional leaves cannot occur at a vertex
                    children = [parent]
                schedule.assign(node, children[0])
                for i in children:
                    queue.append(("m", i, node))
    return schedule


def seed_small_medium(scaled: ScaledInstance) -> Schedule:
    """Assign every small and medium job with plain load <= 1 + max sm size.

    Raises SeedInfeasible when the assignment LP (a relaxation of the
    configuration LP) has no solution, i.e. the guess is too small.
    """
    fa = solve_assignment_lp(scaled)
    eliminate_support_cycles(fa, scaled)
    schedule = round_forest(fa, scaled)
    sm = [j for j in scaled.base.jobs if not scaled.is_huge(j)]
    assert all(schedule.machine_of(j) is not None for j in sm)
    p_max = max((scaled.size[j] for j in sm), default=ZERO)
    for i in scaled.base.machines:
        assert schedule.load(i) <= 1 + p_max, "seed rounding bound violated"
    return schedule
