"""Benchmark harness over a corpus of instance files."""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import rational
from .rational import frac, ratio_str, as_float
from .model import parse_instance, InstanceFormatError
from .driver import solve
from .certificate import config_lp_lower_bound
from .engine import layer_cap


@dataclass
class BenchRow:
    instance: str
    epsilon: object
    layer_limit: int
    engine_iterations: int
    max_layer: int
    wall_seconds: float
    makespan: object
    lp_lower: object
    ratio: object


def _run_one(args):
    path, text, eps_str, tau_str, reps = args
    inst = parse_instance(text)
    eps, tau = frac(eps_str), frac(tau_str)
    iters = None
    best_elapsed = None
    report = None
    for _ in range(reps):
        start = time.perf_counter()
        report = solve(inst, eps, tau, log_events=True)
        elapsed = time.perf_counter() - start
        got = report.iterations.get("engine_iterations", 0)
        if iters is not None and got != iters:
            raise RuntimeError(f"nondeterministic iteration count on {path}")
        iters = got
        best_elapsed = elapsed if best_elapsed is None else min(best_elapsed, elapsed)
    max_layer = 0
    for run in report.run_logs:
        for ev in run.events:
            if ev["layer"]:
                max_layer = max(max_layer, ev["layer"])
    bound = config_lp_lower_bound(inst, tau)
    row = BenchRow(
        instance=os.path.basename(path), epsilon=eps,
        layer_limit=layer_cap(inst.num_machines, eps),
        engine_iterations=iters, max_layer=max_layer,
        wall_seconds=best_elapsed, makespan=report.makespan,
        lp_lower=bound.lower, ratio=report.makespan / bound.lower,
    )
    return row


def bench(corpus_dir: str, epsilons, repetitions: int = 1, workers: int = 1,
          tau=frac("1/100"), err=None):
    """Run solve over every parseable instance in the corpus for each epsilon."""
    if err is None:
        err = sys.stderr
    tasks = []
    for name in sorted(os.listdir(corpus_dir)):
        path = os.path.join(corpus_dir, name)
        if not os.path.isfile(path):
            continue
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
            parse_instance(text)
        except (OSError, UnicodeDecodeError, InstanceFormatError) as exc:
            print(f"warning: skipping {name}: {exc}", file=err)
            continue
        for eps in epsilons:
            tasks.append((path, text, str(eps), str(tau), repetitions))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, tasks))
    else:
        rows = [_run_one(t) for t in tasks]
    rows.sort(key=lambda r: (r.instance, as_float(r.epsilon)))
    return rows


def rows_to_text(rows) -> str:
    header = (f"{'instance':24} {'epsilon':>8} {'K':>5} {'iters':>7} "
              f"{'maxL':>5} {'wall_s':>9} {'ratio_vs_lp':>12}  [{rational.BACKEND}]")
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.instance:24} {ratio_str(r.epsilon):>8} {r.layer_limit:>5} "
            f"{r.engine_iterations:>7} {r.max_layer:>5} {r.wall_seconds:>9.4f} "
            f"{as_float(r.ratio):>12.6f}"
        )
    return "\n".join(lines) + "\n"


def rows_to_jsonl(rows) -> str:
    out = []
    for r in rows:
        out.append(json.dumps({
            "instance": r.instance,
            "epsilon": ratio_str(r.epsilon),
            "layer_limit": r.layer_limit,
            "engine_iterations": r.engine_iterations,
            "max_layer": r.max_layer,
            "wall_seconds": round(r.wall_seconds, 6),
            "makespan": ratio_str(r.makespan),
            "lp_lower_bound": ratio_str(r.lp_lower),
            "ratio_vs_lp": ratio_str(r.ratio),
            "backend": rational.BACKEND,
        }, sort_keys=True))
    return "\n".join(out) + ("\n" if out else "")
