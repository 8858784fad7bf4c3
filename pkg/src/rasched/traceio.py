"""Search-trace emitters: line-delimited JSON events and DOT tree snapshots."""

from __future__ import annotations

import json

from .model import Instance
from .rational import ratio_str


def emit_jsonl(run_logs, inst: Instance) -> str:
    """One JSON record per engine event, jobs referenced by original name."""
    lines = []
    for run_no, run in enumerate(run_logs, start=1):
        for ev in run.events:
            rec = {
                "run": run_no,
                "guess": ratio_str(run.guess),
                "inserting": inst.name_of(run.j_new),
                "iteration": ev["iteration"],
                "event": ev["event"],
                "job": inst.name_of(ev["job"]) if ev["job"] is not None else None,
                "machine": ev["machine"],
                "type": ev["type"],
                "layer": ev["layer"],
                "sublayer": ev["sublayer"],
                "signature": ev["signature"],
                "removed": ev["removed"],
            }
            lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def emit_dot(run_logs, inst: Instance) -> str:
    """One digraph per final tree snapshot; activation edges parent -> child."""
    out = []
    for run_no, run in enumerate(run_logs, start=1):
        out.append(f"digraph run{run_no} {{")
        out.append(f'  label="insert {inst.name_of(run.j_new)} at T={ratio_str(run.guess)}'
                   f' ({run.outcome})";')
        out.append('  root [shape=point];')
        for b in run.snapshot:
            label = (f"{inst.name_of(b['job'])}@m{b['machine']} {b['type']}"
                     f" L{b['layer']}.{b['sublayer']}")
            out.append(f'  b{b["stamp"]} [label="{label}"];')
        for b in run.snapshot:
            parent = "root" if b["parent_stamp"] is None else f"b{b['parent_stamp']}"
            out.append(f'  {parent} -> b{b["stamp"]};')
        out.append("}")
    return "\n".join(out) + ("\n" if out else "")
