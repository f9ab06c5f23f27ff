"""Synthesis optimization directives from predicted endpoint rankings.

Endpoints split into the four criticality groups; each group becomes a
path group with its own optimization weight, and the top-5% group is
additionally emitted as the retiming candidate list. Dialects: dc-tcl
(group_path / set_optimize_registers / optimize_registers commands) and
generic-json (the same structure, machine readable).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .aggregate import SignalTiming
from .config import DEFAULT_GROUP_WEIGHTS
from .errors import EmptyTimingList, ValidationError

SYNTH_SCHEMA = "synth-1"


@dataclass(frozen=True)
class PathGroup:
    name: str
    weight: float
    endpoints: tuple[str, ...]


@dataclass(frozen=True)
class SynthDirectives:
    groups: tuple[PathGroup, ...]
    retime: tuple[str, ...]   # always the group-1 membership

    def to_json_obj(self) -> dict:
        return {"schema": SYNTH_SCHEMA,
                "groups": [{"name": g.name, "weight": g.weight,
                            "endpoints": list(g.endpoints)} for g in self.groups],
                "retime": list(self.retime)}


def build_directives(timing: list[SignalTiming],
                     weights: tuple[float, ...] = DEFAULT_GROUP_WEIGHTS) -> SynthDirectives:
    if not timing:
        raise EmptyTimingList("no endpoints to group")
    members: dict[int, list[SignalTiming]] = {1: [], 2: [], 3: [], 4: []}
    for st in timing:
        members[st.group].append(st)
    groups = []
    for gi in (1, 2, 3, 4):
        eps = tuple(s.name for s in sorted(members[gi], key=lambda s: (s.rank, s.name)))
        groups.append(PathGroup(f"g{gi}", float(weights[gi - 1]), eps))
    return SynthDirectives(groups=tuple(groups),
                           retime=groups[0].endpoints)


def emit_synth_directives(timing: list[SignalTiming], dialect: str = "dc-tcl",
                          weights: tuple[float, ...] = DEFAULT_GROUP_WEIGHTS,
                          profile: str = "default") -> str:
    d = build_directives(timing, weights)
    if dialect == "generic-json":
        return json.dumps(d.to_json_obj(), sort_keys=True, indent=1) + "\n"
    if dialect != "dc-tcl":
        raise ValidationError(f"unknown directive dialect {dialect!r}")
    lines = [f"# [rtl-timer] synthesis directives profile={profile}"]
    for g in d.groups:
        if not g.endpoints:
            continue
        lines.append(f"group_path -name {g.name} -weight {g.weight} "
                     "-to { " + " ".join(g.endpoints) + " }")
    if d.retime:
        lines.append("set_optimize_registers true -to { " + " ".join(d.retime) + " }")
        lines.append("# run after compile to retime the critical group:")
        lines.append("optimize_registers")
    return "\n".join(lines) + "\n"


def parse_synth_json(text: str) -> SynthDirectives:
    obj = json.loads(text)
    if obj.get("schema") != SYNTH_SCHEMA:
        raise ValidationError(f"unknown synth schema {obj.get('schema')!r}")
    groups = tuple(PathGroup(str(g["name"]), float(g["weight"]),
                             tuple(str(e) for e in g["endpoints"]))
                   for g in obj["groups"])
    return SynthDirectives(groups=groups, retime=tuple(str(e) for e in obj["retime"]))


__all__ = ["SYNTH_SCHEMA", "PathGroup", "SynthDirectives", "build_directives",
           "emit_synth_directives", "parse_synth_json"]
