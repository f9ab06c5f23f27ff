"""Pseudo static timing analysis over Boolean operator graphs.

The graph is timed like a netlist against a pseudo liberty table: each
operator kind has an intrinsic delay, a fanout-linear delay term, an
input pin capacitance, and a fanout-linear slew model. Arrival times
propagate in topological order; the slowest fanin is recorded per node
so the critical path to any endpoint can be backtraced.

All quantities are pseudo units (pseudo-ns, pseudo-fF): relative
magnitudes chosen for modeling, not sign-off accuracy.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field

from .bog import CONST0, CONST1, PI, PO, REG, BogGraph, EndpointRef
from .errors import CycleDetected, UnknownEndpoint, ValidationError

_TIMED_FIELDS = ("intrinsic_delay", "delay_per_fanout", "input_pin_cap",
                 "intrinsic_slew", "slew_per_fanout")


@dataclass(frozen=True)
class OpTiming:
    intrinsic_delay: float
    delay_per_fanout: float
    input_pin_cap: float
    intrinsic_slew: float
    slew_per_fanout: float


# REG/PO rows only contribute input pin capacitance to their drivers' loads.
_DEFAULT_OPS = {
    "NOT": OpTiming(0.5, 0.05, 0.8, 0.1, 0.02),
    "AND": OpTiming(1.0, 0.10, 1.0, 0.2, 0.05),
    "OR": OpTiming(1.0, 0.10, 1.0, 0.2, 0.05),
    "XOR": OpTiming(1.6, 0.12, 1.5, 0.3, 0.06),
    "MUX": OpTiming(1.4, 0.12, 1.3, 0.25, 0.06),
    "REG": OpTiming(0.0, 0.0, 1.2, 0.0, 0.0),
    "PO": OpTiming(0.0, 0.0, 0.5, 0.0, 0.0),
}


@dataclass(frozen=True)
class PseudoLiberty:
    """Per-operator pseudo cell timing table."""

    ops: dict[str, OpTiming] = field(default_factory=lambda: dict(_DEFAULT_OPS))
    reg_clk_to_q: float = 1.0
    pi_arrival: float = 0.0

    def __post_init__(self):
        for kind, t in self.ops.items():
            for f in _TIMED_FIELDS:
                if getattr(t, f) < 0:
                    raise ValidationError(f"liberty entry {kind}.{f} is negative")
        if self.reg_clk_to_q < 0 or self.pi_arrival < 0:
            raise ValidationError("liberty reg_clk_to_q / pi_arrival must be >= 0")

    @classmethod
    def default(cls) -> "PseudoLiberty":
        return cls()

    def check_basis(self, allowed_ops) -> "PseudoLiberty":
        missing = sorted(set(allowed_ops) - set(self.ops))
        if missing:
            raise ValidationError(f"liberty table missing op kinds: {missing}")
        return self

    def timing(self, kind: str) -> OpTiming:
        return self.ops[kind]

    def cap(self, kind: str) -> float:
        t = self.ops.get(kind)
        return t.input_pin_cap if t is not None else 0.0

    # -- config file (INI sections per op kind) -----------------------------

    @classmethod
    def from_file(cls, path: str) -> "PseudoLiberty":
        cp = configparser.ConfigParser()
        with open(path) as fh:
            cp.read_file(fh)
        ops = dict(_DEFAULT_OPS)
        kwargs = {}
        if cp.has_section("liberty"):
            sec = cp["liberty"]
            kwargs["reg_clk_to_q"] = sec.getfloat("reg_clk_to_q", 1.0)
            kwargs["pi_arrival"] = sec.getfloat("pi_arrival", 0.0)
        for section in cp.sections():
            if section == "liberty":
                continue
            kind = section.upper()
            base = ops.get(kind, OpTiming(0, 0, 0, 0, 0))
            vals = {f: cp[section].getfloat(f, getattr(base, f)) for f in _TIMED_FIELDS}
            ops[kind] = OpTiming(**vals)
        return cls(ops=ops, **kwargs)

    def to_ini(self) -> str:
        lines = ["[liberty]",
                 f"reg_clk_to_q = {self.reg_clk_to_q!r}",
                 f"pi_arrival = {self.pi_arrival!r}", ""]
        for kind in sorted(self.ops):
            t = self.ops[kind]
            lines.append(f"[{kind}]")
            for f in _TIMED_FIELDS:
                lines.append(f"{f} = {getattr(t, f)!r}")
            lines.append("")
        return "\n".join(lines)

    def fingerprint(self) -> str:
        obj = {"ops": {k: [getattr(t, f) for f in _TIMED_FIELDS]
                       for k, t in sorted(self.ops.items())},
               "reg_clk_to_q": self.reg_clk_to_q, "pi_arrival": self.pi_arrival}
        return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class TimingAnnotation:
    """Per-node timing results; immutable after run_pseudo_sta."""

    arrival: list[float]
    slew: list[float]
    load: list[float]
    level: list[int]
    slowest_pred: list[int]   # -1 at sources

    def to_json_obj(self) -> dict:
        return {"schema": "sta-1", "arrival": self.arrival, "slew": self.slew,
                "load": self.load, "level": self.level,
                "slowest_pred": self.slowest_pred}

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1) + "\n"


def run_pseudo_sta(g: BogGraph, lib: PseudoLiberty | None = None) -> TimingAnnotation:
    """Propagate arrival/slew/load/level in topological order.

    delay(v) = intrinsic(kind) + delay_per_fanout(kind) * fanout(v);
    REG outputs start at reg_clk_to_q, PIs at pi_arrival, constants at 0.
    slowest_pred holds the argmax fanin (constant fanins are not timing
    startpoints and are skipped unless a node has only constant fanins;
    ties break to the lowest node id).
    """
    lib = lib or PseudoLiberty.default()
    lib.check_basis(g.basis.allowed_ops)
    n = g.n_nodes
    fanout = g.fanouts()
    kinds = g.kinds
    fanins = g.fanins

    arrival = [0.0] * n
    slew = [0.0] * n
    load = [0.0] * n
    level = [0] * n
    pred = [-1] * n

    # load(v) = sum of sink input pin caps; REG D pins and POs load too
    cap = {k: lib.cap(k) for k in set(kinds)}
    for v, fs in enumerate(fanins):
        c = cap[kinds[v]]
        for f in fs:
            load[f] += c

    const_ids = {v for v, k in enumerate(kinds) if k in (CONST0, CONST1)}

    for v in range(n):
        k = kinds[v]
        if k == REG:
            arrival[v] = lib.reg_clk_to_q
            continue
        if k == PI:
            arrival[v] = lib.pi_arrival
            continue
        if k in (CONST0, CONST1):
            continue
        fs = fanins[v]
        if k == PO:
            delay = 0.0
            sl = 0.0
        else:
            t = lib.timing(k)
            delay = t.intrinsic_delay + t.delay_per_fanout * fanout[v]
            sl = t.intrinsic_slew + t.slew_per_fanout * fanout[v]
        lvl = 0
        for f in fs:
            if f >= v:
                raise CycleDetected(f"{g.design}: node {v} depends on {f}")
            if level[f] + 1 > lvl:
                lvl = level[f] + 1
        candidates = [f for f in fs if f not in const_ids] or list(fs)
        best = -1
        best_at = 0.0
        for f in candidates:
            if best == -1 or arrival[f] > best_at:
                best, best_at = f, arrival[f]
            elif arrival[f] == best_at and f < best:
                best = f
        arrival[v] = best_at + delay
        slew[v] = sl
        level[v] = lvl
        pred[v] = best

    return TimingAnnotation(arrival, slew, load, level, pred)


@dataclass(frozen=True)
class PathSample:
    """One source-to-endpoint path with per-node timing features."""

    endpoint: EndpointRef
    node_sequence: tuple[int, ...]          # source -> endpoint
    kind: str                               # "slowest" | "random"
    op_kinds: tuple[str, ...]
    fanout: tuple[int, ...]
    load: tuple[float, ...]
    slew: tuple[float, ...]
    arrival: tuple[float, ...]


def make_path_sample(g: BogGraph, ann: TimingAnnotation, ep: EndpointRef,
                     nodes: list[int], kind: str) -> PathSample:
    fo = g.fanouts()
    return PathSample(
        endpoint=ep,
        node_sequence=tuple(nodes),
        kind=kind,
        op_kinds=tuple(g.kinds[v] for v in nodes),
        fanout=tuple(fo[v] for v in nodes),
        load=tuple(ann.load[v] for v in nodes),
        slew=tuple(ann.slew[v] for v in nodes),
        arrival=tuple(ann.arrival[v] for v in nodes),
    )


def extract_slowest_path(g: BogGraph, ann: TimingAnnotation, ep: EndpointRef) -> PathSample:
    """Backtrace slowest_pred from the endpoint to a source."""
    if not any(e.id == ep.id and e.name == ep.name for e in g.endpoints):
        raise UnknownEndpoint(f"{g.design}: endpoint {ep.name} not in graph")
    nodes = [ep.id]
    v = ep.id
    while ann.slowest_pred[v] != -1:
        v = ann.slowest_pred[v]
        nodes.append(v)
    nodes.reverse()
    return make_path_sample(g, ann, ep, nodes, "slowest")


def compute_slack(arrival: float, clock_period: float) -> float:
    """Slack under a fixed clock: clock_period - arrival."""
    if clock_period <= 0:
        raise ValidationError(f"clock period must be positive, got {clock_period}")
    return clock_period - arrival


__all__ = [
    "OpTiming", "PseudoLiberty", "TimingAnnotation", "PathSample",
    "run_pseudo_sta", "extract_slowest_path", "make_path_sample", "compute_slack",
]
