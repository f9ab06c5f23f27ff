"""Synthetic benchmark generator with computable ground-truth labels.

Stands in for a commercial synthesis flow: random register-rich word
netlists are generated, the SOG lowering is restructured by a
semantics-preserving local-rewrite pass (associativity rebalancing plus
the standard constant/double-inverter cleanup), and labels come from
pseudo-STA on the rewritten graph under a *different* delay table plus
Gaussian noise. That creates a learnable but non-trivial gap between the
modeled representation and the "netlist" the labels describe.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .bog import CONST0, CONST1, PI, PO, REG, BogGraph, OperatorBasis, bitblast
from .errors import ConfigError
from .features import LabelSet
from .netlist import (Port, Register, SignalDecl, Slice, WordNetlist, WordOp,
                      emit_netlist_json, emit_verilog)
from .sta import OpTiming, PseudoLiberty, run_pseudo_sta

# A plausible "post synthesis" delay table, deliberately different from
# the modeling defaults in sta.py.
ORACLE_LIBERTY = PseudoLiberty(ops={
    "NOT": OpTiming(0.45, 0.06, 0.8, 0.09, 0.02),
    "AND": OpTiming(1.15, 0.12, 1.0, 0.22, 0.05),
    "OR": OpTiming(0.95, 0.09, 1.0, 0.18, 0.04),
    "XOR": OpTiming(1.45, 0.15, 1.5, 0.33, 0.07),
    "MUX": OpTiming(1.55, 0.10, 1.3, 0.27, 0.05),
    "REG": OpTiming(0.0, 0.0, 1.1, 0.0, 0.0),
    "PO": OpTiming(0.0, 0.0, 0.6, 0.0, 0.0),
}, reg_clk_to_q=1.1, pi_arrival=0.0)


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 7
    design_count: int = 20
    size_range: tuple[int, int] = (500, 5000)
    rewrite_intensity: float = 0.5
    label_noise: float = 0.05
    oracle_liberty: PseudoLiberty = field(default_factory=lambda: ORACLE_LIBERTY)
    clock_quantile: float = 0.9   # per-design clock period = this label quantile

    def validate(self) -> "OracleConfig":
        if self.design_count < 1:
            raise ConfigError("design_count must be >= 1")
        lo, hi = self.size_range
        if lo < 10 or hi < lo:
            raise ConfigError(f"bad size range {self.size_range}")
        if not (0.0 <= self.rewrite_intensity <= 1.0):
            raise ConfigError("rewrite intensity must be in [0, 1]")
        if self.label_noise < 0:
            raise ConfigError("label noise must be >= 0")
        if not (0.0 < self.clock_quantile <= 1.0):
            raise ConfigError("clock quantile must be in (0, 1]")
        return self


# --- random word netlist generation ------------------------------------------

_WIDTHS = (1, 2, 4, 8, 16)
# rough SOG node cost per output bit, used to hit the size target
_OP_COST = {"AND": 1, "OR": 1, "XOR": 1, "NOT": 1, "MUX": 1,
            "ADD": 5, "SUB": 6, "EQ": 2, "LT": 5}
_OP_CHOICES = ("AND", "OR", "XOR", "NOT", "MUX", "ADD", "SUB", "EQ", "LT",
               "AND", "OR", "XOR", "ADD", "MUX")


def random_netlist(name: str, target_nodes: int, rng: np.random.Generator) -> WordNetlist:
    """Register-rich random design of roughly target_nodes SOG nodes."""
    signals: list[SignalDecl] = [SignalDecl("clk", 1, "wire")]
    ports: list[Port] = [Port("clk", "in", 1)]
    pool: dict[int, list[str]] = {w: [] for w in _WIDTHS}
    operators: list[WordOp] = []
    registers: list[Register] = []

    def declare(name_: str, width: int, kind: str = "wire"):
        signals.append(SignalDecl(name_, width, kind))
        return name_

    n_inputs = int(rng.integers(2, 6))
    for i in range(n_inputs):
        w = int(rng.choice(_WIDTHS))
        nm = declare(f"in{i}", w)
        ports.append(Port(nm, "in", w))
        pool[w].append(nm)

    # first registers cover every width so pick() always has a candidate
    n_regs = max(len(_WIDTHS), target_nodes // 40)
    reg_names = []
    for i in range(n_regs):
        w = _WIDTHS[i] if i < len(_WIDTHS) else int(rng.choice(_WIDTHS))
        nm = declare(f"r{i}", w, "register")
        reg_names.append(nm)
        pool[w].append(nm)

    def pick(width: int) -> Slice:
        """A width-sized operand slice, biased toward recent signals."""
        cands = [(w, nm) for w in _WIDTHS if w >= width for nm in pool[w]]
        idx = len(cands) - 1 - int(rng.integers(0, min(len(cands), 8)))
        w, nm = cands[idx]
        if w == width:
            return Slice(nm, width - 1, 0)
        lo = int(rng.integers(0, w - width + 1))
        return Slice(nm, lo + width - 1, lo)

    cost = 0
    t_i = 0
    while cost < target_nodes:
        if rng.random() < 0.25:
            # reduction chain (a & b & c & ...): gives the oracle rewrite
            # pass realistic rebalancing opportunities on register paths
            kind = str(rng.choice(("AND", "OR", "XOR")))
            w = int(rng.choice(_WIDTHS))
            length = int(rng.integers(3, 7))
            acc = pick(w)
            for j in range(length - 1):
                out = declare(f"t{t_i}", w)
                t_i += 1
                operators.append(WordOp(kind, (acc, pick(w)), Slice(out, w - 1, 0)))
                acc = Slice(out, w - 1, 0)
                pool[w].append(out)
                cost += _OP_COST[kind] * w
            continue
        kind = str(rng.choice(_OP_CHOICES))
        w = int(rng.choice(_WIDTHS[1:] if kind in ("ADD", "SUB", "LT") else _WIDTHS))
        out_w = 1 if kind in ("EQ", "LT") else w
        out = declare(f"t{t_i}", out_w)
        t_i += 1
        if kind == "NOT":
            ins = (pick(w),)
        elif kind == "MUX":
            ins = (pick(1), pick(w), pick(w))
        else:
            ins = (pick(w), pick(w))
        operators.append(WordOp(kind, ins, Slice(out, out_w - 1, 0)))
        pool[out_w].append(out)
        cost += _OP_COST[kind] * w

    for nm in reg_names:
        w = next(s.width for s in signals if s.name == nm)
        registers.append(Register(nm, pick(w), "clk"))

    n_outs = max(1, min(4, len(pool[1]) // 8))
    for i in range(n_outs):
        w = int(rng.choice(_WIDTHS))
        src = pick(w)
        nm = declare(f"out{i}", w)
        ports.append(Port(nm, "out", w))
        operators.append(WordOp("SLICE", (src,), Slice(nm, w - 1, 0)))

    net = WordNetlist(name=name, ports=ports, signals=signals,
                      operators=operators, registers=registers, clock="clk")
    return net.validate()


# --- semantics-preserving rewrite pass -----------------------------------------


def rebalance_graph(g: BogGraph, intensity: float, rng: np.random.Generator) -> BogGraph:
    """Associativity rebalancing of AND/OR/XOR chains.

    A chain node is flattened into its leaf operands and rebuilt as a
    balanced tree. Only unshared, non-endpoint interior nodes are
    absorbed (internal signal names need not survive "synthesis"; node
    identity is only guaranteed for registers, ports, and endpoints), so
    the graph stays functionally equivalent while its internal structure
    drifts away from the modeled representation.
    """
    fanout = g.fanouts()
    protected = {e.id for e in g.endpoints}

    def absorbable(v: int, kind: str) -> bool:
        return (g.kinds[v] == kind and fanout[v] == 1 and v not in protected)

    chosen: dict[int, bool] = {}
    for v, k in enumerate(g.kinds):
        if k in ("AND", "OR", "XOR") and any(absorbable(f, k) for f in g.fanins[v]):
            chosen[v] = bool(rng.random() < intensity)

    kinds2: list[str] = []
    fanins2: list[tuple[int, ...]] = []
    new_id: dict[int, int] = {}

    def emit(kind: str, fins: tuple[int, ...]) -> int:
        kinds2.append(kind)
        fanins2.append(fins)
        return len(kinds2) - 1

    def leaves_of(v: int, kind: str) -> list[int]:
        out: list[int] = []
        stack = [iter(g.fanins[v])]
        while stack:
            advanced = False
            for f in stack[-1]:
                if absorbable(f, kind):
                    stack.append(iter(g.fanins[f]))
                else:
                    out.append(f)
                    continue
                advanced = True
                break
            if not advanced:
                stack.pop()
        return out

    def build(root: int) -> int:
        # iterative post-order (deep chains exceed the recursion limit)
        stack = [root]
        while stack:
            v = stack[-1]
            if v in new_id:
                stack.pop()
                continue
            k = g.kinds[v]
            if k in ("AND", "OR", "XOR") and chosen.get(v):
                operands = leaves_of(v, k)
            else:
                operands = list(g.fanins[v])
            missing = [f for f in operands if f not in new_id]
            if missing:
                stack.extend(missing)
                continue
            if k in ("AND", "OR", "XOR") and chosen.get(v):
                leaves = [new_id[f] for f in operands]
                while len(leaves) > 1:
                    nxt = []
                    for i in range(0, len(leaves) - 1, 2):
                        nxt.append(emit(k, (leaves[i], leaves[i + 1])))
                    if len(leaves) % 2:
                        nxt.append(leaves[-1])
                    leaves = nxt
                new_id[v] = leaves[0]
            else:
                new_id[v] = emit(k, tuple(new_id[f] for f in operands))
            stack.pop()
        return new_id[root]

    # sources and registers first, preserving relative order
    for v, k in enumerate(g.kinds):
        if k in (REG, PI, CONST0, CONST1):
            new_id[v] = emit(k, ())
    for v, k in enumerate(g.kinds):
        if k == PO:
            build(g.fanins[v][0])
    for r in g.reg_ids:
        build(g.fanins[r][0])
    for v in sorted(g.bit_names):
        build(v)
    for v, k in enumerate(g.kinds):
        if k == PO:
            new_id[v] = emit(PO, (new_id[g.fanins[v][0]],))
    for r in g.reg_ids:
        fanins2[new_id[r]] = (new_id[g.fanins[r][0]],)

    return BogGraph(
        design=g.design,
        basis=g.basis,
        kinds=kinds2,
        fanins=fanins2,
        bit_names={new_id[v]: n for v, n in g.bit_names.items()},
        name_to_id={n: new_id[v] for n, v in g.name_to_id.items()},
        endpoints=[replace(e, id=new_id[e.id]) for e in g.endpoints],
        pi_ids=[new_id[v] for v in g.pi_ids],
        reg_ids=[new_id[v] for v in g.reg_ids],
        po_ids=[new_id[v] for v in g.po_ids],
        po_names=list(g.po_names),
    ).validate()


# --- label generation -------------------------------------------------------------


def oracle_labels(net: WordNetlist, cfg: OracleConfig,
                  rng: np.random.Generator) -> LabelSet:
    """Deterministic "oracle synthesis": rewrite the SOG, time it with the
    oracle table, and add per-endpoint Gaussian noise."""
    g = bitblast(net, OperatorBasis.by_name("sog"))
    g2 = rebalance_graph(g, cfg.rewrite_intensity, rng)
    ann = run_pseudo_sta(g2, cfg.oracle_liberty)
    names = sorted(e.name for e in g2.endpoints)
    by_name = {e.name: e for e in g2.endpoints}
    noise = rng.normal(0.0, cfg.label_noise, size=len(names)) if cfg.label_noise > 0 \
        else np.zeros(len(names))
    entries = {}
    for nm, eps in zip(names, noise):
        entries[nm] = float(ann.arrival[by_name[nm].id] + eps)
    arr = np.asarray(list(entries.values()))
    clock = float(round(float(np.quantile(arr, cfg.clock_quantile)), 3))
    if clock <= 0:
        clock = float(np.max(arr)) or 1.0
    return LabelSet(design_id=net.name, clock_period=clock, entries=entries)


def generate_corpus(cfg: OracleConfig) -> list[tuple[WordNetlist, LabelSet]]:
    """Deterministic corpus of (netlist, labels) pairs."""
    cfg.validate()
    ss = np.random.SeedSequence(cfg.seed)
    children = ss.spawn(cfg.design_count)
    out = []
    lo, hi = cfg.size_range
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        target = int(rng.integers(lo, hi + 1))
        name = f"design_{i:03d}"
        net = random_netlist(name, target, rng)
        labels = oracle_labels(net, cfg, rng)
        out.append((net, labels))
    return out


# --- corpus layout ------------------------------------------------------------------


def write_corpus(corpus: list[tuple[WordNetlist, LabelSet]], out_dir: str) -> list[str]:
    paths = []
    for net, labels in corpus:
        d = os.path.join(out_dir, net.name)
        os.makedirs(d, exist_ok=True)
        vp = os.path.join(d, "design.v")
        jp = os.path.join(d, "design.netjson")
        lp = os.path.join(d, "labels.json")
        with open(vp, "w") as fh:
            fh.write(emit_verilog(net))
        with open(jp, "w") as fh:
            fh.write(emit_netlist_json(net))
        with open(lp, "w") as fh:
            fh.write(labels.dumps())
        paths += [vp, jp, lp]
    return paths


def load_corpus(corpus_dir: str) -> list[tuple[WordNetlist, LabelSet]]:
    from .parser import parse_rtl

    out = []
    for name in sorted(os.listdir(corpus_dir)):
        d = os.path.join(corpus_dir, name)
        jp = os.path.join(d, "design.netjson")
        lp = os.path.join(d, "labels.json")
        if not (os.path.isfile(jp) and os.path.isfile(lp)):
            continue
        with open(jp) as fh:
            net = parse_rtl(fh.read(), dialect="netlist-json")
        with open(lp) as fh:
            labels = LabelSet.from_json_obj(json.load(fh))
        out.append((net, labels))
    if not out:
        raise ConfigError(f"no designs found under {corpus_dir}")
    return out


__all__ = [
    "ORACLE_LIBERTY", "OracleConfig", "random_netlist", "rebalance_graph",
    "oracle_labels", "generate_corpus", "write_corpus", "load_corpus",
]
