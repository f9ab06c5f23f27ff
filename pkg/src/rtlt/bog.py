"""Boolean operator graphs: bit-level lowering of word netlists.

A BogGraph is a DAG of single-bit operators drawn from a chosen basis
(SOG, AIG, AIMG, XAG) plus REG/PI/PO/CONST marker nodes. It doubles as a
pseudo netlist: every node is a pseudo cell that pseudo-STA can time.

Node ids are topologically ordered over combinational edges (a node's
fanins have smaller ids), except REG nodes whose data fanin may point
forward; registers break all cycles.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (InterfaceMismatch, InternalLoweringError, LengthMismatch,
                     UnsupportedWidth, ValidationError)
from .netlist import Slice, WordNetlist

BOG_SCHEMA = "bog-1"

REG, PI, PO, CONST0, CONST1 = "REG", "PI", "PO", "CONST0", "CONST1"
SOURCE_KINDS = (REG, PI, CONST0, CONST1)

_BASIS_OPS = {
    "sog": frozenset({"AND", "OR", "NOT", "XOR", "MUX"}),
    "aig": frozenset({"AND", "NOT"}),
    "aimg": frozenset({"AND", "NOT", "MUX"}),
    "xag": frozenset({"XOR", "AND", "NOT"}),
}


@dataclass(frozen=True)
class OperatorBasis:
    name: str
    allowed_ops: frozenset[str]

    @classmethod
    def by_name(cls, name: str) -> "OperatorBasis":
        key = name.lower()
        if key not in _BASIS_OPS:
            raise ValueError(f"unknown basis {name!r} (choose from {sorted(_BASIS_OPS)})")
        return cls(key, _BASIS_OPS[key])


ALL_BASES = tuple(OperatorBasis.by_name(b) for b in ("sog", "aig", "aimg", "xag"))


@dataclass(frozen=True)
class EndpointRef:
    id: int
    name: str   # "signal[bit]"
    kind: str   # "register" | "primary-output"


_BIT_NAME_RE = re.compile(r"^(.*)\[(\d+)\]$")


def parse_bit_name(name: str) -> tuple[str, int]:
    m = _BIT_NAME_RE.match(name)
    if not m:
        raise ValueError(f"not a bit name: {name!r}")
    return m.group(1), int(m.group(2))


def _bit_sort_key(name: str) -> tuple[str, int]:
    return parse_bit_name(name)


@dataclass
class BogGraph:
    """Bit-level operator DAG over a fixed basis."""

    design: str
    basis: OperatorBasis
    kinds: list[str]
    fanins: list[tuple[int, ...]]
    bit_names: dict[int, str]             # canonical name per non-constant node
    name_to_id: dict[str, int]            # every signal bit, aliases included
    endpoints: list[EndpointRef]
    pi_ids: list[int] = field(default_factory=list)    # sorted by bit name
    reg_ids: list[int] = field(default_factory=list)
    po_ids: list[int] = field(default_factory=list)
    po_names: list[str] = field(default_factory=list)
    _fanouts: list[int] | None = None

    # -- basic queries ------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.kinds)

    def comb_node_count(self) -> int:
        allowed = self.basis.allowed_ops
        return sum(1 for k in self.kinds if k in allowed)

    def reg_count(self) -> int:
        return len(self.reg_ids)

    def fanouts(self) -> list[int]:
        if self._fanouts is None:
            fo = [0] * self.n_nodes
            for fs in self.fanins:
                for f in fs:
                    fo[f] += 1
            self._fanouts = fo
        return self._fanouts

    def endpoint_by_name(self, name: str) -> EndpointRef:
        for ep in self.endpoints:
            if ep.name == name:
                return ep
        from .errors import UnknownEndpoint
        raise UnknownEndpoint(f"{self.design}: no endpoint named {name!r}")

    def validate(self) -> "BogGraph":
        allowed = self.basis.allowed_ops
        for i, (k, fs) in enumerate(zip(self.kinds, self.fanins)):
            if k not in allowed and k not in (REG, PI, PO, CONST0, CONST1):
                raise InternalLoweringError(f"node {i} kind {k} outside basis {self.basis.name}")
            if k != REG:
                for f in fs:
                    if f >= i:
                        raise ValidationError(f"node {i} ({k}) has forward fanin {f}")
        names = list(self.bit_names.values())
        if len(set(names)) != len(names):
            raise ValidationError("bit_names is not injective")
        for i in self.bit_names:
            if self.kinds[i] in (CONST0, CONST1):
                raise ValidationError(f"constant node {i} carries a bit name")
        return self

    # -- simulation ----------------------------------------------------------

    def simulate(self, pi_assignment: list[int], reg_state: list[int]) -> tuple[list[int], list[int]]:
        """Evaluate one input/state vector -> (po_bits, next_reg_bits).

        pi_assignment follows pi_ids order, reg_state follows reg_ids order
        (both sorted by bit name).
        """
        if len(pi_assignment) != len(self.pi_ids):
            raise LengthMismatch(f"expected {len(self.pi_ids)} PI bits, got {len(pi_assignment)}")
        if len(reg_state) != len(self.reg_ids):
            raise LengthMismatch(f"expected {len(self.reg_ids)} register bits, got {len(reg_state)}")
        val = [0] * self.n_nodes
        pi_val = dict(zip(self.pi_ids, pi_assignment))
        reg_val = dict(zip(self.reg_ids, reg_state))
        for i, k in enumerate(self.kinds):
            if k == "AND":
                a, b = self.fanins[i]
                val[i] = val[a] & val[b]
            elif k == "NOT":
                val[i] = 1 - val[self.fanins[i][0]]
            elif k == "OR":
                a, b = self.fanins[i]
                val[i] = val[a] | val[b]
            elif k == "XOR":
                a, b = self.fanins[i]
                val[i] = val[a] ^ val[b]
            elif k == "MUX":
                s, a, b = self.fanins[i]
                val[i] = val[a] if val[s] else val[b]
            elif k == PI:
                val[i] = pi_val[i] & 1
            elif k == REG:
                val[i] = reg_val[i] & 1
            elif k == CONST1:
                val[i] = 1
            elif k == PO:
                val[i] = val[self.fanins[i][0]]
        po_bits = [val[i] for i in self.po_ids]
        next_reg = [val[self.fanins[r][0]] for r in self.reg_ids]
        return po_bits, next_reg

    def eval_packed(self, source_words: dict[int, np.ndarray], n_words: int) -> np.ndarray:
        """Bit-parallel evaluation: 64 vectors per uint64 word.

        source_words maps PI/REG node ids to uint64 arrays of length
        n_words; missing sources evaluate to 0. Returns the full node
        value matrix (n_nodes, n_words).
        """
        vals = np.zeros((self.n_nodes, n_words), dtype=np.uint64)
        for i, k in enumerate(self.kinds):
            fs = self.fanins[i]
            if k == "AND":
                np.bitwise_and(vals[fs[0]], vals[fs[1]], out=vals[i])
            elif k == "NOT":
                np.bitwise_not(vals[fs[0]], out=vals[i])
            elif k == "OR":
                np.bitwise_or(vals[fs[0]], vals[fs[1]], out=vals[i])
            elif k == "XOR":
                np.bitwise_xor(vals[fs[0]], vals[fs[1]], out=vals[i])
            elif k == "MUX":
                s, a, b = fs
                vals[i] = (vals[s] & vals[a]) | (~vals[s] & vals[b])
            elif k in (PI, REG):
                w = source_words.get(i)
                if w is not None:
                    vals[i] = w
            elif k == CONST1:
                vals[i] = ~np.uint64(0)
            elif k == PO:
                vals[i] = vals[fs[0]]
        return vals

    # -- named output functions (for equivalence) -----------------------------

    def output_functions(self) -> dict[str, int]:
        """Map output name -> node whose value realizes it.

        Register next-state functions (named by the register bit) and
        primary outputs.
        """
        out: dict[str, int] = {}
        for r in self.reg_ids:
            out[self.bit_names[r]] = self.fanins[r][0]
        for po, name in zip(self.po_ids, self.po_names):
            out[name] = po
        return out

    def source_names(self) -> dict[int, str]:
        names = {}
        for i in self.pi_ids + self.reg_ids:
            names[i] = self.bit_names[i]
        return names

    def backward_cone(self, node: int) -> list[int]:
        """All nodes feeding `node`, stopping at REG/PI sources; ascending ids."""
        seen = {node}
        stack = [node]
        while stack:
            v = stack.pop()
            if self.kinds[v] in (REG, PI, CONST0, CONST1):
                continue
            for f in self.fanins[v]:
                if f not in seen:
                    seen.add(f)
                    stack.append(f)
        return sorted(seen)

    # -- serialization ---------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "schema": BOG_SCHEMA,
            "design": self.design,
            "basis": self.basis.name,
            "nodes": [[k, list(fs)] for k, fs in zip(self.kinds, self.fanins)],
            "bit_names": [[i, n] for i, n in sorted(self.bit_names.items())],
            "name_to_id": {n: i for n, i in sorted(self.name_to_id.items())},
            "endpoints": [[e.id, e.name, e.kind] for e in self.endpoints],
            "pi_ids": self.pi_ids,
            "reg_ids": self.reg_ids,
            "po_ids": self.po_ids,
            "po_names": self.po_names,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BogGraph":
        if obj.get("schema") != BOG_SCHEMA:
            raise ValidationError(f"unsupported bog schema: {obj.get('schema')!r}")
        g = cls(
            design=str(obj["design"]),
            basis=OperatorBasis.by_name(obj["basis"]),
            kinds=[str(k) for k, _ in obj["nodes"]],
            fanins=[tuple(int(x) for x in fs) for _, fs in obj["nodes"]],
            bit_names={int(i): str(n) for i, n in obj["bit_names"]},
            name_to_id={str(n): int(i) for n, i in obj["name_to_id"].items()},
            endpoints=[EndpointRef(int(i), str(n), str(k)) for i, n, k in obj["endpoints"]],
            pi_ids=[int(i) for i in obj["pi_ids"]],
            reg_ids=[int(i) for i in obj["reg_ids"]],
            po_ids=[int(i) for i in obj["po_ids"]],
            po_names=[str(n) for n in obj["po_names"]],
        )
        return g.validate()


def emit_bog_json(g: BogGraph) -> str:
    return json.dumps(g.to_json_obj(), sort_keys=True, indent=1) + "\n"


def parse_bog_json(text: str) -> BogGraph:
    return BogGraph.from_json_obj(json.loads(text))


# --- graph construction -------------------------------------------------------


class _Builder:
    """Creates nodes in the target basis; primitive makers expand any
    operator outside the basis into its fixed recipe."""

    def __init__(self, basis: OperatorBasis):
        self.basis = basis
        self.kinds: list[str] = []
        self.fanins: list[tuple[int, ...]] = []
        self._const = {0: None, 1: None}

    def _new(self, kind: str, fanins: tuple[int, ...]) -> int:
        if kind not in self.basis.allowed_ops and kind not in (REG, PI, PO, CONST0, CONST1):
            raise InternalLoweringError(f"attempted {kind} node in basis {self.basis.name}")
        self.kinds.append(kind)
        self.fanins.append(fanins)
        return len(self.kinds) - 1

    def const(self, v: int) -> int:
        if self._const[v] is None:
            self._const[v] = self._new(CONST1 if v else CONST0, ())
        return self._const[v]

    def pi(self) -> int:
        return self._new(PI, ())

    def reg(self) -> int:
        return self._new(REG, ())

    def po(self, driver: int) -> int:
        return self._new(PO, (driver,))

    def set_reg_d(self, reg_id: int, d: int):
        self.fanins[reg_id] = (d,)

    def not_(self, a: int) -> int:
        return self._new("NOT", (a,))

    def and_(self, a: int, b: int) -> int:
        return self._new("AND", (a, b))

    def or_(self, a: int, b: int) -> int:
        if "OR" in self.basis.allowed_ops:
            return self._new("OR", (a, b))
        return self.not_(self.and_(self.not_(a), self.not_(b)))

    def xor_(self, a: int, b: int) -> int:
        if "XOR" in self.basis.allowed_ops:
            return self._new("XOR", (a, b))
        if "MUX" in self.basis.allowed_ops:
            return self._new("MUX", (a, self.not_(b), b))
        # x ^ y = NOT(AND(NOT(AND(x, NOT y)), NOT(AND(NOT x, y))))
        t1 = self.not_(self.and_(a, self.not_(b)))
        t2 = self.not_(self.and_(self.not_(a), b))
        return self.not_(self.and_(t1, t2))

    def mux(self, s: int, a: int, b: int) -> int:
        if "MUX" in self.basis.allowed_ops:
            return self._new("MUX", (s, a, b))
        # OR-of-ANDs via De Morgan
        return self.or_(self.and_(s, a), self.and_(self.not_(s), b))


def _lower_word_op(b: _Builder, kind: str, ins: list[list[int]], width: int,
                   value: int | None) -> list[int]:
    """Fixed lowering recipe per word operator (bit lists LSB-first)."""
    if kind in ("AND", "OR", "XOR"):
        f = {"AND": b.and_, "OR": b.or_, "XOR": b.xor_}[kind]
        return [f(x, y) for x, y in zip(ins[0], ins[1])]
    if kind == "NOT":
        return [b.not_(x) for x in ins[0]]
    if kind == "MUX":
        sel = ins[0][0]
        return [b.mux(sel, x, y) for x, y in zip(ins[1], ins[2])]
    if kind in ("ADD", "SUB"):
        xs, ys = ins
        carry = b.const(1 if kind == "SUB" else 0)
        outs = []
        for x, y in zip(xs, ys):
            if kind == "SUB":
                y = b.not_(y)
            axb = b.xor_(x, y)
            outs.append(b.xor_(axb, carry))
            carry = b.or_(b.and_(x, y), b.and_(axb, carry))
        return outs
    if kind == "EQ":
        acc = None
        for x, y in zip(ins[0], ins[1]):
            xn = b.not_(b.xor_(x, y))
            acc = xn if acc is None else b.and_(acc, xn)
        return [acc]
    if kind == "LT":
        # unsigned borrow chain from the LSB
        borrow = b.const(0)
        for x, y in zip(ins[0], ins[1]):
            eq = b.not_(b.xor_(x, y))
            borrow = b.or_(b.and_(b.not_(x), y), b.and_(eq, borrow))
        return [borrow]
    if kind == "CONCAT":
        out: list[int] = []
        for part in reversed(ins):  # inputs are MSB-first
            out.extend(part)
        return out
    if kind == "SLICE":
        return ins[0]
    if kind == "CONST":
        return [b.const((value >> k) & 1) for k in range(width)]
    raise InternalLoweringError(f"no lowering recipe for {kind}")


def bitblast(net: WordNetlist, basis: OperatorBasis) -> BogGraph:
    """Bit-blast a validated word netlist into the given basis.

    Every word signal of width w yields w bit nodes named "sig[k]";
    register bits become REG nodes whose D inputs are timing endpoints.
    Constant propagation and double-inverter elimination run after
    lowering; no other optimization.
    """
    for s in net.signals:
        if s.width < 1:
            raise UnsupportedWidth(f"{net.name}: signal {s.name} has width {s.width}")

    b = _Builder(basis)
    # constants first so folded nodes never gain forward references
    b.const(0)
    b.const(1)
    bits: dict[str, list[int]] = {}
    clock = net.clock

    reg_decl = [s.name for s in net.signals if s.kind == "register"]
    for name in reg_decl:
        bits[name] = [b.reg() for _ in range(net.width_of(name))]
    for p in net.ports:
        if p.direction == "in" and p.name != clock:
            bits[p.name] = [b.pi() for _ in range(p.width)]

    op_for_signal = {op.output.signal: op for op in net.operators}

    def realize(name: str):
        # iterative dependency-order lowering (deep nets exceed the
        # recursion limit)
        stack = [name]
        while stack:
            nm = stack[-1]
            if nm in bits:
                stack.pop()
                continue
            op = op_for_signal[nm]
            missing = [s.signal for s in op.inputs if s.signal not in bits]
            if missing:
                stack.extend(missing)
                continue
            ins = [bits[s.signal][s.lsb:s.msb + 1] for s in op.inputs]
            bits[nm] = _lower_word_op(b, op.kind, ins, op.output.width, op.value)
            stack.pop()

    def slice_bits(s: Slice) -> list[int]:
        realize(s.signal)
        return bits[s.signal][s.lsb:s.msb + 1]

    for s in net.signals:
        if s.name != clock:
            realize(s.name)

    for r in net.registers:
        d_bits = slice_bits(r.d)
        for q_node, d_node in zip(bits[r.q], d_bits):
            b.set_reg_d(q_node, d_node)

    po_records = []  # (node, name)
    for p in net.ports:
        if p.direction == "out":
            for k, drv in enumerate(bits[p.name]):
                po_records.append((b.po(drv), f"{p.name}[{k}]"))

    g = _finalize(b, net, bits, po_records)
    return g.validate()


def _finalize(b: _Builder, net: WordNetlist, bits: dict[str, list[int]],
              po_records: list[tuple[int, str]]) -> BogGraph:
    """Post-lowering cleanup: constant propagation, double-inverter
    elimination, then liveness compaction and name assignment."""
    kinds, fanins = b.kinds, b.fanins
    n = len(kinds)
    repl = list(range(n))

    def find(i: int) -> int:
        while repl[i] != i:
            repl[i] = repl[repl[i]]
            i = repl[i]
        return i

    def is_const(i: int) -> int | None:
        k = kinds[i]
        if k == CONST0:
            return 0
        if k == CONST1:
            return 1
        return None

    for v in range(n):
        k = kinds[v]
        if k in (REG, PI, CONST0, CONST1):
            continue
        fs = tuple(find(f) for f in fanins[v])
        fanins[v] = fs
        if k == PO:
            continue
        # iterate because an in-place kind change may enable another rule
        while True:
            k = kinds[v]
            fs = fanins[v]
            cs = [is_const(f) for f in fs]
            if k == "NOT":
                if cs[0] is not None:
                    repl[v] = b.const(1 - cs[0])
                elif kinds[fs[0]] == "NOT":
                    repl[v] = find(fanins[fs[0]][0])
            elif k == "AND":
                if 0 in cs:
                    repl[v] = b.const(0)
                elif cs[0] == 1:
                    repl[v] = fs[1]
                elif cs[1] == 1:
                    repl[v] = fs[0]
            elif k == "OR":
                if 1 in cs:
                    repl[v] = b.const(1)
                elif cs[0] == 0:
                    repl[v] = fs[1]
                elif cs[1] == 0:
                    repl[v] = fs[0]
            elif k == "XOR":
                if cs[0] is not None and cs[1] is not None:
                    repl[v] = b.const(cs[0] ^ cs[1])
                elif cs[0] == 0:
                    repl[v] = fs[1]
                elif cs[1] == 0:
                    repl[v] = fs[0]
                elif cs[0] == 1:
                    kinds[v] = "NOT"
                    fanins[v] = (fs[1],)
                    continue
                elif cs[1] == 1:
                    kinds[v] = "NOT"
                    fanins[v] = (fs[0],)
                    continue
            elif k == "MUX":
                s, a, bb = fs
                if cs[0] is not None:
                    repl[v] = a if cs[0] == 1 else bb
                elif cs[1] == 1 and cs[2] == 0:
                    repl[v] = s
                elif cs[1] == 0 and cs[2] == 1:
                    kinds[v] = "NOT"
                    fanins[v] = (s,)
                    continue
            break

    # `b.const` may have appended nodes at the end; refresh n
    n = len(kinds)
    while len(repl) < n:
        repl.append(len(repl))

    for v in range(n):
        if kinds[v] == REG or kinds[v] == PO:
            fanins[v] = tuple(find(f) for f in fanins[v])

    # Liveness: roots are PO/REG nodes plus every named signal bit.
    live = [False] * n
    stack: list[int] = []

    def mark(i: int):
        if not live[i]:
            live[i] = True
            stack.append(i)

    for po, _ in po_records:
        mark(po)
    for name, nodes in bits.items():
        for node in nodes:
            mark(find(node))
    while stack:
        v = stack.pop()
        for f in fanins[v]:
            mark(f)

    new_id = [-1] * n
    kinds2: list[str] = []
    fanins2: list[tuple[int, ...]] = []
    for v in range(n):
        if live[v] and repl[v] == v:
            new_id[v] = len(kinds2)
            kinds2.append(kinds[v])
            fanins2.append(fanins[v])
    for i, fs in enumerate(fanins2):
        fanins2[i] = tuple(new_id[find(f)] for f in fs)

    def resolve(old: int) -> int:
        return new_id[find(old)]

    # Names: registers and input ports first, then remaining signals in
    # declaration order; first name wins, aliases go to name_to_id only.
    bit_names: dict[int, str] = {}
    name_to_id: dict[str, int] = {}
    reg_set = {s.name for s in net.signals if s.kind == "register"}
    ordered = ([s.name for s in net.signals if s.name in reg_set]
               + [p.name for p in net.ports if p.direction == "in" and p.name != net.clock]
               + [s.name for s in net.signals
                  if s.name not in reg_set and s.name != net.clock
                  and not any(p.name == s.name and p.direction == "in" for p in net.ports)])
    for name in ordered:
        for k, node in enumerate(bits[name]):
            nid = resolve(node)
            bname = f"{name}[{k}]"
            name_to_id[bname] = nid
            if kinds2[nid] not in (CONST0, CONST1) and nid not in bit_names:
                bit_names[nid] = bname

    reg_ids = sorted((resolve(node) for name in reg_set for node in bits[name]),
                     key=lambda i: _bit_sort_key(bit_names[i]))
    pi_ids = sorted((resolve(node) for p in net.ports
                     if p.direction == "in" and p.name != net.clock
                     for node in bits[p.name]),
                    key=lambda i: _bit_sort_key(bit_names[i]))

    po_pairs = sorted(((resolve(po), nm) for po, nm in po_records),
                      key=lambda t: _bit_sort_key(t[1]))
    po_ids = [i for i, _ in po_pairs]
    po_names = [nm for _, nm in po_pairs]

    endpoints: list[EndpointRef] = []
    for r in sorted(net.registers, key=lambda r: r.q):
        for k, q_node in enumerate(bits[r.q]):
            q_id = resolve(q_node)
            d_id = fanins2[q_id][0]
            endpoints.append(EndpointRef(d_id, f"{r.q}[{k}]", "register"))
    for po_id, nm in po_pairs:
        drv = fanins2[po_id][0]
        if kinds2[drv] == REG:
            # the register endpoint already covers this bit
            continue
        endpoints.append(EndpointRef(po_id, nm, "primary-output"))
    endpoints.sort(key=lambda e: _bit_sort_key(e.name))

    return BogGraph(
        design=net.name,
        basis=b.basis,
        kinds=kinds2,
        fanins=fanins2,
        bit_names=bit_names,
        name_to_id=name_to_id,
        endpoints=endpoints,
        pi_ids=pi_ids,
        reg_ids=reg_ids,
        po_ids=po_ids,
        po_names=po_names,
    )


# --- equivalence checking ------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    mode: str                       # "exhaustive" | "random" | "mixed"
    counterexample: dict | None     # {"output": name, "assignment": {src: bit}}
    outputs_checked: int

    def __bool__(self) -> bool:
        return self.equivalent


def _support_names(g: BogGraph, node: int) -> set[str]:
    srcs = g.source_names()
    return {srcs[v] for v in g.backward_cone(node) if v in srcs}


def _truth_table_words(k: int, j: int) -> np.ndarray:
    """Packed truth-table column for input j of k inputs (2^k rows).

    Bit r of word w holds input j of row w*64 + r.
    """
    rows = 1 << k
    if rows <= 64:
        word = 0
        for r in range(rows):
            if (r >> j) & 1:
                word |= 1 << r
        return np.array([word], dtype=np.uint64)
    n_words = rows // 64
    out = np.empty(n_words, dtype=np.uint64)
    if j < 6:
        word = 0
        for r in range(64):
            if (r >> j) & 1:
                word |= 1 << r
        out[:] = np.uint64(word)
    else:
        ones = ~np.uint64(0)
        period = 1 << (j - 6)
        for w in range(n_words):
            out[w] = ones if (w // period) % 2 else np.uint64(0)
    return out


def _eval_cone_packed(g: BogGraph, node: int, cone: list[int],
                      source_words: dict[int, np.ndarray], n_words: int) -> np.ndarray:
    vals: dict[int, np.ndarray] = {}
    zero = np.zeros(n_words, dtype=np.uint64)
    for v in cone:
        k = g.kinds[v]
        fs = g.fanins[v]
        if k in (PI, REG):
            vals[v] = source_words.get(v, zero)
        elif k == CONST0:
            vals[v] = zero
        elif k == CONST1:
            vals[v] = np.full(n_words, ~np.uint64(0), dtype=np.uint64)
        elif k == "AND":
            vals[v] = vals[fs[0]] & vals[fs[1]]
        elif k == "OR":
            vals[v] = vals[fs[0]] | vals[fs[1]]
        elif k == "XOR":
            vals[v] = vals[fs[0]] ^ vals[fs[1]]
        elif k == "NOT":
            vals[v] = ~vals[fs[0]]
        elif k == "MUX":
            s, a, b = fs
            vals[v] = (vals[s] & vals[a]) | (~vals[s] & vals[b])
        elif k == PO:
            vals[v] = vals[fs[0]]
        else:
            raise InternalLoweringError(f"cannot evaluate kind {k}")
    return vals[node]


def check_equivalence(g1: BogGraph, g2: BogGraph, max_exhaustive_inputs: int = 12,
                      random_vectors: int = 10000, seed: int = 0) -> EquivalenceResult:
    """Compare two graphs output-by-output.

    Output cones with at most max_exhaustive_inputs support variables are
    checked exhaustively; larger cones are checked on seeded random
    vectors (at least random_vectors of them), which makes the verdict
    probabilistic for those outputs.
    """
    for what, a, bnames in (
        ("PI", sorted(g1.bit_names[i] for i in g1.pi_ids),
         sorted(g2.bit_names[i] for i in g2.pi_ids)),
        ("REG", sorted(g1.bit_names[i] for i in g1.reg_ids),
         sorted(g2.bit_names[i] for i in g2.reg_ids)),
        ("PO", sorted(g1.po_names), sorted(g2.po_names)),
        ("endpoint", sorted(e.name for e in g1.endpoints),
         sorted(e.name for e in g2.endpoints)),
    ):
        if a != bnames:
            raise InterfaceMismatch(f"{what} name sets differ: {a[:4]}... vs {bnames[:4]}...")

    outs1, outs2 = g1.output_functions(), g2.output_functions()
    names = sorted(outs1, key=_bit_sort_key)
    src1 = {n: i for i, n in g1.source_names().items()}
    src2 = {n: i for i, n in g2.source_names().items()}

    big_outputs: list[str] = []
    used_exhaustive = False
    for name in names:
        n1, n2 = outs1[name], outs2[name]
        support = sorted(_support_names(g1, n1) | _support_names(g2, n2), key=_bit_sort_key)
        if len(support) > max_exhaustive_inputs:
            big_outputs.append(name)
            continue
        used_exhaustive = True
        k = len(support)
        rows = 1 << k
        n_words = max(1, rows // 64)
        sw1 = {src1[s]: _truth_table_words(k, j) for j, s in enumerate(support)}
        sw2 = {src2[s]: _truth_table_words(k, j) for j, s in enumerate(support)}
        v1 = _eval_cone_packed(g1, n1, g1.backward_cone(n1), sw1, n_words)
        v2 = _eval_cone_packed(g2, n2, g2.backward_cone(n2), sw2, n_words)
        diff = v1 ^ v2
        if rows < 64:
            diff &= np.uint64((1 << rows) - 1)
        bad = np.nonzero(diff)[0]
        if bad.size:
            w = int(bad[0])
            bit = (int(diff[w]) & -int(diff[w])).bit_length() - 1
            row = w * 64 + bit
            assignment = {s: (row >> j) & 1 for j, s in enumerate(support)}
            return EquivalenceResult(False, "exhaustive",
                                     {"output": name, "assignment": assignment},
                                     outputs_checked=len(names))

    if big_outputs:
        rng = np.random.default_rng(seed)
        n_words = (random_vectors + 63) // 64
        all_names = sorted(set(src1), key=_bit_sort_key)
        words = {n: rng.integers(0, 2 ** 64, size=n_words, dtype=np.uint64)
                 for n in all_names}
        vals1 = g1.eval_packed({src1[n]: w for n, w in words.items()}, n_words)
        vals2 = g2.eval_packed({src2[n]: w for n, w in words.items()}, n_words)
        for name in big_outputs:
            diff = vals1[outs1[name]] ^ vals2[outs2[name]]
            bad = np.nonzero(diff)[0]
            if bad.size:
                w = int(bad[0])
                bit = (int(diff[w]) & -int(diff[w])).bit_length() - 1
                assignment = {n: int((int(words[n][w]) >> bit) & 1) for n in all_names}
                return EquivalenceResult(False, "random",
                                         {"output": name, "assignment": assignment},
                                         outputs_checked=len(names))

    mode = ("mixed" if big_outputs and used_exhaustive
            else "random" if big_outputs else "exhaustive")
    return EquivalenceResult(True, mode, None, outputs_checked=len(names))


__all__ = [
    "BOG_SCHEMA", "OperatorBasis", "ALL_BASES", "EndpointRef", "BogGraph",
    "bitblast", "check_equivalence", "EquivalenceResult", "emit_bog_json",
    "parse_bog_json", "parse_bit_name", "SOURCE_KINDS",
]
