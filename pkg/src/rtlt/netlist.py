"""Word-level RTL netlist IR.

A WordNetlist is the output of the frontend: typed signals, word-level
operators in three-address form (every operator writes a full signal),
registers, and a single clock. It is immutable by convention once
validated and is the input to bit blasting.

Serialization: the ``netlist-json`` interchange format (schema
``wordnet-1``, canonical key-sorted text) and a Verilog-subset emitter
that round-trips through the parser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CombinationalLoop, ValidationError, WidthMismatch

NETJSON_SCHEMA = "wordnet-1"

# Operator kinds and their arities. CONST takes no inputs; CONCAT is variadic.
OP_KINDS = ("AND", "OR", "XOR", "NOT", "MUX", "ADD", "SUB", "EQ", "LT", "CONCAT", "SLICE", "CONST")
_ARITY = {"AND": 2, "OR": 2, "XOR": 2, "NOT": 1, "MUX": 3, "ADD": 2, "SUB": 2,
          "EQ": 2, "LT": 2, "SLICE": 1, "CONST": 0}


@dataclass(frozen=True)
class Slice:
    """A bit range of a named signal, msb >= lsb, zero-based."""

    signal: str
    msb: int
    lsb: int

    @property
    def width(self) -> int:
        return self.msb - self.lsb + 1

    def to_json(self):
        return [self.signal, self.msb, self.lsb]

    @classmethod
    def from_json(cls, obj) -> "Slice":
        return cls(str(obj[0]), int(obj[1]), int(obj[2]))


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # "in" | "out"
    width: int


@dataclass(frozen=True)
class SignalDecl:
    name: str
    width: int
    kind: str  # "wire" | "register"


@dataclass(frozen=True)
class WordOp:
    """One word-level operator; output always covers a full signal."""

    kind: str
    inputs: tuple[Slice, ...]
    output: Slice
    value: int | None = None  # CONST only

    def to_json(self):
        rec = {"kind": self.kind,
               "inputs": [s.to_json() for s in self.inputs],
               "output": self.output.to_json()}
        if self.value is not None:
            rec["value"] = self.value
        return rec

    @classmethod
    def from_json(cls, rec) -> "WordOp":
        return cls(kind=str(rec["kind"]),
                   inputs=tuple(Slice.from_json(s) for s in rec["inputs"]),
                   output=Slice.from_json(rec["output"]),
                   value=rec.get("value"))


@dataclass(frozen=True)
class Register:
    q: str          # register output signal (full signal)
    d: Slice        # data expression root
    clock: str

    def to_json(self):
        return [self.q, self.d.to_json(), self.clock]

    @classmethod
    def from_json(cls, obj) -> "Register":
        return cls(str(obj[0]), Slice.from_json(obj[1]), str(obj[2]))


@dataclass
class WordNetlist:
    """Validated word-level netlist for a single flat module."""

    name: str
    ports: list[Port] = field(default_factory=list)
    signals: list[SignalDecl] = field(default_factory=list)
    operators: list[WordOp] = field(default_factory=list)
    registers: list[Register] = field(default_factory=list)
    clock: str | None = None
    source_spans: dict[str, tuple[str, int, int]] = field(default_factory=dict)

    # -- lookup helpers -------------------------------------------------

    def signal_map(self) -> dict[str, SignalDecl]:
        return {s.name: s for s in self.signals}

    def port_map(self) -> dict[str, Port]:
        return {p.name: p for p in self.ports}

    def width_of(self, name: str) -> int:
        return self.signal_map()[name].width

    def full_slice(self, name: str) -> Slice:
        return Slice(name, self.width_of(name) - 1, 0)

    def same_structure(self, other: "WordNetlist") -> bool:
        """Structural equality ignoring source spans."""
        return (self.name == other.name and self.ports == other.ports
                and self.signals == other.signals and self.operators == other.operators
                and self.registers == other.registers and self.clock == other.clock)

    # -- validation ------------------------------------------------------

    def validate(self) -> "WordNetlist":
        sigs = self.signal_map()
        if len(sigs) != len(self.signals):
            raise ValidationError(f"{self.name}: duplicate signal declaration")
        ports = self.port_map()
        for p in self.ports:
            if p.name not in sigs:
                raise ValidationError(f"{self.name}: port {p.name} has no signal declaration")
            if sigs[p.name].width != p.width:
                raise WidthMismatch(p.name, p.width, sigs[p.name].width)

        def check_slice(s: Slice, ctx: str):
            if s.signal not in sigs:
                raise ValidationError(f"{self.name}: {ctx} references undeclared signal {s.signal}")
            if s.signal == self.clock:
                raise ValidationError(f"{self.name}: {ctx} uses the clock as data")
            w = sigs[s.signal].width
            if not (0 <= s.lsb <= s.msb < w):
                raise WidthMismatch(f"{s.signal}[{s.msb}:{s.lsb}]", w, s.msb + 1)

        drivers: dict[str, str] = {}

        def add_driver(name: str, what: str):
            if name in drivers:
                raise ValidationError(f"{self.name}: signal {name} driven by both "
                                      f"{drivers[name]} and {what}")
            drivers[name] = what

        for p in self.ports:
            if p.direction == "in":
                add_driver(p.name, "input port")

        for i, op in enumerate(self.operators):
            if op.kind not in OP_KINDS:
                raise ValidationError(f"{self.name}: unknown operator kind {op.kind}")
            arity = _ARITY.get(op.kind)
            if arity is not None and len(op.inputs) != arity:
                raise ValidationError(f"{self.name}: {op.kind} arity {len(op.inputs)}")
            if op.kind == "CONCAT" and len(op.inputs) < 1:
                raise ValidationError(f"{self.name}: empty CONCAT")
            for s in op.inputs:
                check_slice(s, f"op#{i} {op.kind}")
            check_slice(op.output, f"op#{i} {op.kind} output")
            out = op.output
            if out.lsb != 0 or out.msb != sigs[out.signal].width - 1:
                raise ValidationError(f"{self.name}: op#{i} output must cover full signal {out.signal}")
            self._check_op_widths(op)
            add_driver(out.signal, f"op#{i} {op.kind}")

        for r in self.registers:
            if r.q not in sigs:
                raise ValidationError(f"{self.name}: register q {r.q} undeclared")
            if sigs[r.q].kind != "register":
                raise ValidationError(f"{self.name}: register q {r.q} declared as {sigs[r.q].kind}")
            check_slice(r.d, f"register {r.q}")
            if r.d.width != sigs[r.q].width:
                raise WidthMismatch(r.q, sigs[r.q].width, r.d.width)
            add_driver(r.q, "register")
            if self.clock is not None and r.clock != self.clock:
                raise ValidationError(f"{self.name}: register {r.q} on clock {r.clock}, "
                                      f"module clock is {self.clock}")

        for s in self.signals:
            if s.name == self.clock:
                continue
            if s.name not in drivers:
                raise ValidationError(f"{self.name}: signal {s.name} has no driver")
            if s.kind == "register" and drivers[s.name] != "register":
                raise ValidationError(f"{self.name}: register signal {s.name} driven combinationally")

        self._check_acyclic()
        return self

    def _check_op_widths(self, op: WordOp):
        w_out = op.output.width
        ws = [s.width for s in op.inputs]
        if op.kind in ("AND", "OR", "XOR", "ADD", "SUB"):
            if ws[0] != ws[1] or ws[0] != w_out:
                raise WidthMismatch(op.output.signal, w_out, ws[0] if ws[0] != w_out else ws[1])
        elif op.kind == "NOT":
            if ws[0] != w_out:
                raise WidthMismatch(op.output.signal, w_out, ws[0])
        elif op.kind == "MUX":
            if ws[0] != 1:
                raise WidthMismatch(f"{op.inputs[0].signal} (mux select)", 1, ws[0])
            if ws[1] != ws[2] or ws[1] != w_out:
                raise WidthMismatch(op.output.signal, w_out, ws[1] if ws[1] != w_out else ws[2])
        elif op.kind in ("EQ", "LT"):
            if ws[0] != ws[1]:
                raise WidthMismatch(op.output.signal, ws[0], ws[1])
            if w_out != 1:
                raise WidthMismatch(op.output.signal, 1, w_out)
        elif op.kind == "CONCAT":
            if sum(ws) != w_out:
                raise WidthMismatch(op.output.signal, w_out, sum(ws))
        elif op.kind == "SLICE":
            if ws[0] != w_out:
                raise WidthMismatch(op.output.signal, w_out, ws[0])
        elif op.kind == "CONST":
            if op.value is None or op.value < 0 or op.value >= (1 << w_out):
                raise ValidationError(f"{self.name}: CONST value {op.value} out of range "
                                      f"for width {w_out}")

    def _check_acyclic(self):
        # Combinational dependency graph over signals; registers break edges.
        # Iterative DFS: deep operator chains exceed the recursion limit.
        deps: dict[str, list[str]] = {}
        for op in self.operators:
            deps.setdefault(op.output.signal, [])
            for s in op.inputs:
                deps[op.output.signal].append(s.signal)
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {name: WHITE for name in deps}

        for root in sorted(deps):
            if color[root] != WHITE:
                continue
            color[root] = GRAY
            path = [root]
            stack = [iter(deps[root])]
            while stack:
                advanced = False
                for m in stack[-1]:
                    if m not in deps:
                        continue  # source signal (port or register)
                    c = color[m]
                    if c == GRAY:
                        i = path.index(m)
                        raise CombinationalLoop(path[i:] + [m])
                    if c == WHITE:
                        color[m] = GRAY
                        path.append(m)
                        stack.append(iter(deps[m]))
                        advanced = True
                        break
                if not advanced:
                    color[path.pop()] = BLACK
                    stack.pop()

    # -- serialization ----------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "schema": NETJSON_SCHEMA,
            "name": self.name,
            "clock": self.clock,
            "ports": [[p.name, p.direction, p.width] for p in self.ports],
            "signals": [[s.name, s.width, s.kind] for s in self.signals],
            "operators": [op.to_json() for op in self.operators],
            "registers": [r.to_json() for r in self.registers],
            "source_spans": {k: list(v) for k, v in sorted(self.source_spans.items())},
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "WordNetlist":
        if obj.get("schema") != NETJSON_SCHEMA:
            raise ValidationError(f"unsupported netlist schema: {obj.get('schema')!r}")
        return cls(
            name=str(obj["name"]),
            ports=[Port(str(n), str(d), int(w)) for n, d, w in obj["ports"]],
            signals=[SignalDecl(str(n), int(w), str(k)) for n, w, k in obj["signals"]],
            operators=[WordOp.from_json(r) for r in obj["operators"]],
            registers=[Register.from_json(r) for r in obj["registers"]],
            clock=obj.get("clock"),
            source_spans={k: (str(v[0]), int(v[1]), int(v[2]))
                          for k, v in obj.get("source_spans", {}).items()},
        )


def emit_netlist_json(net: WordNetlist) -> str:
    """Canonical key-sorted netlist-json text; parse(emit(net)) == net."""
    return json.dumps(net.to_json_obj(), sort_keys=True, indent=1) + "\n"


def parse_netlist_json(text: str) -> WordNetlist:
    return WordNetlist.from_json_obj(json.loads(text)).validate()


# -- Verilog emission ----------------------------------------------------

def _fmt_slice(s: Slice, widths: dict[str, int]) -> str:
    if s.lsb == 0 and s.msb == widths[s.signal] - 1:
        return s.signal
    if s.msb == s.lsb:
        return f"{s.signal}[{s.msb}]"
    return f"{s.signal}[{s.msb}:{s.lsb}]"


_INFIX = {"AND": "&", "OR": "|", "XOR": "^", "ADD": "+", "SUB": "-", "EQ": "==", "LT": "<"}


def _op_expr(op: WordOp, widths: dict[str, int]) -> str:
    ins = [_fmt_slice(s, widths) for s in op.inputs]
    if op.kind in _INFIX:
        return f"{ins[0]} {_INFIX[op.kind]} {ins[1]}"
    if op.kind == "NOT":
        return f"~{ins[0]}"
    if op.kind == "MUX":
        return f"{ins[0]} ? {ins[1]} : {ins[2]}"
    if op.kind == "CONCAT":
        return "{" + ", ".join(ins) + "}"
    if op.kind == "SLICE":
        return ins[0]
    if op.kind == "CONST":
        return f"{op.output.width}'d{op.value}"
    raise ValidationError(f"cannot format op kind {op.kind}")


def emit_verilog(net: WordNetlist) -> str:
    """Render a WordNetlist in the supported Verilog subset.

    Output parses back to a structurally identical netlist (one operator
    per continuous assign, so the parser introduces no temporaries).
    """
    widths = {s.name: s.width for s in net.signals}
    kinds = {s.name: s.kind for s in net.signals}

    def rng(w: int) -> str:
        return f"[{w - 1}:0] " if w > 1 else ""

    port_decls = []
    for p in net.ports:
        dire = "input" if p.direction == "in" else "output"
        reg = "reg " if p.direction == "out" and kinds[p.name] == "register" else ""
        port_decls.append(f"{dire} {reg}{rng(p.width)}{p.name}")
    lines = [f"module {net.name}(" + ", ".join(port_decls) + ");"]

    port_names = {p.name for p in net.ports}
    for s in net.signals:
        if s.name in port_names:
            continue
        kw = "reg" if s.kind == "register" else "wire"
        lines.append(f"  {kw} {rng(s.width)}{s.name};")

    for op in net.operators:
        lines.append(f"  assign {op.output.signal} = {_op_expr(op, widths)};")

    if net.registers:
        lines.append(f"  always @(posedge {net.clock}) begin")
        for r in net.registers:
            lines.append(f"    {r.q} <= {_fmt_slice(r.d, widths)};")
        lines.append("  end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


__all__ = [
    "NETJSON_SCHEMA", "OP_KINDS", "Slice", "Port", "SignalDecl", "WordOp",
    "Register", "WordNetlist", "emit_netlist_json", "parse_netlist_json",
    "emit_verilog",
]
