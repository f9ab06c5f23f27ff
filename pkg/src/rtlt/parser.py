"""Frontend: parse a restricted synthesizable Verilog subset into WordNetlist.

Supported constructs: module/endmodule, input/output/wire/reg declarations
with [msb:lsb] ranges (ANSI or classic port style), continuous assigns over
& | ^ ~ + - == < ?: {} [] [i:j], sized integer literals, and
always @(posedge clk) blocks of non-blocking assignments with if/else
(lowered to MUX). Everything else raises UnsupportedConstruct.

parse_rtl also accepts the canonical netlist-json interchange so users of
real synthesis flows can bypass the parser.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import HdlSyntaxError, UnsupportedConstruct, WidthMismatch
from .netlist import Port, Register, SignalDecl, Slice, WordNetlist, WordOp, parse_netlist_json

# Keywords we recognise but do not support; seeing one is an immediate,
# precise rejection rather than a confusing parse error downstream.
_UNSUPPORTED_KEYWORDS = {
    "parameter", "localparam", "generate", "endgenerate", "genvar", "initial",
    "function", "endfunction", "task", "endtask", "negedge", "case", "casex",
    "casez", "for", "while", "repeat", "forever", "integer", "real", "signed",
    "inout", "always_ff", "always_comb", "always_latch", "specify", "defparam",
    "tri", "supply0", "supply1", "event", "fork", "join",
}

_KEYWORDS = {
    "module", "endmodule", "input", "output", "wire", "reg", "assign",
    "always", "posedge", "begin", "end", "if", "else",
} | _UNSUPPORTED_KEYWORDS

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<sized>\d+\s*'\s*[bodhBODH]\s*[0-9a-fA-F_xzXZ?]+)
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*|\\\S+)
  | (?P<op><=|==|[()\[\]{},;:?@=<&|^~+\-*/%!])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class _Tok:
    kind: str   # "sized" | "number" | "ident" | "op" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise HdlSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, tok_text, line, m.start() - line_start + 1))
        nl = tok_text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, 1))
    return toks


# -- expression AST (pre-elaboration) ----------------------------------------

@dataclass(frozen=True)
class _Ref:
    name: str
    msb: int | None  # None -> whole signal
    lsb: int | None
    line: int


@dataclass(frozen=True)
class _Lit:
    width: int
    value: int
    line: int


@dataclass(frozen=True)
class _Node:
    kind: str  # word op kind
    args: tuple
    line: int


class _Parser:
    def __init__(self, text: str, filename: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.filename = filename

    # -- token helpers ----------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("op", "ident")

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise HdlSyntaxError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def ident(self) -> _Tok:
        t = self.next()
        if t.kind != "ident":
            raise HdlSyntaxError(f"expected identifier, found {t.text!r}", t.line, t.col)
        if t.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(t.text, t.line)
        if t.text in _KEYWORDS:
            raise HdlSyntaxError(f"unexpected keyword {t.text!r}", t.line, t.col)
        return t

    def reject_unsupported(self):
        t = self.peek()
        if t.kind == "ident" and t.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(t.text, t.line)

    # -- module structure --------------------------------------------------

    def parse_module(self) -> WordNetlist:
        self.reject_unsupported()
        self.expect("module")
        name_tok = self.ident()
        net = WordNetlist(name=name_tok.text)
        self._decl_order: list[str] = []
        self._decls: dict[str, SignalDecl] = {}
        self._ports: list[Port] = []
        self._spans: dict[str, tuple[str, int, int]] = {}
        self._assigns: list[tuple[_Tok, object]] = []
        self._always: list[tuple[_Tok, list]] = []
        self._classic_port_names: list[str] | None = None

        if self.at("("):
            self.next()
            self._parse_port_list()
            self.expect(")")
        self.expect(";")

        while not self.at("endmodule"):
            t = self.peek()
            if t.kind == "eof":
                raise HdlSyntaxError("missing endmodule", t.line, t.col)
            self.reject_unsupported()
            if t.text in ("input", "output", "wire", "reg"):
                self._parse_decl()
            elif t.text == "assign":
                self._parse_assign()
            elif t.text == "always":
                self._parse_always()
            elif t.text == "module":
                raise UnsupportedConstruct("nested or multiple modules", t.line)
            else:
                raise HdlSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        self.expect("endmodule")
        tail = self.peek()
        if tail.kind != "eof":
            if tail.text == "module":
                raise UnsupportedConstruct("multiple modules per file", tail.line)
            raise HdlSyntaxError(f"trailing input after endmodule: {tail.text!r}", tail.line, tail.col)

        if self._classic_port_names is not None:
            declared = {p.name for p in self._ports}
            for pn in self._classic_port_names:
                if pn not in declared:
                    raise HdlSyntaxError(f"port {pn} has no direction declaration", name_tok.line,
                                         name_tok.col)
        net.ports = self._ports
        net.signals = [self._decls[n] for n in self._decl_order]
        net.source_spans = self._spans
        return self._elaborate(net)

    def _parse_range(self) -> tuple[int, int] | None:
        if not self.at("["):
            return None
        self.next()
        msb_tok = self.next()
        if msb_tok.kind != "number":
            raise HdlSyntaxError("expected constant msb", msb_tok.line, msb_tok.col)
        self.expect(":")
        lsb_tok = self.next()
        if lsb_tok.kind != "number":
            raise HdlSyntaxError("expected constant lsb", lsb_tok.line, lsb_tok.col)
        self.expect("]")
        msb, lsb = int(msb_tok.text), int(lsb_tok.text)
        if lsb != 0 or msb < 0:
            raise UnsupportedConstruct(f"range [{msb}:{lsb}] (only [w-1:0] ranges)", msb_tok.line)
        return msb, lsb

    def _declare(self, name_tok: _Tok, width: int, kind: str, direction: str | None):
        name = name_tok.text
        if self.at("["):
            raise UnsupportedConstruct("memory array declaration", name_tok.line)
        if name in self._decls:
            old = self._decls[name]
            # Classic style re-declaration: `output foo;` then `reg foo;`.
            if old.width != width:
                raise WidthMismatch(name, old.width, width, name_tok.line)
            if kind == "register" and old.kind == "wire":
                self._decls[name] = SignalDecl(name, width, "register")
            elif kind != "register" and direction is None:
                raise HdlSyntaxError(f"duplicate declaration of {name}", name_tok.line, name_tok.col)
        else:
            self._decls[name] = SignalDecl(name, width, kind)
            self._decl_order.append(name)
            self._spans[name] = (self.filename, name_tok.line, name_tok.col)
        if direction is not None:
            if any(p.name == name for p in self._ports):
                raise HdlSyntaxError(f"duplicate port {name}", name_tok.line, name_tok.col)
            self._ports.append(Port(name, direction, width))

    def _parse_one_port(self):
        t = self.peek()
        if t.text in ("input", "output"):
            direction = "in" if t.text == "input" else "out"
            self.next()
            kind = "wire"
            if self.peek().text in ("wire", "reg"):
                kind = "register" if self.next().text == "reg" else "wire"
            rng = self._parse_range()
            width = rng[0] + 1 if rng else 1
            name_tok = self.ident()
            self._declare(name_tok, width, kind, direction)
            return True
        return False

    def _parse_port_list(self):
        if self.at(")"):
            return
        if self.peek().text in ("input", "output"):
            self._parse_one_port()
            while self.at(","):
                self.next()
                if not self._parse_one_port():
                    raise HdlSyntaxError("expected port declaration", self.peek().line,
                                         self.peek().col)
        else:
            # classic style: bare identifiers, directions declared in body
            self._classic_port_names = [self.ident().text]
            while self.at(","):
                self.next()
                self._classic_port_names.append(self.ident().text)

    def _parse_decl(self):
        head = self.next()
        direction = {"input": "in", "output": "out"}.get(head.text)
        kind = "register" if head.text == "reg" else "wire"
        if direction is not None and self.peek().text in ("wire", "reg"):
            kind = "register" if self.next().text == "reg" else "wire"
        rng = self._parse_range()
        width = rng[0] + 1 if rng else 1
        while True:
            name_tok = self.ident()
            self._declare(name_tok, width, kind, direction)
            if self.at(","):
                self.next()
                continue
            break
        if self.at("="):
            raise UnsupportedConstruct("declaration with initializer", self.peek().line)
        self.expect(";")

    def _parse_assign(self):
        self.expect("assign")
        lhs = self.ident()
        if self.at("["):
            raise UnsupportedConstruct("assignment to a bit slice", lhs.line)
        self.expect("=")
        expr = self._parse_expr()
        self.expect(";")
        self._assigns.append((lhs, expr))

    def _parse_always(self):
        self.expect("always")
        self.expect("@")
        self.expect("(")
        edge = self.next()
        if edge.text != "posedge":
            if edge.text == "negedge":
                raise UnsupportedConstruct("negedge clocking", edge.line)
            raise UnsupportedConstruct(f"sensitivity list '{edge.text}' (only posedge)", edge.line)
        clk = self.ident()
        if self.at("or") or self.at(","):
            raise UnsupportedConstruct("multiple events in sensitivity list", self.peek().line)
        self.expect(")")
        stmts = self._parse_stmt_block()
        self._always.append((clk, stmts))

    def _parse_stmt_block(self) -> list:
        if self.at("begin"):
            self.next()
            stmts = []
            while not self.at("end"):
                if self.peek().kind == "eof":
                    t = self.peek()
                    raise HdlSyntaxError("missing end", t.line, t.col)
                stmts.extend(self._parse_stmt())
            self.expect("end")
            return stmts
        return self._parse_stmt()

    def _parse_stmt(self) -> list:
        self.reject_unsupported()
        t = self.peek()
        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self._parse_expr()
            self.expect(")")
            then_stmts = self._parse_stmt_block()
            else_stmts = []
            if self.at("else"):
                self.next()
                else_stmts = self._parse_stmt_block()
            return [("if", cond, then_stmts, else_stmts, t.line)]
        lhs = self.ident()
        if self.at("["):
            raise UnsupportedConstruct("non-blocking assignment to a bit slice", lhs.line)
        eq = self.next()
        if eq.text == "=":
            raise UnsupportedConstruct("blocking assignment in always block", eq.line)
        if eq.text != "<=":
            raise HdlSyntaxError(f"expected <=, found {eq.text!r}", eq.line, eq.col)
        rhs = self._parse_expr()
        self.expect(";")
        return [("nb", lhs, rhs)]

    # -- expressions (precedence climbing) ----------------------------------

    def _parse_expr(self):
        return self._parse_ternary()

    def _parse_ternary(self):
        cond = self._parse_or()
        if self.at("?"):
            t = self.next()
            a = self._parse_expr()
            self.expect(":")
            b = self._parse_ternary()
            return _Node("MUX", (cond, a, b), t.line)
        return cond

    def _binary_level(self, sub, ops: dict[str, str]):
        lhs = sub()
        while self.peek().text in ops and self.peek().kind == "op":
            t = self.next()
            rhs = sub()
            lhs = _Node(ops[t.text], (lhs, rhs), t.line)
        return lhs

    def _parse_or(self):
        return self._binary_level(self._parse_xor, {"|": "OR"})

    def _parse_xor(self):
        return self._binary_level(self._parse_and, {"^": "XOR"})

    def _parse_and(self):
        return self._binary_level(self._parse_eq, {"&": "AND"})

    def _parse_eq(self):
        return self._binary_level(self._parse_rel, {"==": "EQ"})

    def _parse_rel(self):
        return self._binary_level(self._parse_add, {"<": "LT"})

    def _parse_add(self):
        return self._binary_level(self._parse_unary, {"+": "ADD", "-": "SUB"})

    def _parse_unary(self):
        t = self.peek()
        if t.text == "~" and t.kind == "op":
            self.next()
            return _Node("NOT", (self._parse_unary(),), t.line)
        if t.text in ("-", "!", "&", "|", "^") and t.kind == "op":
            raise UnsupportedConstruct(f"unary operator {t.text}", t.line)
        return self._parse_primary()

    def _parse_primary(self):
        t = self.peek()
        if t.kind == "sized":
            self.next()
            return _parse_sized_literal(t)
        if t.kind == "number":
            raise UnsupportedConstruct(f"unsized literal {t.text}", t.line)
        if t.text == "(":
            self.next()
            e = self._parse_expr()
            self.expect(")")
            return e
        if t.text == "{":
            self.next()
            parts = [self._parse_expr()]
            while self.at(","):
                self.next()
                parts.append(self._parse_expr())
            self.expect("}")
            return _Node("CONCAT", tuple(parts), t.line)
        if t.kind == "ident":
            self.reject_unsupported()
            name = self.ident()
            if self.at("["):
                self.next()
                hi = self.next()
                if hi.kind != "number":
                    raise UnsupportedConstruct("non-constant index", hi.line)
                if self.at(":"):
                    self.next()
                    lo = self.next()
                    if lo.kind != "number":
                        raise UnsupportedConstruct("non-constant slice bound", lo.line)
                    self.expect("]")
                    return _Ref(name.text, int(hi.text), int(lo.text), name.line)
                self.expect("]")
                return _Ref(name.text, int(hi.text), int(hi.text), name.line)
            return _Ref(name.text, None, None, name.line)
        raise HdlSyntaxError(f"unexpected {t.text!r} in expression", t.line, t.col)

    # -- elaboration to three-address form -----------------------------------

    def _elaborate(self, net: WordNetlist) -> WordNetlist:
        self._net = net
        self._tmp_n = 0
        decls = self._decls

        assigned_regs: dict[str, _Tok] = {}
        reg_exprs: list[tuple[_Tok, object, str]] = []
        clock: str | None = None
        for clk_tok, stmts in self._always:
            if clock is None:
                clock = clk_tok.text
            elif clock != clk_tok.text:
                raise UnsupportedConstruct(f"multiple clock domains ({clock}, {clk_tok.text})",
                                           clk_tok.line)
            for qname, expr in self._lower_stmts(stmts).items():
                if qname in assigned_regs:
                    prev = assigned_regs[qname]
                    raise UnsupportedConstruct(
                        f"register {qname} assigned in more than one always block", prev.line)
                tok = self._reg_tok(stmts, qname)
                assigned_regs[qname] = tok
                reg_exprs.append((tok, expr, qname))
        net.clock = clock
        if clock is not None:
            if clock not in decls:
                raise HdlSyntaxError(f"clock {clock} is not a declared port", 1, 1)
            cdecl = decls[clock]
            is_input = any(p.name == clock and p.direction == "in" for p in self._ports)
            if not is_input or cdecl.width != 1:
                raise UnsupportedConstruct(f"clock {clock} must be a 1-bit input port", 1)

        for lhs_tok, expr in self._assigns:
            name = lhs_tok.text
            if name not in decls:
                raise HdlSyntaxError(f"assignment to undeclared signal {name}",
                                     lhs_tok.line, lhs_tok.col)
            if decls[name].kind == "register":
                raise UnsupportedConstruct(f"continuous assign to reg {name}", lhs_tok.line)
            if name == clock:
                raise UnsupportedConstruct("assignment to the clock", lhs_tok.line)
            self._emit_expr(expr, target=self._net_full_slice(name), line=lhs_tok.line)

        for tok, expr, qname in reg_exprs:
            if qname not in decls:
                raise HdlSyntaxError(f"non-blocking assignment to undeclared signal {qname}",
                                     tok.line, tok.col)
            if decls[qname].kind != "register":
                raise UnsupportedConstruct(f"non-blocking assignment to wire {qname}", tok.line)
            d = self._emit_expr(expr, target=None, line=tok.line,
                                want_width=decls[qname].width)
            if d.width != decls[qname].width:
                raise WidthMismatch(qname, decls[qname].width, d.width, tok.line)
            net.registers.append(Register(qname, d, clock))

        net.signals = [self._decls[n] for n in self._decl_order]
        return net.validate()

    def _reg_tok(self, stmts, name: str) -> _Tok:
        # Recover a token-ish position for error reporting: first nb to name.
        def find(ss):
            for s in ss:
                if s[0] == "nb" and s[1].text == name:
                    return s[1]
                if s[0] == "if":
                    r = find(s[2]) or find(s[3])
                    if r:
                        return r
            return None
        return find(stmts) or _Tok("ident", name, 1, 1)

    def _lower_stmts(self, stmts) -> dict[str, object]:
        """Lower a statement list to one expression per assigned register.

        if/else becomes MUX; a register missing from a branch holds its
        current value (q <= q).
        """
        result: dict[str, object] = {}
        for s in stmts:
            if s[0] == "nb":
                result[s[1].text] = s[2]
            else:
                _, cond, then_s, else_s, line = s
                then_map = self._lower_stmts(then_s)
                else_map = self._lower_stmts(else_s)
                for name in sorted(set(then_map) | set(else_map)):
                    hold = result.get(name, _Ref(name, None, None, line))
                    tv = then_map.get(name, hold)
                    ev = else_map.get(name, hold)
                    result[name] = _Node("MUX", (cond, tv, ev), line)
        return result

    def _net_full_slice(self, name: str) -> Slice:
        return Slice(name, self._decls[name].width - 1, 0)

    def _new_tmp(self, width: int) -> str:
        while True:
            name = f"_t{self._tmp_n}"
            self._tmp_n += 1
            if name not in self._decls:
                break
        self._decls[name] = SignalDecl(name, width, "wire")
        self._decl_order.append(name)
        return name

    def _expr_width(self, e) -> int:
        if isinstance(e, _Lit):
            return e.width
        if isinstance(e, _Ref):
            if e.name not in self._decls:
                raise HdlSyntaxError(f"use of undeclared signal {e.name}", e.line, 1)
            w = self._decls[e.name].width
            if e.msb is None:
                return w
            if not (0 <= e.lsb <= e.msb < w):
                raise WidthMismatch(f"{e.name}[{e.msb}:{e.lsb}]", w, e.msb + 1, e.line)
            return e.msb - e.lsb + 1
        if e.kind in ("AND", "OR", "XOR", "ADD", "SUB"):
            a, b = (self._expr_width(x) for x in e.args)
            if a != b:
                raise WidthMismatch(f"{e.kind} operands", a, b, e.line)
            return a
        if e.kind == "NOT":
            return self._expr_width(e.args[0])
        if e.kind in ("EQ", "LT"):
            a, b = (self._expr_width(x) for x in e.args)
            if a != b:
                raise WidthMismatch(f"{e.kind} operands", a, b, e.line)
            return 1
        if e.kind == "MUX":
            s, a, b = (self._expr_width(x) for x in e.args)
            if s != 1:
                raise WidthMismatch("mux select", 1, s, e.line)
            if a != b:
                raise WidthMismatch("mux data operands", a, b, e.line)
            return a
        if e.kind == "CONCAT":
            return sum(self._expr_width(x) for x in e.args)
        raise HdlSyntaxError(f"internal: width of {e.kind}", e.line, 1)

    def _emit_expr(self, e, target: Slice | None, line: int, want_width: int | None = None) -> Slice:
        """Emit three-address ops for expression e.

        If target is given the root writes into it, otherwise the root
        value is returned as a slice (materializing a temp when the root
        is an operator or literal).
        """
        net = self._net
        if isinstance(e, _Ref):
            w = self._expr_width(e)
            src = Slice(e.name, e.msb if e.msb is not None else w - 1,
                        e.lsb if e.lsb is not None else 0)
            if e.name == net.clock:
                raise UnsupportedConstruct("clock used as data", e.line)
            if target is None:
                return src
            if target.width != w:
                raise WidthMismatch(target.signal, target.width, w, line)
            net.operators.append(WordOp("SLICE", (src,), target))
            return target
        if isinstance(e, _Lit):
            w = e.width
            if want_width is not None and target is None and w != want_width:
                raise WidthMismatch("literal", want_width, w, e.line)
            out = target if target is not None else Slice(self._new_tmp(w), w - 1, 0)
            if out.width != w:
                raise WidthMismatch(out.signal, out.width, w, line)
            net.operators.append(WordOp("CONST", (), out, value=e.value))
            return out

        w = self._expr_width(e)
        ins = tuple(self._emit_expr(a, target=None, line=e.line) for a in e.args)
        out = target if target is not None else Slice(self._new_tmp(w), w - 1, 0)
        if out.width != w:
            raise WidthMismatch(out.signal, out.width, w, line)
        net.operators.append(WordOp(e.kind, ins, out))
        return out


def _parse_sized_literal(t: _Tok) -> _Lit:
    m = re.match(r"(\d+)\s*'\s*([bodhBODH])\s*([0-9a-fA-F_xzXZ?]+)$", t.text)
    if not m:
        raise HdlSyntaxError(f"malformed literal {t.text!r}", t.line, t.col)
    width = int(m.group(1))
    base = {"b": 2, "o": 8, "d": 10, "h": 16}[m.group(2).lower()]
    digits = m.group(3).replace("_", "")
    if any(c in "xzXZ?" for c in digits):
        raise UnsupportedConstruct(f"x/z literal {t.text}", t.line)
    if width <= 0:
        raise HdlSyntaxError(f"zero-width literal {t.text!r}", t.line, t.col)
    try:
        value = int(digits, base)
    except ValueError:
        raise HdlSyntaxError(f"bad digits in literal {t.text!r}", t.line, t.col) from None
    return _Lit(width, value & ((1 << width) - 1), t.line)


def parse_rtl(source_text: str, dialect: str = "verilog-subset",
              filename: str = "<input>") -> WordNetlist:
    """Parse HDL text into a validated WordNetlist.

    dialect "verilog-subset" runs the parser above; "netlist-json" loads
    the canonical interchange format.
    """
    if dialect == "netlist-json":
        return parse_netlist_json(source_text)
    if dialect != "verilog-subset":
        raise ValueError(f"unknown dialect {dialect!r}")
    return _Parser(source_text, filename).parse_module()


__all__ = ["parse_rtl"]
