"""ASCII AIGER (.aag) export for AIG-basis graphs.

NOT nodes become edge negations (literal ^ 1); REG nodes map to latches,
PIs to inputs, POs to outputs. A symbol table records the bit names.
"""

from __future__ import annotations

from .bog import CONST0, CONST1, PI, PO, REG, BogGraph


def export_aag(g: BogGraph) -> str:
    if g.basis.name != "aig":
        raise ValueError(f"AIGER export requires the aig basis, got {g.basis.name}")

    lit: dict[int, int] = {}
    next_var = 1

    def assign_var(node: int) -> int:
        nonlocal next_var
        v = next_var * 2
        next_var += 1
        lit[node] = v
        return v

    for i in g.pi_ids:
        assign_var(i)
    for i in g.reg_ids:
        assign_var(i)

    and_rows: list[tuple[int, int, int]] = []
    for i, k in enumerate(g.kinds):
        if k == CONST0:
            lit[i] = 0
        elif k == CONST1:
            lit[i] = 1
        elif k == "NOT":
            lit[i] = lit[g.fanins[i][0]] ^ 1
        elif k == "AND":
            a, b = g.fanins[i]
            v = assign_var(i)
            and_rows.append((v, lit[a], lit[b]))
        elif k == PO:
            lit[i] = lit[g.fanins[i][0]]
        elif k in (PI, REG):
            pass
        else:
            raise ValueError(f"unexpected node kind {k} in aig graph")

    latches = [(lit[r], lit[g.fanins[r][0]]) for r in g.reg_ids]
    outputs = [lit[p] for p in g.po_ids]

    lines = [f"aag {next_var - 1} {len(g.pi_ids)} {len(latches)} {len(outputs)} {len(and_rows)}"]
    lines += [str(lit[i]) for i in g.pi_ids]
    lines += [f"{q} {d}" for q, d in latches]
    lines += [str(o) for o in outputs]
    lines += [f"{o} {a} {b}" for o, a, b in and_rows]
    for idx, i in enumerate(g.pi_ids):
        lines.append(f"i{idx} {g.bit_names[i]}")
    for idx, i in enumerate(g.reg_ids):
        lines.append(f"l{idx} {g.bit_names[i]}")
    for idx, name in enumerate(g.po_names):
        lines.append(f"o{idx} {name}")
    lines.append(f"c\n{g.design} ({g.basis.name})")
    return "\n".join(lines) + "\n"


__all__ = ["export_aag"]
