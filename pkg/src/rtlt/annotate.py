"""Slack annotation directly on HDL source.

A header comment carries the profile name, clock, and predicted WNS/TNS;
each sequential signal declaration gets a comment line with its predicted
slack, criticality group, and rank. All inserted lines start with the
marker "// [rtl-timer]" at column zero, so stripping them restores the
original file byte-exactly (and makes grep/IDE integration trivial).
"""

from __future__ import annotations

import re

from .aggregate import DesignTiming, SignalTiming
from .errors import SourceMismatch
from .parser import parse_rtl

MARKER = "// [rtl-timer]"


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _fmt_rank(r: float) -> str:
    return f"{r:g}"


def strip_annotations(text: str) -> str:
    lines = text.splitlines(keepends=True)
    return "".join(ln for ln in lines if not ln.startswith(MARKER))


def annotate_hdl(source: str, timing: list[SignalTiming], design: DesignTiming,
                 profile: str = "default", clock_period: float | None = None,
                 spans: dict[str, tuple[str, int, int]] | None = None) -> str:
    """Insert timing comments into Verilog source.

    Only signals declared `reg` in the source are annotated; timing
    records that match no declaration are listed in a trailing comment.
    strip_annotations(annotate_hdl(src, ...)) == src, byte-exactly.
    """
    net = parse_rtl(source)
    if spans is None:
        spans = net.source_spans
    reg_names = {s.name for s in net.signals if s.kind == "register"}

    lines = source.splitlines(keepends=True)
    n = len(timing)
    inserts: dict[int, list[str]] = {}   # 0-based line -> comment lines
    unmapped: list[str] = []
    for st in sorted(timing, key=lambda s: s.name):
        if st.name not in reg_names or st.name not in spans:
            unmapped.append(st.name)
            continue
        _, line, _ = spans[st.name]
        if line < 1 or line > len(lines):
            raise SourceMismatch(f"declaration line {line} for {st.name} out of range")
        if not re.search(rf"\b{re.escape(st.name)}\b", lines[line - 1]):
            raise SourceMismatch(
                f"line {line} no longer declares {st.name}; re-parse before annotating")
        comment = (f"{MARKER} slack={_fmt(st.slack)} group={st.group} "
                   f"rank={_fmt_rank(st.rank)}/{n}\n")
        inserts.setdefault(line - 1, []).append(comment)

    header = (f"{MARKER} profile={profile} "
              f"clock={_fmt(clock_period if clock_period is not None else 0.0)} "
              f"WNS={_fmt(design.wns)} TNS={_fmt(design.tns)}\n")

    out: list[str] = [header]
    if unmapped:
        # kept in the header block: a trailer could merge with a final
        # line that lacks a newline and break the strip round trip
        out.append(f"{MARKER} unmapped: {', '.join(sorted(unmapped))}\n")
    for i, ln in enumerate(lines):
        if i in inserts:
            out.extend(inserts[i])
        out.append(ln)
    return "".join(out)


__all__ = ["MARKER", "annotate_hdl", "strip_annotations"]
