"""Bundled sample designs (Verilog subset)."""

from __future__ import annotations

import os

_DESIGN_DIR = os.path.join(os.path.dirname(__file__), "designs")


def bundled_design_paths() -> list[str]:
    return sorted(os.path.join(_DESIGN_DIR, f) for f in os.listdir(_DESIGN_DIR)
                  if f.endswith(".v"))


def bundled_designs():
    """Parsed WordNetlist for every bundled .v design."""
    from ..parser import parse_rtl

    out = []
    for path in bundled_design_paths():
        with open(path) as fh:
            out.append(parse_rtl(fh.read(), filename=path))
    return out


__all__ = ["bundled_design_paths", "bundled_designs"]
