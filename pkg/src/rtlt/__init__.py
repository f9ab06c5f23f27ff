"""rtlt: register-level RTL timing estimation toolkit.

Pipeline: parse a Verilog subset (or netlist-json) into a word-level
netlist, bit-blast it into Boolean operator graphs over several operator
bases, run pseudo static timing analysis, sample endpoint paths, extract
features, train arrival-time / ranking / design-level models, and report
results back as annotated HDL, synthesis directives, and metrics.
"""

__version__ = "0.1.0"

from .errors import RtltError
from .netlist import WordNetlist, emit_netlist_json, emit_verilog
from .parser import parse_rtl

__all__ = ["RtltError", "WordNetlist", "parse_rtl", "emit_netlist_json",
           "emit_verilog", "__version__"]
