"""Exception hierarchy shared across the toolkit.

Every error raised by the library derives from RtltError so the CLI can
map failures to a single data-error exit code with a module prefix.
"""

from __future__ import annotations


class RtltError(Exception):
    """Base class for all toolkit errors."""

    module = "rtlt"


# --- frontend ---------------------------------------------------------------

class FrontendError(RtltError):
    module = "frontend"


class HdlSyntaxError(FrontendError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnsupportedConstruct(FrontendError):
    def __init__(self, construct: str, line: int):
        super().__init__(f"unsupported construct: {construct} (line {line})")
        self.construct = construct
        self.line = line


class WidthMismatch(FrontendError):
    def __init__(self, signal: str, expected: int, actual: int, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"width mismatch on {signal}: expected {expected}, got {actual}{where}")
        self.signal = signal
        self.expected = expected
        self.actual = actual


class CombinationalLoop(FrontendError):
    def __init__(self, cycle: list[str]):
        super().__init__("combinational loop through: " + " -> ".join(cycle))
        self.cycle = cycle


class ValidationError(FrontendError):
    pass


# --- bog --------------------------------------------------------------------

class BogError(RtltError):
    module = "bog"


class UnsupportedWidth(BogError):
    pass


class InternalLoweringError(BogError):
    pass


class LengthMismatch(BogError):
    pass


class InterfaceMismatch(BogError):
    pass


class UnknownEndpoint(BogError):
    pass


# --- pseudo-sta -------------------------------------------------------------

class StaError(RtltError):
    module = "pseudo-sta"


class CycleDetected(StaError):
    pass


# --- features ---------------------------------------------------------------

class FeatureError(RtltError):
    module = "features"


class MissingBasis(FeatureError):
    pass


class LabelNameMismatch(FeatureError):
    def __init__(self, design: str, unmatched: list[str]):
        shown = ", ".join(unmatched[:8]) + ("..." if len(unmatched) > 8 else "")
        super().__init__(f"labels for {design} name unknown endpoints: {shown}")
        self.design = design
        self.unmatched = unmatched


# --- learners ---------------------------------------------------------------

class LearnerError(RtltError):
    module = "learners"


class EmptyBatch(LearnerError):
    pass


class NonFiniteLabel(LearnerError):
    pass


class EmptyPathSet(LearnerError):
    pass


class DivergenceDetected(LearnerError):
    pass


class DegenerateQuery(LearnerError):
    pass


class InsufficientQueries(LearnerError):
    pass


class SchemaVersionMismatch(LearnerError):
    pass


class CorruptModel(LearnerError):
    pass


# --- aggregate --------------------------------------------------------------

class AggregateError(RtltError):
    module = "aggregate"


class UnparseableBitName(AggregateError):
    pass


class EmptySignalSet(AggregateError):
    pass


# --- reporting --------------------------------------------------------------

class ReportingError(RtltError):
    module = "reporting"


class SourceMismatch(ReportingError):
    pass


class EmptyTimingList(ReportingError):
    pass


class MetricLengthMismatch(ReportingError):
    pass


class DegenerateVariance(ReportingError):
    pass


# --- oracle-harness ---------------------------------------------------------

class OracleError(RtltError):
    module = "oracle-harness"


class ConfigError(OracleError):
    pass
