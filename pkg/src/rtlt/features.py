"""Feature extraction and dataset assembly.

Three feature levels per sampled path: design (cell counts and the
endpoint's rank among all endpoints), cone (driving register count), and
path (pseudo-STA arrival at the endpoint, level/operator counts, and
sum/mean/std statistics of per-node fanout, load capacitance, and slew).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .aggregate import average_ranks_desc, group_for_rank
from .bog import BogGraph, EndpointRef
from .errors import LabelNameMismatch, MissingBasis, UnknownEndpoint
from .sampling import extract_cone, sample_paths
from .sta import PathSample, PseudoLiberty, TimingAnnotation, run_pseudo_sta

FEATURES_SCHEMA = "features-1"
LABELS_SCHEMA = "labels-1"

SOURCE_KINDS = ("REG", "PI", "CONST0", "CONST1")

FEATURE_COLUMNS = (
    "rank_level", "endpoint_rank_pct", "n_seq_cells", "n_comb_cells",
    "n_total_cells", "n_driving_regs", "at_endpoint", "path_level",
    "op_count", "fanout_sum", "fanout_mean", "fanout_std",
    "load_sum", "load_mean", "load_std", "slew_sum", "slew_mean", "slew_std",
)

_META_COLUMNS = ("design_id", "basis", "endpoint_name", "path_kind", "path_index")


@dataclass(frozen=True)
class DesignFeatures:
    rank_level: int
    endpoint_rank_pct: float
    n_seq_cells: int
    n_comb_cells: int
    n_total_cells: int


@dataclass(frozen=True)
class PathFeatures:
    at_endpoint: float
    path_level: int
    op_count: int
    fanout_sum: float
    fanout_mean: float
    fanout_std: float
    load_sum: float
    load_mean: float
    load_std: float
    slew_sum: float
    slew_mean: float
    slew_std: float


@dataclass(frozen=True)
class FeatureRow:
    design_id: str
    basis: str
    endpoint_name: str
    path_kind: str       # "slowest" | "random"
    path_index: int
    features: tuple[float, ...]   # FEATURE_COLUMNS order
    label: float | None = None


@dataclass
class FeatureTable:
    schema_version: str = FEATURES_SCHEMA
    rows: list[FeatureRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(_META_COLUMNS) + list(FEATURE_COLUMNS) + ["label"])
        for r in self.rows:
            w.writerow([r.design_id, r.basis, r.endpoint_name, r.path_kind, r.path_index]
                       + [repr(v) for v in r.features]
                       + [repr(r.label) if r.label is not None else ""])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureTable":
        rd = csv.reader(io.StringIO(text))
        header = next(rd)
        expected = list(_META_COLUMNS) + list(FEATURE_COLUMNS) + ["label"]
        if header != expected:
            raise ValueError("feature csv header does not match schema "
                             f"{FEATURES_SCHEMA}")
        rows = []
        for rec in rd:
            meta, feats, label = rec[:5], rec[5:-1], rec[-1]
            rows.append(FeatureRow(
                design_id=meta[0], basis=meta[1], endpoint_name=meta[2],
                path_kind=meta[3], path_index=int(meta[4]),
                features=tuple(float(v) for v in feats),
                label=float(label) if label else None))
        return cls(rows=rows)

    def to_jsonl(self) -> str:
        out = []
        for r in self.rows:
            rec = {"design_id": r.design_id, "basis": r.basis,
                   "endpoint_name": r.endpoint_name, "path_kind": r.path_kind,
                   "path_index": r.path_index,
                   "features": dict(zip(FEATURE_COLUMNS, r.features)),
                   "label": r.label}
            out.append(json.dumps(rec, sort_keys=True))
        return "\n".join(out) + ("\n" if out else "")


@dataclass(frozen=True)
class LabelSet:
    design_id: str
    clock_period: float
    entries: dict[str, float]   # endpoint name -> arrival

    def to_json_obj(self) -> dict:
        return {"schema": LABELS_SCHEMA, "design": self.design_id,
                "clock_period": self.clock_period,
                "entries": {k: self.entries[k] for k in sorted(self.entries)}}

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LabelSet":
        if obj.get("schema") != LABELS_SCHEMA:
            raise ValueError(f"unsupported label schema {obj.get('schema')!r}")
        return cls(design_id=str(obj["design"]),
                   clock_period=float(obj["clock_period"]),
                   entries={str(k): float(v) for k, v in obj["entries"].items()})

    @classmethod
    def loads(cls, text: str) -> "LabelSet":
        return cls.from_json_obj(json.loads(text))


# --- per-level feature computation -------------------------------------------


def endpoint_rank_table(g: BogGraph, ann: TimingAnnotation) -> dict[str, tuple[float, int]]:
    """Per endpoint: (fractional rank of pseudo arrival, 4-bucket level)."""
    eps = g.endpoints
    arrivals = [ann.arrival[e.id] for e in eps]
    ranks = average_ranks_desc(arrivals)
    n = len(eps)
    return {e.name: (r / n, group_for_rank(r, n)) for e, r in zip(eps, ranks)}


def design_features(g: BogGraph, ann: TimingAnnotation, ep: EndpointRef,
                    rank_table: dict[str, tuple[float, int]] | None = None) -> DesignFeatures:
    if rank_table is None:
        rank_table = endpoint_rank_table(g, ann)
    if ep.name not in rank_table:
        raise UnknownEndpoint(f"{g.design}: endpoint {ep.name} not in graph")
    pct, level = rank_table[ep.name]
    n_seq = g.reg_count()
    n_comb = g.comb_node_count()
    return DesignFeatures(rank_level=level, endpoint_rank_pct=pct,
                          n_seq_cells=n_seq, n_comb_cells=n_comb,
                          n_total_cells=n_seq + n_comb)


def _stats(xs) -> tuple[float, float, float]:
    n = len(xs)
    s = float(sum(xs))
    mean = s / n
    var = sum((x - mean) ** 2 for x in xs) / n
    return s, mean, math.sqrt(var)


def path_features(p: PathSample) -> PathFeatures:
    level = len(p.node_sequence)
    op_count = sum(1 for k in p.op_kinds if k not in SOURCE_KINDS)
    fo = _stats(p.fanout)
    ld = _stats(p.load)
    sl = _stats(p.slew)
    return PathFeatures(
        at_endpoint=p.arrival[-1], path_level=level, op_count=op_count,
        fanout_sum=fo[0], fanout_mean=fo[1], fanout_std=fo[2],
        load_sum=ld[0], load_mean=ld[1], load_std=ld[2],
        slew_sum=sl[0], slew_mean=sl[1], slew_std=sl[2],
    )


def feature_vector(df: DesignFeatures, n_driving_regs: int, pf: PathFeatures) -> tuple[float, ...]:
    return (float(df.rank_level), df.endpoint_rank_pct, float(df.n_seq_cells),
            float(df.n_comb_cells), float(df.n_total_cells), float(n_driving_regs),
            pf.at_endpoint, float(pf.path_level), float(pf.op_count),
            pf.fanout_sum, pf.fanout_mean, pf.fanout_std,
            pf.load_sum, pf.load_mean, pf.load_std,
            pf.slew_sum, pf.slew_mean, pf.slew_std)


BASIS_NAMES = ("sog", "aig", "aimg", "xag")


def ensemble_features(preds: dict[str, float]) -> dict[str, float]:
    """Per-basis predictions plus max/min/mean ensemble statistics."""
    missing = [b for b in BASIS_NAMES if b not in preds]
    if missing:
        raise MissingBasis(f"missing basis predictions: {missing}")
    vals = [preds[b] for b in BASIS_NAMES]
    out = {b: preds[b] for b in BASIS_NAMES}
    out["max"] = max(vals)
    out["min"] = min(vals)
    out["mean"] = sum(vals) / len(vals)
    return out


# --- dataset assembly ---------------------------------------------------------


def featurize_graph(g: BogGraph, ann: TimingAnnotation, seed: int,
                    beta: float = 0.5, k_min: int = 2, k_max: int = 32,
                    ) -> list[FeatureRow]:
    """One unlabeled row per (endpoint, sampled path) for a single graph."""
    rank_table = endpoint_rank_table(g, ann)
    rows: list[FeatureRow] = []
    for ep in g.endpoints:
        cone = extract_cone(g, ep)
        df = design_features(g, ann, ep, rank_table)
        paths = sample_paths(g, ann, cone, seed, beta, k_min, k_max)
        for idx, p in enumerate(paths):
            pf = path_features(p)
            rows.append(FeatureRow(
                design_id=g.design, basis=g.basis.name, endpoint_name=ep.name,
                path_kind=p.kind, path_index=idx,
                features=feature_vector(df, len(cone.driving_sources), pf)))
    rows.sort(key=lambda r: (r.design_id, r.basis, r.endpoint_name, r.path_index))
    return rows


def attach_labels(rows: list[FeatureRow], labels: dict[str, LabelSet],
                  strict: bool = True) -> tuple[list[FeatureRow], dict[str, int]]:
    """Join labels onto rows by (design, endpoint name).

    Endpoints without a label are dropped (per-design drop counts
    returned); label names matching no endpoint raise LabelNameMismatch.
    """
    known: dict[str, set[str]] = {}
    for r in rows:
        known.setdefault(r.design_id, set()).add(r.endpoint_name)
    if strict:
        for design, ls in sorted(labels.items()):
            unmatched = sorted(set(ls.entries) - known.get(design, set()))
            if unmatched:
                raise LabelNameMismatch(design, unmatched)

    out: list[FeatureRow] = []
    dropped: dict[str, int] = {}
    dropped_eps: dict[str, set[str]] = {}
    for r in rows:
        ls = labels.get(r.design_id)
        lab = ls.entries.get(r.endpoint_name) if ls else None
        if lab is None:
            dropped_eps.setdefault(r.design_id, set()).add(r.endpoint_name)
            continue
        out.append(FeatureRow(r.design_id, r.basis, r.endpoint_name, r.path_kind,
                              r.path_index, r.features, label=lab))
    for design, eps in dropped_eps.items():
        dropped[design] = len(eps)
    return out, dropped


def build_dataset(designs, bases, labels: list[LabelSet], seed: int,
                  liberty: PseudoLiberty | None = None,
                  beta: float = 0.5, k_min: int = 2, k_max: int = 32,
                  ) -> tuple[FeatureTable, dict[str, int]]:
    """Compile, time, sample, and featurize a corpus into one table.

    designs: WordNetlist list; bases: OperatorBasis list. Returns the
    table plus per-design counts of endpoints dropped for missing labels.
    """
    from .bog import bitblast

    lib = liberty or PseudoLiberty.default()
    label_map = {ls.design_id: ls for ls in labels}
    rows: list[FeatureRow] = []
    for net in designs:
        for basis in bases:
            g = bitblast(net, basis)
            ann = run_pseudo_sta(g, lib)
            rows.extend(featurize_graph(g, ann, seed, beta, k_min, k_max))
    labeled, dropped = attach_labels(rows, label_map)
    labeled.sort(key=lambda r: (r.design_id, r.basis, r.endpoint_name, r.path_index))
    return FeatureTable(rows=labeled), dropped


__all__ = [
    "FEATURES_SCHEMA", "LABELS_SCHEMA", "FEATURE_COLUMNS", "BASIS_NAMES",
    "DesignFeatures", "PathFeatures", "FeatureRow", "FeatureTable", "LabelSet",
    "design_features", "path_features", "feature_vector", "ensemble_features",
    "endpoint_rank_table", "featurize_graph", "attach_labels", "build_dataset",
]
