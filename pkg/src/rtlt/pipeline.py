"""End-to-end training and prediction over compiled designs.

Training stacks four stages on top of the per-basis feature tables:

1. one bit-wise arrival model per operator basis (max-over-paths loss),
2. a bit-level ensemble regressor over the per-basis predictions plus
   their max/min/mean and the design/cone features,
3. a signal-level regressor and a pairwise ranker over signal rows
   (signal arrival = max over the signal's bits),
4. TNS/WNS design heads over directly-computed slack summaries.

All feature construction is shared between training and prediction.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .aggregate import (DesignTiming, SignalTiming, aggregate_signals,
                        average_ranks_desc, compute_design_timing,
                        group_for_rank, groups_from_values)
from .bog import ALL_BASES, BogGraph, OperatorBasis, bitblast, parse_bit_name
from .config import RunConfig
from .errors import EmptyBatch, InsufficientQueries
from .features import (FEATURE_COLUMNS, FeatureRow, FeatureTable, LabelSet,
                       attach_labels, featurize_graph)
from .learners import (EndpointGroupedBatch, LearnerConfig, ModelBundle,
                       RankConfig, predict_endpoint_at, train_bitwise,
                       train_rank, train_signal_regressor)
from .learners.mlp import MlpConfig, train_bitwise_mlp
from .netlist import WordNetlist
from .sta import PseudoLiberty, TimingAnnotation, run_pseudo_sta

logger = logging.getLogger(__name__)

_AT_ENDPOINT = FEATURE_COLUMNS.index("at_endpoint")
_N_DRIVING = FEATURE_COLUMNS.index("n_driving_regs")
_DESIGN_FEATS = slice(0, 5)  # rank_level .. n_total_cells

ENSEMBLE_STAT_NAMES = ("max", "min", "mean")


@dataclass
class CompiledDesign:
    name: str
    net: WordNetlist
    graphs: dict[str, BogGraph]
    anns: dict[str, TimingAnnotation]


@dataclass
class FeaturizedDesign:
    name: str
    rows_by_basis: dict[str, list[FeatureRow]]   # unlabeled, sorted

    def endpoint_names(self, basis: str) -> list[str]:
        seen: list[str] = []
        prev = None
        for r in self.rows_by_basis[basis]:
            if r.endpoint_name != prev:
                seen.append(r.endpoint_name)
                prev = r.endpoint_name
        return seen


def compile_design(net: WordNetlist, cfg: RunConfig,
                   liberty: PseudoLiberty | None = None) -> CompiledDesign:
    lib = liberty or PseudoLiberty.default()
    graphs = {}
    anns = {}
    for bname in cfg.bases:
        g = bitblast(net, OperatorBasis.by_name(bname))
        graphs[bname] = g
        anns[bname] = run_pseudo_sta(g, lib)
    return CompiledDesign(net.name, net, graphs, anns)


def featurize_design(cd: CompiledDesign, cfg: RunConfig) -> FeaturizedDesign:
    rows = {}
    for bname in cfg.bases:
        rows[bname] = featurize_graph(cd.graphs[bname], cd.anns[bname], cfg.seed,
                                      cfg.beta, cfg.k_min, cfg.k_max)
    return FeaturizedDesign(cd.name, rows)


def featurize_corpus(nets: list[WordNetlist], cfg: RunConfig,
                     liberty: PseudoLiberty | None = None) -> dict[str, FeaturizedDesign]:
    """Compile and featurize a corpus; RTLT_THREADS caps parallelism
    (0 or unset = auto). Results merge in deterministic name order."""
    import os
    from concurrent.futures import ThreadPoolExecutor

    lib = liberty or PseudoLiberty.default()

    def work(net: WordNetlist) -> FeaturizedDesign:
        return featurize_design(compile_design(net, cfg, lib), cfg)

    raw = os.environ.get("RTLT_THREADS", "0")
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads == 0:
        threads = min(8, os.cpu_count() or 1)
    ordered = sorted(nets, key=lambda n: n.name)
    if threads <= 1 or len(ordered) <= 1:
        return {net.name: work(net) for net in ordered}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(work, ordered))
    return {fd.name: fd for fd in results}


# --- shared feature assembly ---------------------------------------------------


def _group_rows(rows: list[FeatureRow]):
    """Sorted rows -> (X, endpoint names, group starts)."""
    X = np.asarray([r.features for r in rows], dtype=np.float64)
    names: list[str] = []
    starts: list[int] = []
    prev = None
    for i, r in enumerate(rows):
        if r.endpoint_name != prev:
            names.append(r.endpoint_name)
            starts.append(i)
            prev = r.endpoint_name
    return X, names, np.asarray(starts, dtype=np.int64)


def _bitwise_predict_design(bundle: ModelBundle, fd: FeaturizedDesign,
                            bases: tuple[str, ...]) -> dict[str, dict[str, float]]:
    """endpoint name -> {basis: max-over-paths prediction}."""
    out: dict[str, dict[str, float]] = {}
    for bname in bases:
        rows = fd.rows_by_basis[bname]
        X, names, starts = _group_rows(rows)
        if bundle.bitwise_model_kind == "mlp":
            preds = bundle.bitwise_mlp[bname].predict(X)
        else:
            preds = bundle.bitwise[bname].predict(X)
        ends = np.append(starts[1:], len(X))
        for name, s, e in zip(names, starts, ends):
            out.setdefault(name, {})[bname] = float(np.max(preds[s:e]))
    return out


def _ref_endpoint_features(fd: FeaturizedDesign, ref_basis: str) -> dict[str, np.ndarray]:
    """Design/cone feature slice of each endpoint's slowest-path row."""
    out = {}
    for r in fd.rows_by_basis[ref_basis]:
        if r.path_index == 0:
            out[r.endpoint_name] = np.asarray(r.features, dtype=np.float64)
    return out


def ensemble_columns(bases: tuple[str, ...]) -> list[str]:
    return ([f"at_{b}" for b in bases] + [f"at_{s}" for s in ENSEMBLE_STAT_NAMES]
            + ["rank_level", "endpoint_rank_pct", "n_seq_cells", "n_comb_cells",
               "n_total_cells", "n_driving_regs"])


def _ensemble_matrix(fd: FeaturizedDesign, bit_preds: dict[str, dict[str, float]],
                     bases: tuple[str, ...], ref_basis: str):
    ref = _ref_endpoint_features(fd, ref_basis)
    names = sorted(ref, key=parse_bit_name)
    X = []
    for name in names:
        per_basis = [bit_preds[name][b] for b in bases]
        stats = [max(per_basis), min(per_basis), sum(per_basis) / len(per_basis)]
        rf = ref[name]
        X.append(per_basis + stats + list(rf[_DESIGN_FEATS]) + [rf[_N_DRIVING]])
    return np.asarray(X, dtype=np.float64), names


def signal_columns(bases: tuple[str, ...]) -> list[str]:
    return ([f"sig_at_{b}" for b in bases] + [f"sig_at_{s}" for s in ENSEMBLE_STAT_NAMES]
            + ["sig_at_ensemble", "n_bits", "pseudo_at", "sig_rank_pct", "sig_rank_level",
               "n_seq_cells", "n_comb_cells", "n_total_cells", "max_driving_regs"])


def _signal_matrix(fd: FeaturizedDesign, bit_preds: dict[str, dict[str, float]],
                   ens_preds: dict[str, float], bases: tuple[str, ...], ref_basis: str):
    """Signal rows: per-basis signal arrival (max over bits), ensemble
    stats, the ensemble-model signal arrival, and design context."""
    ref = _ref_endpoint_features(fd, ref_basis)
    by_signal: dict[str, list[str]] = {}
    for name in ref:
        sig, _ = parse_bit_name(name)
        by_signal.setdefault(sig, []).append(name)
    signals = sorted(by_signal)

    pseudo_at = {s: max(ref[b][_AT_ENDPOINT] for b in by_signal[s]) for s in signals}
    ranks = average_ranks_desc([pseudo_at[s] for s in signals])
    n = len(signals)

    X = []
    for s, rank in zip(signals, ranks):
        bits = by_signal[s]
        per_basis = [max(bit_preds[b][bs] for b in bits) for bs in bases]
        stats = [max(per_basis), min(per_basis), sum(per_basis) / len(per_basis)]
        sig_ens = max(ens_preds[b] for b in bits)
        any_ref = ref[bits[0]]
        max_driving = max(ref[b][_N_DRIVING] for b in bits)
        X.append(per_basis + stats
                 + [sig_ens, float(len(bits)), pseudo_at[s], rank / n,
                    float(group_for_rank(rank, n)),
                    any_ref[2], any_ref[3], any_ref[4], max_driving])
    return np.asarray(X, dtype=np.float64), signals


def design_columns(bases: tuple[str, ...]) -> list[str]:
    cols = []
    for b in bases:
        cols += [f"tns_{b}", f"wns_{b}"]
    return cols + ["tns_ensemble", "wns_ensemble", "n_seq_cells", "n_comb_cells",
                   "n_total_cells", "n_signals", "clock_period"]


def _tns_wns(arrivals: dict[str, float], clock: float) -> tuple[float, float]:
    slacks = [clock - a for a in arrivals.values()]
    return (sum(min(0.0, s) for s in slacks), min(0.0, min(slacks)) if slacks else 0.0)


def _design_vector(fd: FeaturizedDesign, bit_preds, ens_preds, signal_names,
                   sig_at_by_basis: dict[str, dict[str, float]],
                   sig_at_ens: dict[str, float], clock: float,
                   bases: tuple[str, ...], ref_basis: str) -> list[float]:
    vec: list[float] = []
    for b in bases:
        tns, wns = _tns_wns(sig_at_by_basis[b], clock)
        vec += [tns, wns]
    tns_e, wns_e = _tns_wns(sig_at_ens, clock)
    any_row = fd.rows_by_basis[ref_basis][0].features
    vec += [tns_e, wns_e, any_row[2], any_row[3], any_row[4],
            float(len(signal_names)), clock]
    return vec


def _signal_stage(fd: FeaturizedDesign, bundle_or_models, bases, ref_basis):
    """Run stages 1-3 feature construction for one design."""
    bit_preds = _bitwise_predict_design(bundle_or_models, fd, bases)
    Xe, ep_names = _ensemble_matrix(fd, bit_preds, bases, ref_basis)
    return bit_preds, Xe, ep_names


# --- training -------------------------------------------------------------------


def _learner_cfg(cfg: RunConfig) -> LearnerConfig:
    return LearnerConfig(n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                         learning_rate=cfg.learning_rate,
                         min_samples_leaf=cfg.min_samples_leaf, seed=cfg.seed)


def _rank_cfg(cfg: RunConfig) -> RankConfig:
    return RankConfig(n_trees=cfg.rank_n_trees, max_depth=cfg.rank_max_depth,
                      learning_rate=cfg.learning_rate,
                      min_samples_leaf=cfg.min_samples_leaf, seed=cfg.seed)


def train_pipeline(featurized: list[FeaturizedDesign], labels: dict[str, LabelSet],
                   cfg: RunConfig, liberty_hash: str = "") -> ModelBundle:
    bases = cfg.bases
    ref_basis = bases[0]
    lcfg = _learner_cfg(cfg)

    all_rows: list[FeatureRow] = []
    for fd in featurized:
        for bname in bases:
            all_rows.extend(fd.rows_by_basis[bname])
    labeled, dropped = attach_labels(all_rows, labels)
    for design, n in sorted(dropped.items()):
        logger.warning("design %s: dropped %d unlabeled endpoints", design, n)
    labeled.sort(key=lambda r: (r.design_id, r.basis, r.endpoint_name, r.path_index))
    table = FeatureTable(rows=labeled)

    bundle = ModelBundle(config=cfg.to_json_obj(), delay_model_hash=liberty_hash,
                         bitwise_model_kind=cfg.bitwise_model)

    # stage 1: per-basis bit-wise models
    for bname in bases:
        batch = EndpointGroupedBatch.from_feature_table(table, bname)
        if cfg.bitwise_model == "mlp":
            mcfg = MlpConfig(hidden_dim=cfg.mlp_hidden, n_layers=cfg.mlp_layers,
                             learning_rate=cfg.mlp_lr, epochs=cfg.mlp_epochs,
                             seed=cfg.seed)
            bundle.bitwise_mlp[bname] = train_bitwise_mlp(batch, mcfg)
        else:
            bundle.bitwise[bname] = train_bitwise(batch, lcfg, list(FEATURE_COLUMNS))

    # stage 2: bit-level ensemble rows across designs
    ens_X, ens_y = [], []
    per_design: dict[str, dict] = {}
    for fd in featurized:
        ls = labels.get(fd.name)
        if ls is None:
            continue
        bit_preds, Xe, ep_names = _signal_stage(fd, bundle, bases, ref_basis)
        keep = [i for i, nm in enumerate(ep_names) if nm in ls.entries]
        per_design[fd.name] = {"bit_preds": bit_preds, "Xe": Xe, "ep_names": ep_names}
        if keep:
            ens_X.append(Xe[keep])
            ens_y.extend(ls.entries[ep_names[i]] for i in keep)
    if not ens_X:
        raise EmptyBatch("no labeled endpoints across corpus")
    bundle.bit_ensemble = train_signal_regressor(
        np.concatenate(ens_X), np.asarray(ens_y), lcfg, ensemble_columns(bases))

    # stage 3: signal rows
    sig_X, sig_y, rank_queries = [], [], []
    sig_rows_by_design: dict[str, tuple[np.ndarray, list[str]]] = {}
    for fd in featurized:
        ls = labels.get(fd.name)
        if ls is None or fd.name not in per_design:
            continue
        st = per_design[fd.name]
        ens_pred_vals = bundle.bit_ensemble.predict(st["Xe"])
        ens_preds = dict(zip(st["ep_names"], ens_pred_vals))
        Xs, signals = _signal_matrix(fd, st["bit_preds"], ens_preds, bases, ref_basis)
        sig_rows_by_design[fd.name] = (Xs, signals)
        st["ens_preds"] = ens_preds

        sig_labels = {}
        for nm, lab in ls.entries.items():
            sig, _ = parse_bit_name(nm)
            sig_labels[sig] = max(sig_labels.get(sig, -np.inf), lab)
        keep = [i for i, s in enumerate(signals) if s in sig_labels]
        if not keep:
            continue
        y = [sig_labels[signals[i]] for i in keep]
        sig_X.append(Xs[keep])
        sig_y.extend(y)
        groups = groups_from_values(y)
        rank_queries.append((Xs[keep], np.asarray([4 - g for g in groups], dtype=float)))

    if not sig_X:
        raise EmptyBatch("no labeled signals across corpus")
    bundle.signal = train_signal_regressor(
        np.concatenate(sig_X), np.asarray(sig_y), lcfg, signal_columns(bases))
    bundle.rank = train_rank(rank_queries, _rank_cfg(cfg))

    # stage 4: design-level TNS/WNS heads
    design_X, tns_y, wns_y = [], [], []
    for fd in featurized:
        ls = labels.get(fd.name)
        if ls is None or fd.name not in sig_rows_by_design:
            continue
        st = per_design[fd.name]
        Xs, signals = sig_rows_by_design[fd.name]
        clock = cfg.clock_period if cfg.clock_period is not None else ls.clock_period
        sig_at_by_basis = {
            b: {s: float(Xs[i][bases.index(b)]) for i, s in enumerate(signals)}
            for b in bases}
        n_b = len(bases)
        sig_at_ens = {s: float(Xs[i][n_b + 3]) for i, s in enumerate(signals)}
        design_X.append(_design_vector(fd, st["bit_preds"], st["ens_preds"], signals,
                                       sig_at_by_basis, sig_at_ens, clock, bases,
                                       ref_basis))
        sig_labels = {}
        for nm, lab in ls.entries.items():
            sig, _ = parse_bit_name(nm)
            sig_labels[sig] = max(sig_labels.get(sig, -np.inf), lab)
        lab_tns, lab_wns = _tns_wns(sig_labels, clock)
        tns_y.append(lab_tns)
        wns_y.append(lab_wns)

    if len(design_X) >= 3:
        Xd = np.asarray(design_X)
        bundle.tns_head = train_signal_regressor(Xd, np.asarray(tns_y), lcfg,
                                                 design_columns(bases))
        bundle.wns_head = train_signal_regressor(Xd, np.asarray(wns_y), lcfg,
                                                 design_columns(bases))
    else:
        logger.warning("only %d designs: TNS/WNS heads not trained "
                       "(direct computation is used instead)", len(design_X))
    return bundle


def train_design_head(design_rows, targets, cfg: RunConfig | None = None,
                      feature_names: list[str] | None = None):
    """Standalone design-level head trainer (spec surface).

    Refuses to train on fewer than 3 designs.
    """
    if len(design_rows) < 3:
        raise InsufficientQueries(f"need >= 3 designs, got {len(design_rows)}")
    lcfg = _learner_cfg(cfg or RunConfig())
    return train_signal_regressor(np.asarray(design_rows, dtype=np.float64),
                                  np.asarray(targets, dtype=np.float64),
                                  lcfg, feature_names)


# --- prediction -------------------------------------------------------------------


@dataclass
class DesignPrediction:
    design: str
    clock_period: float
    bit_at: dict[str, float]                      # ensemble bit arrivals
    bit_at_by_basis: dict[str, dict[str, float]]
    signal_at: dict[str, float]                   # refined signal regression
    rank_score: dict[str, float]
    signal_rank: dict[str, float]
    signal_group: dict[str, int]
    tns: float
    wns: float
    tns_direct: float
    wns_direct: float
    signals: list[SignalTiming] = field(default_factory=list)
    design_timing: DesignTiming | None = None

    def to_json_obj(self) -> dict:
        sig_names = sorted(self.signal_at)
        return {
            "schema": "timing-1",
            "design": self.design,
            "clock_period": self.clock_period,
            "wns": self.wns,
            "tns": self.tns,
            "wns_direct": self.wns_direct,
            "tns_direct": self.tns_direct,
            "endpoint_count": len(sig_names),
            "violating_count": (self.design_timing.violating_count
                                if self.design_timing else 0),
            "signals": [{
                "name": s,
                "arrival": self.signal_at[s],
                "slack": self.clock_period - self.signal_at[s],
                "rank": self.signal_rank[s],
                "group": self.signal_group[s],
                "rank_score": self.rank_score[s],
            } for s in sig_names],
            "bits": {k: self.bit_at[k] for k in sorted(self.bit_at)},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1) + "\n"


def predict_design(bundle: ModelBundle, fd: FeaturizedDesign,
                   clock_period: float) -> DesignPrediction:
    bases = tuple(bundle.config.get("bases", [b.name for b in ALL_BASES]))
    ref_basis = bases[0]
    bit_preds, Xe, ep_names = _signal_stage(fd, bundle, bases, ref_basis)
    ens_pred_vals = bundle.bit_ensemble.predict(Xe)
    ens_preds = dict(zip(ep_names, ens_pred_vals))
    Xs, signals = _signal_matrix(fd, bit_preds, ens_preds, bases, ref_basis)

    sig_at = dict(zip(signals, (float(v) for v in bundle.signal.predict(Xs))))
    scores = dict(zip(signals, (float(v) for v in bundle.rank.predict(Xs))))

    ranks = average_ranks_desc([scores[s] for s in signals])
    n = len(signals)
    sig_rank = dict(zip(signals, ranks))
    sig_group = {s: group_for_rank(r, n) for s, r in sig_rank.items()}

    tns_direct, wns_direct = _tns_wns(sig_at, clock_period)
    tns, wns = tns_direct, wns_direct
    if bundle.tns_head is not None and bundle.wns_head is not None:
        n_b = len(bases)
        sig_at_by_basis = {
            b: {s: float(Xs[i][bases.index(b)]) for i, s in enumerate(signals)}
            for b in bases}
        sig_at_ens = {s: float(Xs[i][n_b + 3]) for i, s in enumerate(signals)}
        vec = np.asarray([_design_vector(fd, bit_preds, ens_preds, signals,
                                         sig_at_by_basis, sig_at_ens, clock_period,
                                         bases, ref_basis)])
        tns = min(0.0, float(bundle.tns_head.predict(vec)[0]))
        wns = min(0.0, float(bundle.wns_head.predict(vec)[0]))

    sig_timings = aggregate_signals(ens_preds, clock_period, fd.name)
    design_timing = compute_design_timing(sig_timings, clock_period, fd.name)

    return DesignPrediction(
        design=fd.name,
        clock_period=clock_period,
        bit_at=ens_preds,
        bit_at_by_basis={b: {nm: bit_preds[nm][b] for nm in bit_preds} for b in bases},
        signal_at=sig_at,
        rank_score=scores,
        signal_rank=sig_rank,
        signal_group=sig_group,
        tns=tns, wns=wns, tns_direct=tns_direct, wns_direct=wns_direct,
        signals=sig_timings,
        design_timing=design_timing,
    )


__all__ = [
    "CompiledDesign", "FeaturizedDesign", "DesignPrediction",
    "compile_design", "featurize_design", "train_pipeline", "predict_design",
    "train_design_head", "ensemble_columns", "signal_columns", "design_columns",
]
