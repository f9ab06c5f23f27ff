"""Cross-design validation: folds partition designs, never endpoints.

Each fold trains the full pipeline on the remaining designs and predicts
the held-out ones. Signal-level metrics are computed per design and
averaged (mean +/- std across designs, as well as pooled); design-level
TNS/WNS correlations pool the per-design points across folds.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field

import numpy as np

from .bog import parse_bit_name
from .config import RunConfig
from .features import LabelSet
from .metrics import EvalReport, evaluate, pearson_r
from .netlist import WordNetlist
from .pipeline import (DesignPrediction, FeaturizedDesign, featurize_corpus,
                       predict_design, train_pipeline)
from .sta import PseudoLiberty

logger = logging.getLogger(__name__)


def assign_folds(design_names: list[str], folds: int, seed: int) -> list[list[str]]:
    """Deterministic partition of designs into folds (sizes differ by <= 1)."""
    names = sorted(design_names)
    if folds > len(names):
        logger.warning("requested %d folds for %d designs; reducing", folds, len(names))
        folds = len(names)
    if folds < 1:
        raise ValueError("folds must be >= 1")
    rng = random.Random(seed)
    rng.shuffle(names)
    out: list[list[str]] = [[] for _ in range(folds)]
    for i, n in enumerate(names):
        out[i % folds].append(n)
    return [sorted(f) for f in out]


def signal_labels_of(ls: LabelSet) -> dict[str, float]:
    out: dict[str, float] = {}
    for nm, v in ls.entries.items():
        sig, _ = parse_bit_name(nm)
        out[sig] = max(out.get(sig, float("-inf")), v)
    return out


@dataclass
class XvalResult:
    folds: list[list[str]]
    per_design: dict[str, EvalReport]
    predictions: dict[str, DesignPrediction]
    signal_labels: dict[str, dict[str, float]]
    design_tns: dict[str, tuple[float, float]]   # design -> (pred, label)
    design_wns: dict[str, tuple[float, float]]
    aggregate: dict = field(default_factory=dict)

    def compute_aggregate(self):
        rs = [rep.r for rep in self.per_design.values() if not np.isnan(rep.r)]
        covrs = [rep.covr_pct for rep in self.per_design.values()]
        mapes = [rep.mape_pct for rep in self.per_design.values()
                 if not np.isnan(rep.mape_pct)]
        pooled_y, pooled_p = [], []
        for d, rep in self.per_design.items():
            labs = self.signal_labels[d]
            preds = self.predictions[d].signal_at
            for s in sorted(labs):
                pooled_y.append(labs[s])
                pooled_p.append(preds[s])
        tns_pairs = [self.design_tns[d] for d in sorted(self.design_tns)]
        wns_pairs = [self.design_wns[d] for d in sorted(self.design_wns)]
        self.aggregate = {
            "signal_r_mean": float(np.mean(rs)) if rs else float("nan"),
            "signal_r_std": float(np.std(rs)) if rs else float("nan"),
            "signal_r_pooled": pearson_r(pooled_y, pooled_p),
            "covr_mean": float(np.mean(covrs)) if covrs else float("nan"),
            "covr_std": float(np.std(covrs)) if covrs else float("nan"),
            "mape_mean": float(np.mean(mapes)) if mapes else float("nan"),
            "tns_r": pearson_r([p[1] for p in tns_pairs], [p[0] for p in tns_pairs]),
            "wns_r": pearson_r([p[1] for p in wns_pairs], [p[0] for p in wns_pairs]),
            "n_designs": len(self.per_design),
        }
        return self.aggregate

    def to_json_obj(self) -> dict:
        return {
            "schema": "xval-1",
            "folds": self.folds,
            "aggregate": self.aggregate,
            "per_design": {d: rep.to_json_obj() for d, rep in
                           sorted(self.per_design.items())},
            "design_tns": {d: list(v) for d, v in sorted(self.design_tns.items())},
            "design_wns": {d: list(v) for d, v in sorted(self.design_wns.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1,
                          allow_nan=True) + "\n"


def evaluate_design(pred: DesignPrediction, ls: LabelSet) -> EvalReport:
    """Signal-level metrics for one design: values from the signal
    regressor, groups from the ranking model."""
    labs = signal_labels_of(ls)
    rep = evaluate(preds={s: pred.signal_at[s] for s in labs},
                   labels=labs,
                   pred_groups={s: pred.signal_group[s] for s in labs})
    return rep


def cross_validate(corpus: list[tuple[WordNetlist, LabelSet]], folds: int = 10,
                   seed: int = 0, cfg: RunConfig | None = None,
                   liberty: PseudoLiberty | None = None,
                   featurized: dict[str, FeaturizedDesign] | None = None,
                   bundles_out: dict | None = None) -> XvalResult:
    """Train/test over design folds; returns per-design and aggregate metrics.

    featurized (optional) short-circuits compilation when the caller has
    already featurized the corpus; bundles_out (optional dict) receives
    the per-fold trained ModelBundle objects.
    """
    cfg = (cfg or RunConfig()).with_overrides(seed=seed)
    lib = liberty or PseudoLiberty.default()
    labels = {ls.design_id: ls for _, ls in corpus}
    nets = {net.name: net for net, _ in corpus}

    if featurized is None:
        featurized = featurize_corpus(list(nets.values()), cfg, lib)

    fold_sets = assign_folds(sorted(nets), folds, seed)
    result = XvalResult(folds=fold_sets, per_design={}, predictions={},
                        signal_labels={}, design_tns={}, design_wns={})

    for fi, test_names in enumerate(fold_sets):
        train_names = [n for n in sorted(nets) if n not in test_names]
        if not train_names:
            logger.warning("fold %d has no training designs; skipped", fi)
            continue
        bundle = train_pipeline([featurized[n] for n in train_names],
                                {n: labels[n] for n in train_names}, cfg,
                                liberty_hash=lib.fingerprint())
        if bundles_out is not None:
            bundles_out[fi] = bundle
        for name in test_names:
            ls = labels[name]
            clock = cfg.clock_period if cfg.clock_period is not None else ls.clock_period
            pred = predict_design(bundle, featurized[name], clock)
            result.predictions[name] = pred
            result.signal_labels[name] = signal_labels_of(ls)
            result.per_design[name] = evaluate_design(pred, ls)
            labs = signal_labels_of(ls)
            lab_slacks = {s: clock - a for s, a in labs.items()}
            lab_tns = sum(min(0.0, s) for s in lab_slacks.values())
            lab_wns = min(0.0, min(lab_slacks.values()))
            result.design_tns[name] = (pred.tns, lab_tns)
            result.design_wns[name] = (pred.wns, lab_wns)

    result.compute_aggregate()
    return result


__all__ = ["assign_folds", "signal_labels_of", "XvalResult", "evaluate_design",
           "cross_validate"]
