"""Evaluation metrics: R, R^2, MAPE, and criticality ranking coverage.

MAPE averages |y - yhat| / y over nonzero labels (excluded rows are
counted and reported). COVR splits endpoints into the four 5/40/70
criticality groups and averages per-group overlap |S_g intersect
Shat_g| / |S_g|; label groups that are empty cannot contribute and are
left out of the mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .aggregate import groups_from_values
from .errors import MetricLengthMismatch


def pearson_r(y, yhat) -> float:
    """Pearson correlation; NaN when either side has zero variance."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if len(y) != len(yhat):
        raise MetricLengthMismatch(f"{len(y)} labels vs {len(yhat)} predictions")
    if len(y) < 2:
        return float("nan")
    dy = y - y.mean()
    dp = yhat - yhat.mean()
    denom = math.sqrt(float(dy @ dy)) * math.sqrt(float(dp @ dp))
    if denom == 0.0:
        return float("nan")
    return float(dy @ dp) / denom


def r_squared(y, yhat) -> float:
    """Coefficient of determination against the mean baseline."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if len(y) != len(yhat):
        raise MetricLengthMismatch(f"{len(y)} labels vs {len(yhat)} predictions")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return float("nan")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def mape_pct(y, yhat) -> tuple[float, int]:
    """Mean absolute percentage error (%); returns (mape, n_excluded)."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if len(y) != len(yhat):
        raise MetricLengthMismatch(f"{len(y)} labels vs {len(yhat)} predictions")
    keep = y != 0.0
    excluded = int(len(y) - keep.sum())
    if keep.sum() == 0:
        return float("nan"), excluded
    terms = np.abs(y[keep] - yhat[keep]) / y[keep]
    return float(terms.mean() * 100.0), excluded


def group_coverages(label_groups, pred_groups) -> dict[int, float]:
    """Per-group |S_g intersect Shat_g| / |S_g| for nonempty label groups."""
    if len(label_groups) != len(pred_groups):
        raise MetricLengthMismatch(f"{len(label_groups)} vs {len(pred_groups)} group lists")
    out = {}
    for gidx in (1, 2, 3, 4):
        s = {i for i, g in enumerate(label_groups) if g == gidx}
        if not s:
            continue
        sh = {i for i, g in enumerate(pred_groups) if g == gidx}
        out[gidx] = len(s & sh) / len(s)
    return out


def covr_pct(label_groups, pred_groups) -> tuple[float, dict[int, float]]:
    cov = group_coverages(label_groups, pred_groups)
    return float(np.mean(list(cov.values())) * 100.0), cov


@dataclass
class EvalReport:
    r: float
    r2: float
    mape_pct: float
    covr_pct: float
    group_coverages: dict[int, float]
    n: int
    mape_excluded: int = 0
    degenerate_variance: bool = False
    per_design: dict[str, dict] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "schema": "eval-1",
            "r": self.r,
            "r2": self.r2,
            "mape_pct": self.mape_pct,
            "covr_pct": self.covr_pct,
            "group_coverages": {str(k): v for k, v in sorted(self.group_coverages.items())},
            "n": self.n,
            "mape_excluded": self.mape_excluded,
            "degenerate_variance": self.degenerate_variance,
            "per_design": {k: self.per_design[k] for k in sorted(self.per_design)},
            **self.extra,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1,
                          allow_nan=True) + "\n"


def evaluate(preds: dict[str, float], labels: dict[str, float],
             pred_groups: dict[str, int] | None = None,
             label_groups: dict[str, int] | None = None) -> EvalReport:
    """Compare aligned name->value maps.

    Groups default to the 5/40/70 partition of the respective values;
    callers may pass explicit groupings (e.g. ranking-model output).
    """
    names = sorted(labels)
    if sorted(preds) != names:
        missing = sorted(set(labels) ^ set(preds))
        raise MetricLengthMismatch(f"prediction/label name sets differ: {missing[:6]}")
    y = [labels[n] for n in names]
    yhat = [preds[n] for n in names]
    if label_groups is None:
        lg = groups_from_values(y)
    else:
        lg = [label_groups[n] for n in names]
    if pred_groups is None:
        pg = groups_from_values(yhat)
    else:
        pg = [pred_groups[n] for n in names]
    r = pearson_r(y, yhat)
    r2 = r_squared(y, yhat)
    mape, excluded = mape_pct(y, yhat)
    covr, cov = covr_pct(lg, pg)
    return EvalReport(r=r, r2=r2, mape_pct=mape, covr_pct=covr,
                      group_coverages=cov, n=len(names), mape_excluded=excluded,
                      degenerate_variance=math.isnan(r))


__all__ = [
    "pearson_r", "r_squared", "mape_pct", "group_coverages", "covr_pct",
    "EvalReport", "evaluate",
]
