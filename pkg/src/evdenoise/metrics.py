"""Confusion counts and rates for real/noise labelling.

Naming follows the event-denoising literature this package reproduces, which
is *not* the usual convention:

    tp  real event labelled real          (conventional TP)
    fp  real event labelled noise         (conventional FN)
    tn  noise event labelled noise        (conventional TN)
    fn  noise event labelled real         (conventional FP)

so ``tpr = tp / (tp + fp)`` is recall on real events and
``tnr = tn / (tn + fn)`` recall on noise events.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .events import NOISE, REAL, UNKNOWN


@dataclass(frozen=True)
class ConfusionReport:
    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float
    tnr: float
    acc: float
    ct_seconds: float = 0.0
    undefined: tuple = field(default=())  # rates whose denominator was zero (set to 1)

    def to_text(self) -> str:
        lines = [f"{k}={v}" for k, v in self.to_dict().items()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["undefined"] = ",".join(self.undefined)
        return d

    def to_json(self) -> str:
        d = asdict(self)
        d["undefined"] = list(self.undefined)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _rate(num, den, name, undefined):
    if den == 0:
        undefined.append(name)
        return 1.0
    return num / den


def evaluate(pred, truth, elapsed: float = 0.0) -> ConfusionReport:
    """Compare predicted labels against ground truth (1 = real, 0 = noise)."""
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions vs {truth.shape[0]} labels")
    if np.any(truth == UNKNOWN) or not np.isin(truth, (REAL, NOISE)).all():
        raise ValueError("ground truth must contain only 0 (noise) and 1 (real)")
    if not np.isin(pred, (REAL, NOISE)).all():
        raise ValueError("predictions must contain only 0 (noise) and 1 (real)")
    real = truth == REAL
    said_real = pred == REAL
    tp = int(np.sum(real & said_real))
    fp = int(np.sum(real & ~said_real))
    tn = int(np.sum(~real & ~said_real))
    fn = int(np.sum(~real & said_real))
    undefined = []
    tpr = _rate(tp, tp + fp, "tpr", undefined)
    tnr = _rate(tn, tn + fn, "tnr", undefined)
    acc = _rate(tp + tn, tp + tn + fp + fn, "acc", undefined)
    return ConfusionReport(tp, fp, tn, fn, tpr, tnr, acc, float(elapsed), tuple(undefined))
