from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support


def macro_f1(y_true, y_pred) -> float:
    _, _, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=[0, 1], zero_division=0
    )
    return float(np.mean(f1))


@dataclass
class MetricsReport:
    accuracy: float
    macro_f1: float
    per_class: dict
    confusion: list
    curve: list = field(default_factory=list)
    wall_clock_s: Optional[float] = None

    @classmethod
    def from_predictions(cls, y_true, y_pred, curve=None, wall_clock_s=None) -> "MetricsReport":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        prec, rec, f1, support = precision_recall_fscore_support(
            y_true, y_pred, labels=[0, 1], zero_division=0
        )
        per_class = {
            str(c): {
                "precision": float(prec[c]),
                "recall": float(rec[c]),
                "f1": float(f1[c]),
                "support": int(support[c]),
            }
            for c in (0, 1)
        }
        return cls(
            accuracy=float(np.mean(y_true == y_pred)) if len(y_true) else 0.0,
            macro_f1=float(np.mean(f1)),
            per_class=per_class,
            confusion=confusion_matrix(y_true, y_pred, labels=[0, 1]).tolist(),
            curve=list(curve or []),
            wall_clock_s=wall_clock_s,
        )
