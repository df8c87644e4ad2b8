"""
Confusion counts and precision / recall / F1 for the sexist (1) class.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

from sexism_detector.utils.exceptions import MetricsError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise MetricsError(f"{name} must be a non-negative integer, got {value}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def predicted_positive_rate(self) -> float:
        return (self.tp + self.fp) / self.total if self.total else 0.0


def confusion(preds: Sequence[int], golds: Sequence[int]) -> ConfusionCounts:
    """
    Count agreement between predicted and gold labels.

    Raises:
        MetricsError: Length mismatch or a label outside {0, 1}
    """
    preds = [int(p) for p in preds]
    golds = [int(g) for g in golds]
    if len(preds) != len(golds):
        raise MetricsError(f"Got {len(preds)} predictions for {len(golds)} gold labels")
    bad = {v for v in preds + golds if v not in (0, 1)}
    if bad:
        raise MetricsError(f"Labels must be 0 or 1, got {sorted(bad)}")

    tp = sum(1 for p, g in zip(preds, golds) if p == 1 and g == 1)
    fp = sum(1 for p, g in zip(preds, golds) if p == 1 and g == 0)
    fn = sum(1 for p, g in zip(preds, golds) if p == 0 and g == 1)
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=len(preds) - tp - fp - fn)


def precision_recall_f1(counts: ConfusionCounts) -> Tuple[float, float, float]:
    """
    Precision, recall and their harmonic mean. A metric whose denominator
    is zero is reported as 0.0.
    """
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1
