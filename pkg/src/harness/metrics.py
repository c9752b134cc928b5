"""
Sentiment metrics: ACC2 and F1 over non-zero labels, ACC7 over uniform buckets of [-3, 3]
"""
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from sklearn.metrics import accuracy_score, f1_score

from src.gsdnet.head import bucket_index
from src.utils.errors import DataError


@dataclass(frozen=True)
class SentimentScores:
    acc2: float
    f1: float
    acc7: float

    def to_dict(self) -> Dict[str, float]:
        return {"acc2": self.acc2, "f1": self.f1, "acc7": self.acc7}


def _nonzero(predictions, labels):
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if predictions.shape != labels.shape or labels.ndim != 1:
        raise DataError(f"Predictions {predictions.shape} and labels {labels.shape} must be equal-length vectors")
    keep = labels != 0
    if not np.any(keep):
        raise DataError("Every label is zero; binary metrics are undefined")
    return (predictions[keep] > 0).astype(int), (labels[keep] > 0).astype(int)


def acc2(predictions: Sequence[float], labels: Sequence[float]) -> float:
    y_pred, y_true = _nonzero(predictions, labels)
    return float(accuracy_score(y_true, y_pred))


def binary_f1(predictions: Sequence[float], labels: Sequence[float]) -> float:
    """Macro F1 over the binary classes that occur in either vector"""
    y_pred, y_true = _nonzero(predictions, labels)
    classes = sorted(set(y_true.tolist()) | set(y_pred.tolist()))
    return float(f1_score(y_true, y_pred, labels=classes, average="macro", zero_division=0))


def acc7(predictions: Sequence[float], labels: Sequence[float]) -> float:
    if len(labels) == 0:
        raise DataError("acc7 needs at least one label")
    return float(accuracy_score([bucket_index(y) for y in labels], [bucket_index(p) for p in predictions]))


def sentiment_scores(predictions: Sequence[float], labels: Sequence[float]) -> SentimentScores:
    return SentimentScores(acc2=acc2(predictions, labels), f1=binary_f1(predictions, labels),
                           acc7=acc7(predictions, labels))
