"""
Sentiment prediction head and its derived readouts
"""
import math
from dataclasses import dataclass

import torch
import torch.nn as nn

LABEL_MIN = -3.0
LABEL_MAX = 3.0
N_BUCKETS = 7


@dataclass(frozen=True)
class Prediction:
    score: float
    binary: int          # 1 positive, 0 negative-or-zero
    bucket: int          # 0..6 over uniform buckets of [-3, 3]


def binary_class(score: float) -> int:
    return int(score > 0)


def bucket_index(score: float) -> int:
    """Index of the uniform [-3, 3] bucket holding `score` (clipped into range)"""
    clipped = min(max(float(score), LABEL_MIN), LABEL_MAX)
    width = (LABEL_MAX - LABEL_MIN) / N_BUCKETS
    return min(int(math.floor((clipped - LABEL_MIN) / width)), N_BUCKETS - 1)


class PredictionHead(nn.Module):
    """Linear readout of the fused conversation vector to a sentiment score"""

    def __init__(self, dim: int):
        super().__init__()
        self.linear = nn.Linear(dim, 1, dtype=torch.float64)

    def forward(self, fused: torch.Tensor) -> torch.Tensor:
        return self.linear(fused).squeeze(-1)


def predict(fused: torch.Tensor, head: PredictionHead) -> Prediction:
    """Regression score, binary class and bucket for one fused conversation vector"""
    with torch.no_grad():
        score = float(head(fused))
    return Prediction(score=score, binary=binary_class(score), bucket=bucket_index(score))


def prediction_loss(score: torch.Tensor, label: float) -> torch.Tensor:
    """Squared error on the regression score"""
    return (score - label) ** 2
