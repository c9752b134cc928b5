"""
Sinusoidal time embedding for the score networks
"""
import math

import torch
import torch.nn as nn

MAX_FREQUENCY = 1000.0


class TimeEmbedding(nn.Module):
    """
    [sin(w_k t), cos(w_k t)] for a geometric ladder w_k from 1 to MAX_FREQUENCY

    Entries are bounded by 1. The lowest frequency is 1, so the map is injective on
    t in [0, 1] for any dim >= 2.
    """

    def __init__(self, dim: int):
        super().__init__()
        if dim < 2 or dim % 2:
            raise ValueError(f"Time embedding dim must be a positive even integer, got {dim}")
        self.dim = dim
        half = dim // 2
        if half == 1:
            frequencies = torch.ones(1, dtype=torch.float64)
        else:
            exponents = torch.arange(half, dtype=torch.float64) / (half - 1)
            frequencies = torch.exp(exponents * math.log(MAX_FREQUENCY))
        self.register_buffer("frequencies", frequencies)

    def forward(self, t) -> torch.Tensor:
        t = torch.as_tensor(t, dtype=torch.float64)
        angles = t.unsqueeze(-1) * self.frequencies
        return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)
