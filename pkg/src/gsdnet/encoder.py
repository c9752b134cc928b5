"""
Modality encoder: 1-D convolution over the utterance axis plus sinusoidal positions
"""
from typing import Dict, Mapping

import torch
import torch.nn as nn

from src.utils.errors import DataError, ShapeError
from .types import EncodedModalities, MultimodalSample, canonical_order

POSITION_BASE = 10000.0


def positional_encoding(n: int, d: int) -> torch.Tensor:
    """
    PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(pos / 10000^(2i/d))
    """
    position = torch.arange(n, dtype=torch.float64).unsqueeze(1)
    even = torch.arange(0, d, 2, dtype=torch.float64)
    angles = position / POSITION_BASE ** (even / d)
    pe = torch.zeros(n, d, dtype=torch.float64)
    pe[:, 0::2] = torch.sin(angles)
    pe[:, 1::2] = torch.cos(angles[:, : d // 2])
    return pe


class ModalityEncoder(nn.Module):
    """One same-padded Conv1d(d_m -> d, kernel l_m) per modality"""

    def __init__(self, raw_dims: Mapping[str, int], common_dim: int, kernel_sizes: Mapping[str, int]):
        super().__init__()
        canonical_order(raw_dims)
        self.raw_dims = dict(raw_dims)
        self.common_dim = common_dim
        self.kernel_sizes = {m: int(kernel_sizes[m]) for m in raw_dims}
        self.convs = nn.ModuleDict({
            m: nn.Conv1d(raw_dims[m], common_dim, self.kernel_sizes[m], padding="same", dtype=torch.float64)
            for m in canonical_order(raw_dims)
        })

    def encode_block(self, modality: str, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 2 or x.shape[1] != self.raw_dims[modality]:
            raise ShapeError(
                f"Modality {modality!r} expects N x {self.raw_dims[modality]}, got {tuple(x.shape)}"
            )
        if x.shape[0] < 1:
            raise DataError("Cannot encode a conversation with no utterances")
        # Conv1d wants (batch, channels, length): utterances are the length axis
        out = self.convs[modality](x.T.unsqueeze(0)).squeeze(0).T
        return out + positional_encoding(x.shape[0], self.common_dim)

    def forward(self, modalities: Dict[str, torch.Tensor]) -> EncodedModalities:
        return EncodedModalities({m: self.encode_block(m, modalities[m]) for m in canonical_order(modalities)})


def encode(sample: MultimodalSample, encoder: ModalityEncoder) -> EncodedModalities:
    """Encode every modality present in `sample`; missing ones are skipped"""
    if sample.n < 1:
        raise DataError("Cannot encode a conversation with no utterances")
    return encoder(sample.tensors())
