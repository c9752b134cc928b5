"""
Graph-convolution fusion of observed and recovered modalities
"""
from typing import Sequence

import torch
import torch.nn as nn

from src.utils.errors import NumericalError, ShapeError


def normalize_adjacency(adjacency: torch.Tensor) -> torch.Tensor:
    """D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I"""
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise ShapeError(f"Adjacency must be square, got {tuple(adjacency.shape)}")
    with_loops = adjacency + torch.eye(adjacency.shape[0], dtype=adjacency.dtype)
    degree = with_loops.sum(dim=1)
    if torch.any(degree <= 0):
        raise NumericalError("Adjacency with self-loops has a non-positive degree")
    inv_sqrt = degree.rsqrt()
    return inv_sqrt[:, None] * with_loops * inv_sqrt[None, :]


def gcn_propagate(features: torch.Tensor, adjacency: torch.Tensor,
                  weights: Sequence[torch.Tensor], normalize: bool = True) -> torch.Tensor:
    """
    Node states after len(weights) layers of H <- ReLU(A_hat H W)

    Args:
        features: Node features, one row per node
        adjacency: Square adjacency over the nodes
        weights: Layer weight matrices, applied in order
        normalize: Replace the adjacency by D^{-1/2} (A + I) D^{-1/2} first

    Returns:
        Node states, one row per node
    """
    if features.ndim != 2 or adjacency.shape != (features.shape[0], features.shape[0]):
        raise ShapeError(
            f"Features {tuple(features.shape)} do not match adjacency {tuple(adjacency.shape)}"
        )
    a_hat = normalize_adjacency(adjacency) if normalize else adjacency
    h = features
    for layer, w in enumerate(weights):
        if w.ndim != 2 or w.shape[0] != h.shape[1]:
            raise ShapeError(f"Layer {layer} weight {tuple(w.shape)} does not accept width {h.shape[1]}")
        h = torch.relu(a_hat @ h @ w)
    return h


def gcn_forward(features: torch.Tensor, adjacency: torch.Tensor,
                weights: Sequence[torch.Tensor], normalize: bool = True) -> torch.Tensor:
    """Fused conversation vector: node states mean-pooled over nodes"""
    return gcn_propagate(features, adjacency, weights, normalize=normalize).mean(dim=0)


class GCNFusion(nn.Module):
    """Stack of square d x d graph-convolution weights"""

    def __init__(self, dim: int, n_layers: int, generator: torch.Generator = None):
        super().__init__()
        generator = generator or torch.Generator().manual_seed(0)
        # Glorot-uniform bound for square layers
        bound = (6.0 / (2 * dim)) ** 0.5
        self.weights = nn.ParameterList(
            nn.Parameter((torch.rand(dim, dim, generator=generator, dtype=torch.float64) * 2 - 1) * bound)
            for _ in range(n_layers)
        )

    def forward(self, features: torch.Tensor, adjacency: torch.Tensor) -> torch.Tensor:
        return gcn_forward(features, adjacency, list(self.weights))
