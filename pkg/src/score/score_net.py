"""
MLP score estimator s(state, cond, t) with recorded forward/backward passes
"""
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import torch
import torch.nn as nn

from src.utils.config import Config
from src.utils.errors import ShapeError
from src.utils.logger import setup_logger
from .time_embedding import TimeEmbedding

logger = setup_logger()

ACTIVATIONS = {
    "tanh": nn.Tanh,
    "softplus": nn.Softplus,
    "identity": nn.Identity,
}


@dataclass
class ScoreGradients:
    """Gradients of one recorded computation"""
    params: Dict[str, torch.Tensor]
    state: torch.Tensor
    cond: torch.Tensor


class ScoreNet(nn.Module):
    """
    Score network over the concatenated input [state || cond || time-embedding]

    The output has the shape of the state. With `zero_final=True` the last layer starts
    at zero, so a freshly built net returns a zero score everywhere.

    Args:
        input_dim: State length (also the output length)
        cond_dim: Conditioning vector length (0 for unconditional nets)
        time_embed_dim: Even time-embedding width
        hidden_dims: Hidden layer widths
        activation: One of ACTIVATIONS
        seed: Seed of the deterministic initialization
        zero_final: Zero-initialize the last layer
    """

    def __init__(self, input_dim: int, cond_dim: int = 0,
                 time_embed_dim: int = Config.TIME_EMBED_DIM,
                 hidden_dims: Sequence[int] = tuple(Config.SCORE_HIDDEN_DIMS),
                 activation: str = Config.SCORE_ACTIVATION,
                 seed: int = 0, zero_final: bool = True):
        super().__init__()
        if input_dim < 1 or cond_dim < 0:
            raise ValueError(f"Invalid dims: input_dim={input_dim}, cond_dim={cond_dim}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"Unknown activation {activation!r}; choose from {sorted(ACTIVATIONS)}")

        self.input_dim = input_dim
        self.output_dim = input_dim
        self.cond_dim = cond_dim
        self.time_embed_dim = time_embed_dim
        self.hidden_dims = list(hidden_dims)
        self.activation_name = activation
        self.seed = seed

        self.time_embedding = TimeEmbedding(time_embed_dim)
        widths = [input_dim + cond_dim + time_embed_dim] + self.hidden_dims + [self.output_dim]
        self.layers = nn.ModuleList(
            nn.Linear(w_in, w_out, dtype=torch.float64) for w_in, w_out in zip(widths[:-1], widths[1:])
        )
        self.activation = ACTIVATIONS[activation]()

        self._init_parameters(seed, zero_final)
        self._tape = None

    def _init_parameters(self, seed: int, zero_final: bool) -> None:
        generator = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for i, layer in enumerate(self.layers):
                if zero_final and i == len(self.layers) - 1:
                    layer.weight.zero_()
                    layer.bias.zero_()
                    continue
                bound = 1.0 / layer.in_features ** 0.5
                layer.weight.copy_(
                    (torch.rand(layer.weight.shape, generator=generator, dtype=torch.float64) * 2 - 1) * bound
                )
                layer.bias.copy_(
                    (torch.rand(layer.bias.shape, generator=generator, dtype=torch.float64) * 2 - 1) * bound
                )

    def config(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "cond_dim": self.cond_dim,
            "time_embed_dim": self.time_embed_dim,
            "hidden_dims": list(self.hidden_dims),
            "activation": self.activation_name,
            "seed": self.seed,
        }

    @property
    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def _check_inputs(self, state: torch.Tensor, cond: Optional[torch.Tensor]) -> torch.Tensor:
        if state.shape[-1] != self.input_dim:
            raise ShapeError(f"State length {state.shape[-1]} != input_dim {self.input_dim}")
        if cond is None:
            cond = state.new_zeros(state.shape[:-1] + (self.cond_dim,))
        if cond.shape[-1] != self.cond_dim:
            raise ShapeError(f"Condition length {cond.shape[-1]} != cond_dim {self.cond_dim}")
        if cond.shape[:-1] != state.shape[:-1]:
            raise ShapeError(f"Condition batch shape {tuple(cond.shape[:-1])} != state {tuple(state.shape[:-1])}")
        return cond

    def forward(self, state: torch.Tensor, cond: Optional[torch.Tensor], t) -> torch.Tensor:
        cond = self._check_inputs(state, cond)
        embedding = self.time_embedding(t).expand(state.shape[:-1] + (self.time_embed_dim,))
        h = torch.cat([state, cond, embedding], dim=-1)
        for layer in self.layers[:-1]:
            h = self.activation(layer(h))
        return self.layers[-1](h)

    def record(self, state: torch.Tensor, cond: Optional[torch.Tensor], t) -> torch.Tensor:
        """Forward pass on leaf copies of the inputs, kept for `backward`"""
        cond = self._check_inputs(state, cond)
        state = state.detach().clone().requires_grad_(True)
        cond = cond.detach().clone().requires_grad_(True)
        with torch.enable_grad():
            output = self.forward(state, cond, t)
        self._tape = (state, cond, output)
        return output.detach()

    def backward(self, upstream: torch.Tensor) -> ScoreGradients:
        """Exact gradients of <upstream, output> for the last recorded forward pass"""
        if self._tape is None:
            raise RuntimeError("backward called before a recorded forward pass")
        state, cond, output = self._tape
        if upstream.shape != output.shape:
            raise ShapeError(f"Upstream gradient shape {tuple(upstream.shape)} != output {tuple(output.shape)}")

        names = [name for name, _ in self.named_parameters()]
        params = [p for _, p in self.named_parameters()]
        grads = torch.autograd.grad(output, params + [state, cond], grad_outputs=upstream,
                                    retain_graph=True, allow_unused=True)
        grads = [torch.zeros_like(x) if g is None else g for g, x in zip(grads, params + [state, cond])]
        return ScoreGradients(
            params=dict(zip(names, grads[:len(params)])),
            state=grads[-2],
            cond=grads[-1],
        )

    def clear_tape(self) -> None:
        self._tape = None


def forward(net: ScoreNet, state: torch.Tensor, cond: Optional[torch.Tensor], t) -> torch.Tensor:
    """Recorded forward pass of `net`"""
    return net.record(state, cond, t)


def backward(net: ScoreNet, upstream: torch.Tensor) -> ScoreGradients:
    """Gradients of the last recorded forward pass of `net`"""
    return net.backward(upstream)


class StdScaledScore:
    """
    Score read off a noise-predicting net: s(x, cond, t) = net(x, cond, t) / std(t)

    The net regresses onto -noise, which stays O(1) at every t. A zero-initialized net
    still gives a zero score.
    """

    def __init__(self, net: ScoreNet, schedule):
        self.net = net
        self.schedule = schedule

    def __call__(self, state: torch.Tensor, cond: Optional[torch.Tensor], t) -> torch.Tensor:
        std = self.schedule.std(t)
        if std.dim() > 0:
            std = std.reshape(std.shape + (1,) * (state.dim() - std.dim()))
        return self.net(state, cond, t) / std

    def parameters(self):
        return self.net.parameters()
