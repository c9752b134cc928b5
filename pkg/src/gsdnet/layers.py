"""
Small building blocks: seeded initialization and MLP decoders
"""
import torch
import torch.nn as nn


def seeded_init_(module: nn.Module, generator: torch.Generator) -> nn.Module:
    """
    Re-initialize every Linear/Conv1d weight and bias as U(-1/sqrt(fan_in), 1/sqrt(fan_in))

    Modules are visited in `named_modules` order, so the result depends on the generator
    state alone.
    """
    with torch.no_grad():
        for _, sub in module.named_modules():
            if not isinstance(sub, (nn.Linear, nn.Conv1d)):
                continue
            fan_in = sub.weight[0].numel()
            bound = 1.0 / fan_in ** 0.5
            sub.weight.copy_((torch.rand(sub.weight.shape, generator=generator, dtype=sub.weight.dtype) * 2 - 1) * bound)
            if sub.bias is not None:
                sub.bias.copy_((torch.rand(sub.bias.shape, generator=generator, dtype=sub.bias.dtype) * 2 - 1) * bound)
    return module


class MLPDecoder(nn.Module):
    """
    Linear -> tanh -> Linear, applied over the last dimension

    Without `residual` a linear skip path is added: skip(x) + mlp(x). With
    `residual=True` (requires in_dim == out_dim) the output is x + mlp(x); after
    `zero_output_` the decoder is the identity.
    """

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, residual: bool = False):
        super().__init__()
        if residual and in_dim != out_dim:
            raise ValueError("A residual decoder needs in_dim == out_dim")
        self.residual = residual
        self.hidden = nn.Linear(in_dim, hidden_dim, dtype=torch.float64)
        self.out = nn.Linear(hidden_dim, out_dim, dtype=torch.float64)
        self.skip = None if residual else nn.Linear(in_dim, out_dim, dtype=torch.float64)

    def zero_output_(self) -> None:
        with torch.no_grad():
            self.out.weight.zero_()
            self.out.bias.zero_()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.out(torch.tanh(self.hidden(x)))
        return x + y if self.residual else self.skip(x) + y
