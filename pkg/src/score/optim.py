"""
Adam optimizer helpers
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import torch

from src.utils.config import Config
from src.utils.errors import ShapeError


@dataclass
class AdamState:
    """Read-only view of torch.optim.Adam's per-parameter state"""
    step: int
    exp_avg: torch.Tensor
    exp_avg_sq: torch.Tensor
    lr: float
    betas: Tuple[float, float]
    eps: float


def make_optimizer(params: Iterable[torch.nn.Parameter], lr: float = Config.LEARNING_RATE,
                   betas: Tuple[float, float] = Config.ADAM_BETAS,
                   eps: float = Config.ADAM_EPS) -> torch.optim.Adam:
    # foreach=False keeps the update on the single-tensor code path
    return torch.optim.Adam(list(params), lr=lr, betas=betas, eps=eps, foreach=False)


def adam_step(optimizer: torch.optim.Adam, params: Sequence[torch.Tensor],
              grads: Sequence[torch.Tensor]) -> None:
    """Load `grads` into `params` and apply one bias-corrected Adam update in place"""
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameters but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeError(f"Gradient shape {tuple(g.shape)} != parameter shape {tuple(p.shape)}")
        p.grad = g.detach().clone()
    optimizer.step()


def adam_state(optimizer: torch.optim.Adam, param: torch.Tensor) -> AdamState:
    group = next(g for g in optimizer.param_groups if any(p is param for p in g["params"]))
    state = optimizer.state.get(param, {})
    step = state.get("step", 0)
    return AdamState(
        step=int(step.item() if isinstance(step, torch.Tensor) else step),
        exp_avg=state.get("exp_avg", torch.zeros_like(param)),
        exp_avg_sq=state.get("exp_avg_sq", torch.zeros_like(param)),
        lr=group["lr"],
        betas=tuple(group["betas"]),
        eps=group["eps"],
    )
