"""
Denoising score matching objective
"""
from typing import Callable, Dict, Optional, Tuple

import torch

from src.diffusion import DiffusionSchedule, analytic_score, forward_sample
from src.utils.config import Config
from src.utils.errors import ShapeError
from .score_net import ScoreNet

ScoreModel = Callable[[torch.Tensor, Optional[torch.Tensor], object], torch.Tensor]


def dsm_weight(schedule: DiffusionSchedule, t) -> torch.Tensor:
    """lambda(t) = std(t)^2"""
    return schedule.std(t) ** 2


def sample_times(n: int, generator: torch.Generator, t_eps: float = Config.T_EPS) -> torch.Tensor:
    """n independent draws of t ~ U(t_eps, 1)"""
    return t_eps + (1.0 - t_eps) * torch.rand(n, generator=generator, dtype=torch.float64)


def dsm_loss(net: ScoreModel, schedule: DiffusionSchedule, x0: torch.Tensor,
             cond: Optional[torch.Tensor], t, noise: torch.Tensor,
             t_eps: float = Config.T_EPS) -> torch.Tensor:
    """
    lambda(t) ||s(x_t, cond, t) - grad log p_t(x_t | x0)||^2, summed over every entry

    x_t = forward_sample(schedule, x0, t, noise). Leading dimensions of x0 are a batch
    of states whose squared errors are summed.

    Args:
        net: Score model called as net(x_t, cond, t)
        schedule: Forward SDE of the stream
        x0: Clean states, batch x state length
        cond: Conditioning vectors with the same leading dims (or None)
        t: One time shared by the batch, or a 1-D tensor with one time per row of x0
        noise: Standard normal draws shaped like x0
        t_eps: Smallest admissible time

    Returns:
        Scalar loss tensor
    """
    times = torch.as_tensor(t, dtype=torch.float64)
    if bool(torch.any(times < t_eps)):
        raise ValueError(f"t={float(times.min())} is below t_eps={t_eps}")
    if times.dim() > 1 or (times.dim() == 1 and (x0.dim() != 2 or times.shape[0] != x0.shape[0])):
        raise ShapeError(f"Per-row times of shape {tuple(times.shape)} do not match states {tuple(x0.shape)}")

    xt = forward_sample(schedule, x0, t, noise)
    target = analytic_score(schedule, xt, x0, t)
    prediction = net(xt, cond, t)
    weight = dsm_weight(schedule, t)
    if times.dim() == 1:
        return torch.sum(weight * torch.sum((prediction - target) ** 2, dim=-1))
    return weight * torch.sum((prediction - target) ** 2)


def dsm_loss_and_grad(net: ScoreNet, schedule: DiffusionSchedule, x0: torch.Tensor,
                      cond: Optional[torch.Tensor], t, noise: torch.Tensor,
                      t_eps: float = Config.T_EPS) -> Tuple[float, Dict[str, torch.Tensor]]:
    """
    Scalar DSM loss and its gradient with respect to every parameter of `net`

    Args:
        net: Score network
        schedule: Forward SDE
        x0: Clean data
        cond: Optional conditioning vector
        t: Diffusion time, scalar or one per row of x0
        noise: Standard normal draws shaped like x0
        t_eps: Smallest admissible time

    Returns:
        (loss, gradients keyed by parameter name)
    """
    with torch.enable_grad():
        loss = dsm_loss(net, schedule, x0, cond, t, noise, t_eps=t_eps)
        names, params = zip(*net.named_parameters())
        grads = torch.autograd.grad(loss, params, allow_unused=True)
    grads = {n: torch.zeros_like(p) if g is None else g for n, p, g in zip(names, params, grads)}
    return float(loss), grads
