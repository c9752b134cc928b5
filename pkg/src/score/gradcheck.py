"""
Central finite-difference gradient checker
"""
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import torch

from src.utils.logger import setup_logger

logger = setup_logger()


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_checked: int
    worst: Tuple[int, int]       # (parameter index, flat coordinate)

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error <= tolerance


def relative_error(analytic: float, numeric: float, atol: float = 1e-7) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), atol)


def finite_difference_check(loss_fn: Callable[[], torch.Tensor], params: Sequence[torch.Tensor],
                            n_coords: int = 50, h: float = 1e-4,
                            generator: torch.Generator = None) -> GradCheckReport:
    """
    Compare autograd gradients of `loss_fn` with central differences

    `n_coords` (parameter, coordinate) pairs are drawn uniformly over all parameter
    entries; every parameter is restored after probing.
    """
    generator = generator or torch.Generator().manual_seed(0)
    params = list(params)

    with torch.enable_grad():
        analytic = torch.autograd.grad(loss_fn(), params, allow_unused=True)
    analytic = [torch.zeros_like(p) if g is None else g for g, p in zip(analytic, params)]

    sizes = torch.tensor([p.numel() for p in params])
    offsets = torch.cumsum(sizes, 0) - sizes
    total = int(sizes.sum())
    picks: List[int] = torch.randint(0, total, (n_coords,), generator=generator).tolist()

    worst_error, worst = 0.0, (0, 0)
    with torch.no_grad():
        for flat in picks:
            index = int(torch.searchsorted(offsets, torch.tensor(flat), right=True)) - 1
            coord = flat - int(offsets[index])
            view = params[index].view(-1)
            original = view[coord].item()

            view[coord] = original + h
            plus = float(loss_fn())
            view[coord] = original - h
            minus = float(loss_fn())
            view[coord] = original

            numeric = (plus - minus) / (2 * h)
            error = relative_error(float(analytic[index].view(-1)[coord]), numeric)
            if error > worst_error:
                worst_error, worst = error, (index, coord)

    logger.debug(f"Gradient check: {len(picks)} coordinates, max relative error {worst_error:.2e}")
    return GradCheckReport(max_rel_error=worst_error, n_checked=len(picks), worst=worst)
