"""
Forward perturbation, analytic scores and reverse-time SDE samplers

All functions are pure: randomness comes in as `noise` tensors or a caller-owned
`torch.Generator`; nothing here draws entropy on its own.
"""
from typing import Callable, Optional, Sequence

import torch

from src.utils.config import Config
from src.utils.errors import NumericalError, ShapeError
from src.utils.logger import setup_logger
from .schedules import DiffusionSchedule, SdeStepPlan, TimeLike, VE, _as_tensor

logger = setup_logger()

ScoreFn = Callable[[torch.Tensor, float], torch.Tensor]


def _check_time(t: TimeLike, low_open: bool = False) -> float:
    value = float(t)
    if value > 1.0 or value < 0.0 or (low_open and value == 0.0):
        interval = "(0, 1]" if low_open else "[0, 1]"
        raise ValueError(f"t must lie in {interval}, got {value}")
    return value


def _check_times(t: TimeLike) -> None:
    if isinstance(t, torch.Tensor) and t.dim() > 0:
        if bool(torch.any((t < 0.0) | (t > 1.0))):
            raise ValueError(f"Every t must lie in [0, 1], got range [{float(t.min())}, {float(t.max())}]")
    else:
        _check_time(t)


def _broadcast_time(values: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    """Per-row time values (shape = leading dims of x) reshaped to broadcast against x"""
    if values.dim() == 0:
        return values
    if values.shape != x.shape[:values.dim()]:
        raise ShapeError(f"Per-row times of shape {tuple(values.shape)} do not lead x of shape {tuple(x.shape)}")
    return values.reshape(values.shape + (1,) * (x.dim() - values.dim()))


def _check_same_shape(a: torch.Tensor, b: torch.Tensor, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shape {tuple(a.shape)} vs {tuple(b.shape)}")


def forward_sample(schedule: DiffusionSchedule, x0: torch.Tensor, t: TimeLike,
                   noise: torch.Tensor) -> torch.Tensor:
    """
    x_t = mean_scale(t) x0 + std(t) noise

    Args:
        schedule: Forward SDE
        x0: Clean states
        t: One time in [0, 1], or a tensor of per-row times matching the leading dims of x0
        noise: Standard normal draws shaped like x0

    Returns:
        Perturbed states shaped like x0
    """
    _check_times(t)
    _check_same_shape(x0, noise, "forward_sample noise")
    kernel = schedule.kernel(t)
    return _broadcast_time(kernel.mean_scale, x0) * x0 + _broadcast_time(kernel.std, x0) * noise


def analytic_score(schedule: DiffusionSchedule, xt: torch.Tensor, x0: torch.Tensor,
                   t: TimeLike) -> torch.Tensor:
    """
    Gradient of log N(xt; mean_scale(t) x0, std(t)^2 I) with respect to xt

    Args:
        schedule: Forward SDE
        xt: Perturbed states
        x0: Clean states shaped like xt
        t: One time, or per-row times as in `forward_sample`

    Returns:
        Score shaped like xt
    """
    _check_times(t)
    _check_same_shape(xt, x0, "analytic_score")
    kernel = schedule.kernel(t)
    if bool(torch.any(kernel.std <= 0.0)):
        raise NumericalError(f"Perturbation kernel is degenerate (std = 0) at t={t}")
    mean_scale = _broadcast_time(kernel.mean_scale, xt)
    return -(xt - mean_scale * x0) / _broadcast_time(kernel.variance, xt)


def reverse_step(schedule: DiffusionSchedule, xt: torch.Tensor, t: TimeLike, dt: float,
                 score: torch.Tensor, noise: torch.Tensor) -> torch.Tensor:
    """
    One Euler-Maruyama step of the reverse-time SDE, from t to t - dt

        x_{t-dt} = x_t - [f(x_t, t) - g(t)^2 score] dt + g(t) sqrt(dt) noise

    Args:
        schedule: Forward SDE
        xt: States at time t
        t: Current time in (0, 1]
        dt: Step size, 0 < dt <= t
        score: Score estimate at (xt, t)
        noise: Standard normal draws shaped like xt

    Returns:
        States at t - dt
    """
    _check_time(t, low_open=True)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > float(t) + 1e-12:
        raise ValueError(f"dt={dt} overshoots t={float(t)}")
    _check_same_shape(xt, score, "reverse_step score")
    _check_same_shape(xt, noise, "reverse_step noise")

    g = schedule.diffusion_coeff(t)
    drift = schedule.drift(xt, t) - g ** 2 * score
    return xt - drift * dt + g * (dt ** 0.5) * noise


def corrector_step(schedule: DiffusionSchedule, xt: torch.Tensor, t: TimeLike,
                   score: torch.Tensor, noise: torch.Tensor, snr: float,
                   step_floor: float = None) -> torch.Tensor:
    """
    Langevin corrector at fixed t

    Step size eps = 2 (snr ||noise|| / ||score||)^2, norms taken over the whole tensor.
    A zero score with snr > 0 uses `step_floor`; snr = 0 leaves xt unchanged.

    Args:
        schedule: Forward SDE
        xt: States at time t
        t: Time in (0, 1]
        score: Score estimate at (xt, t)
        noise: Standard normal draws shaped like xt
        snr: Target signal-to-noise ratio of the step
        step_floor: Step size used for a zero score (default: Config.CORRECTOR_STEP_FLOOR)

    Returns:
        Corrected states at the same t
    """
    _check_time(t, low_open=True)
    _check_same_shape(xt, score, "corrector_step score")
    _check_same_shape(xt, noise, "corrector_step noise")
    if snr < 0:
        raise ValueError(f"snr must be non-negative, got {snr}")
    if snr == 0:
        return xt

    step_floor = Config.CORRECTOR_STEP_FLOOR if step_floor is None else step_floor
    score_norm = torch.linalg.vector_norm(score)
    if float(score_norm) == 0.0:
        logger.debug(f"Zero score at t={float(t):.4f}; corrector step clamped to {step_floor}")
        eps = torch.tensor(step_floor, dtype=xt.dtype)
    else:
        noise_norm = torch.linalg.vector_norm(noise)
        eps = 2.0 * (snr * noise_norm / score_norm) ** 2
    return xt + eps * score + torch.sqrt(2.0 * eps) * noise


def prior_sample(schedule: DiffusionSchedule, dim: int, noise: torch.Tensor) -> torch.Tensor:
    """Sample of the t = 1 prior: N(0, I) for VP, N(0, sigma_max^2 I) for VE"""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if noise.shape[-1] != dim:
        raise ShapeError(f"noise trailing dimension {noise.shape[-1]} != dim {dim}")
    if schedule.kind == VE:
        return schedule.sigma_max * noise
    return noise


def integrate_reverse(schedule: DiffusionSchedule, score_fn: ScoreFn, x: torch.Tensor,
                      times: Sequence[float], generator: torch.Generator,
                      corrector_steps: int = 0, corrector_snr: float = Config.CORRECTOR_SNR
                      ) -> torch.Tensor:
    """
    Run the reverse SDE along a descending time grid

    Each predictor step (Euler-Maruyama) is followed by `corrector_steps` Langevin
    corrections at the new time. The final state sits at times[-1].

    Args:
        schedule: Forward SDE
        score_fn: score_fn(x, t) -> score shaped like x
        x: Starting states at times[0]
        times: Descending time grid
        generator: Source of every noise draw
        corrector_steps: Langevin corrections after each predictor step
        corrector_snr: Corrector signal-to-noise ratio

    Returns:
        States at times[-1]
    """
    for k in range(len(times) - 1):
        t, t_next = float(times[k]), float(times[k + 1])
        noise = torch.randn(x.shape, generator=generator, dtype=x.dtype)
        x = reverse_step(schedule, x, t, t - t_next, score_fn(x, t), noise)
        for _ in range(corrector_steps):
            noise = torch.randn(x.shape, generator=generator, dtype=x.dtype)
            x = corrector_step(schedule, x, t_next, score_fn(x, t_next), noise, corrector_snr)
    return x


def sample(schedule: DiffusionSchedule, score_fn: ScoreFn, shape, plan: SdeStepPlan,
           generator: torch.Generator, x_init: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    Draw from the prior (unless `x_init` is given) and integrate down to plan.t_eps

    Args:
        schedule: Forward SDE
        score_fn: score_fn(x, t) -> score shaped like x
        shape: Shape of the states; the last entry is the state length
        plan: Time grid and corrector settings
        generator: Source of the prior draw and every sampler draw
        x_init: Optional starting states at t = 1

    Returns:
        Samples at plan.t_eps
    """
    if x_init is None:
        noise = torch.randn(tuple(shape), generator=generator, dtype=torch.float64)
        x_init = prior_sample(schedule, noise.shape[-1], noise)
    return integrate_reverse(schedule, score_fn, x_init, plan.time_grid(), generator,
                             corrector_steps=plan.corrector_steps,
                             corrector_snr=plan.corrector_snr)


def gaussian_data_score(schedule: DiffusionSchedule, x: torch.Tensor, t: TimeLike,
                        mean: float, std: float) -> torch.Tensor:
    """
    Exact score of p_t when the data are N(mean, std^2) per coordinate

    p_t = N(mean_scale mean, mean_scale^2 std^2 + std(t)^2).
    """
    kernel = schedule.kernel(_as_tensor(t))
    variance = kernel.mean_scale ** 2 * std ** 2 + kernel.variance
    return -(x - kernel.mean_scale * mean) / variance
