"""
Noise schedules, closed-form perturbation kernels and sampler step plans
"""
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import torch

from src.utils.config import Config

TimeLike = Union[float, torch.Tensor]

VP = "vp"
VE = "ve"


def _as_tensor(t: TimeLike) -> torch.Tensor:
    return t if isinstance(t, torch.Tensor) else torch.tensor(float(t), dtype=torch.float64)


@dataclass(frozen=True)
class PerturbationKernel:
    """p_t(x_t | x_0) = N(mean_scale * x_0, std^2 I) at one time t"""
    mean_scale: torch.Tensor
    std: torch.Tensor

    @property
    def variance(self) -> torch.Tensor:
        return self.std ** 2


@dataclass(frozen=True)
class DiffusionSchedule:
    """
    Forward SDE dx = f(x, t) dt + g(t) dw on t in [0, 1]

    VP: beta(t) = beta_min + t (beta_max - beta_min), f = -beta(t) x / 2, g = sqrt(beta(t)).
    VE: sigma(t) = sigma_min (sigma_max / sigma_min)^t, f = 0,
        g = sigma(t) sqrt(2 log(sigma_max / sigma_min)), std(t)^2 = sigma(t)^2 - sigma_min^2.
    """
    kind: str = Config.SCHEDULE_KIND
    beta_min: float = Config.BETA_MIN
    beta_max: float = Config.BETA_MAX
    sigma_min: float = Config.SIGMA_MIN
    sigma_max: float = Config.SIGMA_MAX

    horizon = 1.0

    def __post_init__(self):
        if self.kind not in (VP, VE):
            raise ValueError(f"Unknown schedule kind: {self.kind!r}")
        if not 0 < self.beta_min < self.beta_max:
            raise ValueError(f"Need 0 < beta_min < beta_max, got {self.beta_min}, {self.beta_max}")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError(f"Need 0 < sigma_min < sigma_max, got {self.sigma_min}, {self.sigma_max}")

    @classmethod
    def from_params(cls, params) -> "DiffusionSchedule":
        return cls(kind=params.kind, beta_min=params.beta_min, beta_max=params.beta_max,
                   sigma_min=params.sigma_min, sigma_max=params.sigma_max)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta_min": self.beta_min, "beta_max": self.beta_max,
                "sigma_min": self.sigma_min, "sigma_max": self.sigma_max}

    # VP pieces
    def beta(self, t: TimeLike) -> torch.Tensor:
        t = _as_tensor(t)
        return self.beta_min + t * (self.beta_max - self.beta_min)

    def _beta_integral(self, t: torch.Tensor) -> torch.Tensor:
        return self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t ** 2

    # VE pieces
    def sigma(self, t: TimeLike) -> torch.Tensor:
        t = _as_tensor(t)
        return self.sigma_min * (self.sigma_max / self.sigma_min) ** t

    def drift(self, x: torch.Tensor, t: TimeLike) -> torch.Tensor:
        if self.kind == VP:
            return -0.5 * self.beta(t) * x
        return torch.zeros_like(x)

    def diffusion_coeff(self, t: TimeLike) -> torch.Tensor:
        if self.kind == VP:
            return torch.sqrt(self.beta(t))
        return self.sigma(t) * math.sqrt(2.0 * math.log(self.sigma_max / self.sigma_min))

    def mean_scale(self, t: TimeLike) -> torch.Tensor:
        t = _as_tensor(t)
        if self.kind == VP:
            return torch.exp(-0.5 * self._beta_integral(t))
        return torch.ones_like(t)

    def std(self, t: TimeLike) -> torch.Tensor:
        t = _as_tensor(t)
        if self.kind == VP:
            return torch.sqrt(-torch.expm1(-self._beta_integral(t)))
        return torch.sqrt(self.sigma(t) ** 2 - self.sigma_min ** 2)

    def kernel(self, t: TimeLike) -> PerturbationKernel:
        return PerturbationKernel(self.mean_scale(t), self.std(t))

    def snr(self, t: TimeLike) -> torch.Tensor:
        return self.mean_scale(t) / self.std(t)


@dataclass(frozen=True)
class SdeStepPlan:
    """Discretization of the reverse-time SDE from t = 1 down to t_eps"""
    num_steps: int = Config.RECOVERY_STEPS
    corrector_steps: int = Config.CORRECTOR_STEPS
    corrector_snr: float = Config.CORRECTOR_SNR
    t_eps: float = Config.T_EPS

    def __post_init__(self):
        if self.num_steps < 1:
            raise ValueError(f"num_steps must be >= 1, got {self.num_steps}")
        if self.corrector_steps < 0:
            raise ValueError(f"corrector_steps must be >= 0, got {self.corrector_steps}")
        if self.corrector_snr <= 0:
            raise ValueError(f"corrector_snr must be positive, got {self.corrector_snr}")

    @property
    def dt(self) -> float:
        return 1.0 / self.num_steps

    def time_grid(self) -> List[float]:
        """
        Descending times 1, 1 - dt, ..., dt, t_eps

        Every step has size dt except the last one, which stops at t_eps instead of 0.
        Grid points that would fall at or below t_eps are dropped.
        """
        times = [1.0 - k * self.dt for k in range(self.num_steps)]
        times = [t for t in times if t > self.t_eps + 1e-12]
        times.append(self.t_eps)
        return times

    def steps(self) -> List[Tuple[float, float]]:
        grid = self.time_grid()
        return [(grid[k], grid[k] - grid[k + 1]) for k in range(len(grid) - 1)]
