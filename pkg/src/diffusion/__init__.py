"""
Score-based diffusion: schedules, perturbation kernels and reverse-time SDE samplers
"""
from .schedules import (
    DiffusionSchedule,
    PerturbationKernel,
    SdeStepPlan,
    VP,
    VE
)
from .sde import (
    forward_sample,
    analytic_score,
    reverse_step,
    corrector_step,
    prior_sample,
    integrate_reverse,
    sample,
    gaussian_data_score
)

__all__ = [
    # Types
    'DiffusionSchedule',
    'PerturbationKernel',
    'SdeStepPlan',
    'VP',
    'VE',

    # Operations
    'forward_sample',
    'analytic_score',
    'reverse_step',
    'corrector_step',
    'prior_sample',
    'integrate_reverse',
    'sample',
    'gaussian_data_score'
]
