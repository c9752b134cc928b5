"""
Score networks: MLP estimators, time embedding, DSM loss, Adam and gradient checks
"""
from .time_embedding import TimeEmbedding
from .score_net import ScoreNet, ScoreGradients, StdScaledScore, forward, backward
from .losses import dsm_weight, dsm_loss, dsm_loss_and_grad, sample_times
from .optim import AdamState, make_optimizer, adam_step, adam_state
from .gradcheck import GradCheckReport, finite_difference_check, relative_error
from .checkpoint import (
    FORMAT_VERSION,
    score_net_payload,
    score_net_from_payload,
    save_score_net,
    load_score_net
)

__all__ = [
    # Networks
    'TimeEmbedding',
    'ScoreNet',
    'ScoreGradients',
    'StdScaledScore',
    'forward',
    'backward',

    # Objective
    'dsm_weight',
    'dsm_loss',
    'dsm_loss_and_grad',
    'sample_times',

    # Optimizer
    'AdamState',
    'make_optimizer',
    'adam_step',
    'adam_state',

    # Gradient checking
    'GradCheckReport',
    'finite_difference_check',
    'relative_error',

    # Checkpoints
    'FORMAT_VERSION',
    'score_net_payload',
    'score_net_from_payload',
    'save_score_net',
    'load_score_net'
]
