"""
GSDNet pipeline: encoding, conversation graphs, spectral diffusion training, recovery and fusion
"""
from .types import (
    MODALITIES,
    PATTERN_NAMES,
    MultimodalSample,
    MissingPattern,
    EncodedModalities,
    ConversationGraph,
    all_patterns,
    canonical_order
)
from .encoder import ModalityEncoder, encode, positional_encoding
from .graph import (
    DEGENERATE_WEIGHT,
    GRAPH_RULE_VERSION,
    assemble_adjacency,
    build_graph,
    edge_allowed,
    perturb_spectrum,
    similarity_adjacency
)
from .fusion import GCNFusion, gcn_forward, gcn_propagate, normalize_adjacency
from .head import Prediction, PredictionHead, bucket_index, binary_class, predict, prediction_loss
from .model import GsdnetModel, ModelSpec
from .training import (
    LOSS_COLUMNS,
    TrainLosses,
    draw_pattern,
    reconstruction_branch,
    reconstruction_loss,
    sample_losses,
    train_batch,
    train_step,
    training_steps
)
from .recovery import RecoveryResult, predict_complete, predict_recovered, recover
from .checkpoint import load_model, save_model

__all__ = [
    # Types
    'MODALITIES',
    'PATTERN_NAMES',
    'MultimodalSample',
    'MissingPattern',
    'EncodedModalities',
    'ConversationGraph',
    'all_patterns',
    'canonical_order',

    # Encoding and graphs
    'ModalityEncoder',
    'encode',
    'positional_encoding',
    'DEGENERATE_WEIGHT',
    'GRAPH_RULE_VERSION',
    'assemble_adjacency',
    'build_graph',
    'edge_allowed',
    'perturb_spectrum',
    'similarity_adjacency',

    # Fusion and prediction
    'GCNFusion',
    'gcn_forward',
    'gcn_propagate',
    'normalize_adjacency',
    'Prediction',
    'PredictionHead',
    'bucket_index',
    'binary_class',
    'predict',
    'prediction_loss',

    # Model
    'GsdnetModel',
    'ModelSpec',
    'load_model',
    'save_model',

    # Training and recovery
    'LOSS_COLUMNS',
    'TrainLosses',
    'draw_pattern',
    'reconstruction_branch',
    'reconstruction_loss',
    'sample_losses',
    'train_batch',
    'train_step',
    'training_steps',
    'RecoveryResult',
    'predict_complete',
    'predict_recovered',
    'recover'
]
