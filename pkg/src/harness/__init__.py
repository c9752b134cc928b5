"""
Experiment harness: synthetic data, missingness protocols, baselines, metrics, evaluation
and the noising-space comparison
"""
from .synthetic import SPLITS, CrossModalMaps, SyntheticConfig, SyntheticDataset, generate
from .missing import (
    FIXED_PATTERN,
    RANDOM_RATE,
    MaskedDataset,
    MaskedSample,
    apply_missing,
    draw_cell_mask,
    fixed_patterns
)
from .imputation import IMPUTERS, Imputer, MeanImputer, ZeroImputer
from .metrics import SentimentScores, acc2, acc7, binary_f1, sentiment_scores
from .evaluation import AVERAGE, EvalReport, EvalRow, average_row, evaluate
from .comparison import diffusion_space_comparison, mean_curves, random_graphs, random_windowed_graph
from .io import dataset_hash, load_dataset, load_manifest, load_split, save_dataset

__all__ = [
    # Data
    'SPLITS',
    'CrossModalMaps',
    'SyntheticConfig',
    'SyntheticDataset',
    'generate',
    'save_dataset',
    'load_dataset',
    'load_manifest',
    'load_split',
    'dataset_hash',

    # Missingness and baselines
    'FIXED_PATTERN',
    'RANDOM_RATE',
    'MaskedDataset',
    'MaskedSample',
    'apply_missing',
    'draw_cell_mask',
    'fixed_patterns',
    'IMPUTERS',
    'Imputer',
    'MeanImputer',
    'ZeroImputer',

    # Metrics and reports
    'SentimentScores',
    'acc2',
    'acc7',
    'binary_f1',
    'sentiment_scores',
    'AVERAGE',
    'EvalReport',
    'EvalRow',
    'average_row',
    'evaluate',

    # Noising-space comparison
    'diffusion_space_comparison',
    'mean_curves',
    'random_graphs',
    'random_windowed_graph'
]
