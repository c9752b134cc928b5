"""
Conditional recovery of missing modalities with a trained model
"""
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import torch

from src.diffusion import SdeStepPlan, sample as sde_sample
from src.linalg import SpectralDecomposition, SymmetricMatrix, eigh
from src.utils.config import Config
from src.utils.errors import DataError, NumericalError
from src.utils.logger import setup_logger
from .graph import assemble_adjacency, build_graph
from .head import Prediction, binary_class, bucket_index
from .model import GsdnetModel
from .types import EncodedModalities, MissingPattern, MultimodalSample

logger = setup_logger()


@dataclass
class RecoveryResult:
    """
    Encoded blocks for every modality (observed + recovered), the adjacency assembled
    over them and its decomposition. `decoded` holds raw-space reconstructions of the
    missing modalities, `block_spectra` their recovered spectra.
    """
    encoded: EncodedModalities
    spectrum: SpectralDecomposition
    adjacency: SymmetricMatrix
    pattern: MissingPattern
    decoded: Dict[str, np.ndarray] = field(default_factory=dict)
    block_spectra: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def recovered(self) -> tuple:
        return self.pattern.missing


def recover(model: GsdnetModel, sample: MultimodalSample, pattern: MissingPattern,
            plan: SdeStepPlan, generator: torch.Generator,
            draws: int = Config.RECOVERY_DRAWS) -> RecoveryResult:
    """
    Sample the missing modalities of `sample` conditioned on its observed ones

    Missing feature blocks and block spectra start from the prior and are integrated
    over plan's time grid, decoded, and assembled into one adjacency that is
    re-decomposed once. With nothing missing the observed encoding passes through.

    Args:
        model: Trained model
        sample: Conversation carrying at least the observed modalities
        pattern: Which modalities to treat as observed and which to recover
        plan: Reverse-SDE discretization
        generator: Source of the prior draws and sampler noise
        draws: Independent reverse chains per missing block; their mean is the estimate

    Returns:
        RecoveryResult over observed + recovered modalities

    Raises:
        DataError: An observed modality is absent from the sample
        NumericalError: A missing modality was never a training target
    """
    if plan.num_steps < 1:
        raise ValueError("Recovery needs at least one reverse step")
    if draws < 1:
        raise ValueError(f"draws must be >= 1, got {draws}")
    absent = set(pattern.observed) - set(sample.present)
    if absent:
        raise DataError(f"Sample {sample.sample_id} lacks observed modalities {sorted(absent)}")
    untrained = model.untrained_targets(pattern.missing)
    if untrained:
        raise NumericalError(f"Model was never trained to recover {untrained}")

    model.eval()
    with torch.no_grad():
        observed = model.encoder({m: t for m, t in sample.tensors().items() if m in pattern.observed})
        graph = build_graph(observed, window=model.window)

        if not pattern.missing:
            return RecoveryResult(encoded=observed, spectrum=graph.spectrum,
                                  adjacency=graph.adjacency, pattern=pattern)

        n, d = observed.n, observed.d
        x_cond = model.feature_condition(observed, pattern.observed)
        lam_cond = (model.spectrum_condition(graph.block_spectra, observed, pattern.observed)
                    if model.spectral_diffusion else None)

        blocks = dict(observed.blocks)
        decoded, recovered_spectra = {}, {}
        for m in pattern.missing:
            score_fn = model.feature_score_fn(m, x_cond.repeat(draws, 1))
            x = sde_sample(model.feature_schedule, score_fn, (draws * n, d), plan, generator)
            x = x.reshape(draws, n, d).mean(dim=0)
            blocks[m] = x
            decoded[m] = model.feature_decoders[m](x).numpy()
            if model.spectral_diffusion:
                score_fn = model.spectrum_score_fn(m, lam_cond.expand(draws, -1))
                lam = sde_sample(model.spectrum_schedule, score_fn, (draws, n), plan, generator)
                recovered_spectra[m] = model.spectrum_decoders[m](lam.mean(dim=0))

        adjacency = assemble_adjacency(blocks, recovered_spectra, window=model.window).numpy()

    matrix = SymmetricMatrix.from_array(adjacency)
    logger.debug(f"Recovered {list(pattern.missing)} for sample {sample.sample_id} "
                 f"({plan.num_steps} steps, corrector {plan.corrector_steps})")
    return RecoveryResult(
        encoded=EncodedModalities(blocks),
        spectrum=eigh(matrix),
        adjacency=matrix,
        pattern=pattern,
        decoded=decoded,
        block_spectra={m: lam.numpy() for m, lam in recovered_spectra.items()},
    )


def predict_recovered(model: GsdnetModel, result: RecoveryResult) -> Prediction:
    """Fuse a recovery result through the GCN and read out the sentiment"""
    with torch.no_grad():
        adjacency = torch.tensor(result.adjacency.entries, dtype=torch.float64)
        score = float(model.fuse(result.encoded, adjacency))
    return Prediction(score=score, binary=binary_class(score), bucket=bucket_index(score))


def predict_complete(model: GsdnetModel, sample: MultimodalSample) -> Prediction:
    """Prediction on a sample carrying every modality (ground truth or imputed)"""
    model.eval()
    with torch.no_grad():
        encoded = model.encoder(sample.tensors())
        graph = build_graph(encoded, window=model.window)
        score = float(model.fuse(encoded, torch.tensor(graph.adjacency.entries, dtype=torch.float64)))
    return Prediction(score=score, binary=binary_class(score), bucket=bucket_index(score))
