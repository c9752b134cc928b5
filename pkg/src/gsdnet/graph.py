"""
Conversation graphs over (modality, utterance) nodes

Edge rule: nodes of the same modality connect when their utterances are at most
`window` apart; nodes of different modalities connect only at the same utterance.
Weights are cosine similarities clipped to [0, 1]. Nodes are modality-major:
node index = slot * N + utterance.
"""
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch

from src.diffusion import DiffusionSchedule, forward_sample
from src.linalg import SpectralDecomposition, SymmetricMatrix, eigh
from src.utils.config import Config
from src.utils.errors import ShapeError
from src.utils.logger import setup_logger
from .types import ConversationGraph, EncodedModalities, canonical_order

logger = setup_logger()

GRAPH_RULE_VERSION = 1
DEGENERATE_WEIGHT = 1e-3

Blocks = Mapping[str, Union[np.ndarray, torch.Tensor]]


def _as_numpy(x) -> np.ndarray:
    if isinstance(x, torch.Tensor):
        return x.detach().cpu().numpy().astype(np.float64)
    return np.asarray(x, dtype=np.float64)


def edge_allowed(slot_i: int, utt_i: int, slot_j: int, utt_j: int, window: int) -> bool:
    if slot_i == slot_j:
        return 0 < abs(utt_i - utt_j) <= window
    return utt_i == utt_j


def edge_mask(n_modalities: int, n_utterances: int, window: int) -> np.ndarray:
    """Boolean (M N) x (M N) mask of allowed edges"""
    slot = np.repeat(np.arange(n_modalities), n_utterances)
    utt = np.tile(np.arange(n_utterances), n_modalities)
    same_slot = slot[:, None] == slot[None, :]
    gap = np.abs(utt[:, None] - utt[None, :])
    return (same_slot & (gap > 0) & (gap <= window)) | (~same_slot & (gap == 0))


def cosine_similarity(features: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity; rows with zero norm get similarity 0 to everything"""
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    unit = np.divide(features, norms, out=np.zeros_like(features), where=norms > 0)
    return unit @ unit.T


def similarity_adjacency(features: np.ndarray, n_modalities: int, n_utterances: int,
                         window: int = Config.GRAPH_WINDOW) -> Tuple[np.ndarray, bool]:
    """
    Windowed, clipped cosine-similarity adjacency over stacked node features

    All-zero features give a uniform DEGENERATE_WEIGHT graph over the allowed edges.

    Args:
        features: (M N) x d node features, modality-major
        n_modalities: M
        n_utterances: N
        window: Largest utterance gap joined inside one modality

    Returns:
        (adjacency, degenerate)
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != n_modalities * n_utterances:
        raise ShapeError(
            f"Expected {n_modalities * n_utterances} node rows, got {features.shape[0]}"
        )
    mask = edge_mask(n_modalities, n_utterances, window)
    if not np.any(features):
        return DEGENERATE_WEIGHT * mask.astype(np.float64), True
    weights = np.clip(cosine_similarity(features), 0.0, 1.0)
    return np.where(mask, weights, 0.0), False


def block_spectra(adjacency: np.ndarray, modalities: Sequence[str],
                  n_utterances: int) -> Dict[str, SpectralDecomposition]:
    """Decomposition of each modality's intra-modal N x N block, keyed by modality"""
    spectra = {}
    for slot, m in enumerate(modalities):
        rows = slice(slot * n_utterances, (slot + 1) * n_utterances)
        spectra[m] = eigh(adjacency[rows, rows])
    return spectra


def build_graph(encoded: Union[EncodedModalities, Blocks],
                window: int = Config.GRAPH_WINDOW) -> ConversationGraph:
    """
    Windowed cosine-similarity graph over every encoded modality, with its spectra

    Args:
        encoded: Encoded blocks (N x d each), any subset of the modalities
        window: Largest utterance gap joined inside one modality

    Returns:
        ConversationGraph with the full spectrum and one block spectrum per modality

    Raises:
        ShapeError: No blocks, or blocks of different shapes
    """
    blocks = encoded.blocks if isinstance(encoded, EncodedModalities) else encoded
    if not blocks:
        raise ShapeError("build_graph needs at least one encoded modality")
    modalities = canonical_order(blocks)
    arrays = [_as_numpy(blocks[m]) for m in modalities]
    n_utterances = arrays[0].shape[0]
    if any(a.shape != arrays[0].shape for a in arrays):
        raise ShapeError(f"Encoded blocks disagree on shape: {[a.shape for a in arrays]}")

    features = np.concatenate(arrays, axis=0)
    adjacency, degenerate = similarity_adjacency(features, len(modalities), n_utterances, window)
    if degenerate:
        logger.warning(
            f"All-zero node features over {len(modalities)} modalities; "
            f"using a uniform {DEGENERATE_WEIGHT} graph"
        )

    return ConversationGraph(
        features=features,
        modalities=modalities,
        n_utterances=n_utterances,
        adjacency=SymmetricMatrix.from_array(adjacency),
        spectrum=eigh(adjacency),
        block_spectra=block_spectra(adjacency, modalities, n_utterances),
        degenerate=degenerate,
    )


def assemble_adjacency(blocks: Blocks, recovered_spectra: Optional[Mapping[str, torch.Tensor]] = None,
                       window: int = Config.GRAPH_WINDOW) -> torch.Tensor:
    """
    Adjacency over observed + recovered blocks, as a torch tensor

    Every block starts from the similarity rule. For each modality in
    `recovered_spectra`, its intra-modal block is replaced by U_m diag(lambda_m) U_m^T,
    where U_m diagonalizes the similarity block of that modality's features. The
    result is symmetrized, clipped at zero and given a zero diagonal. Gradients flow
    through the recovered eigenvalues only.

    Args:
        blocks: Observed and recovered feature blocks, N x d each
        recovered_spectra: Length-N eigenvalues per recovered modality
        window: Largest utterance gap joined inside one modality

    Returns:
        (M N) x (M N) adjacency tensor
    """
    recovered_spectra = recovered_spectra or {}
    modalities = canonical_order(blocks)
    features = np.concatenate([_as_numpy(blocks[m]) for m in modalities], axis=0)
    n_utterances = features.shape[0] // len(modalities)
    base, _ = similarity_adjacency(features, len(modalities), n_utterances, window)
    adjacency = torch.as_tensor(base, dtype=torch.float64)

    for m, eigvals in recovered_spectra.items():
        slot = modalities.index(m)
        rows = slice(slot * n_utterances, (slot + 1) * n_utterances)
        if eigvals.shape != (n_utterances,):
            raise ShapeError(f"Recovered spectrum of {m!r} has shape {tuple(eigvals.shape)}, expected ({n_utterances},)")
        basis = torch.tensor(eigh(base[rows, rows]).eigvecs, dtype=torch.float64)
        block = basis @ torch.diag(eigvals) @ basis.T
        adjacency = adjacency.clone()
        adjacency[rows, rows] = block

    adjacency = torch.clamp(0.5 * (adjacency + adjacency.T), min=0.0)
    return adjacency * (1.0 - torch.eye(adjacency.shape[0], dtype=torch.float64))


def perturb_spectrum(decomposition: SpectralDecomposition, schedule: DiffusionSchedule,
                     t: float, noise: np.ndarray) -> SpectralDecomposition:
    """
    Forward-diffuse the eigenvalues only; the eigenvector array is shared, not copied

    Args:
        decomposition: Spectrum to perturb
        schedule: Forward SDE
        t: Diffusion time in [0, 1]
        noise: Standard normal draws, one per eigenvalue

    Returns:
        SpectralDecomposition with perturbed eigenvalues and the same eigenvectors
    """
    eigvals = forward_sample(schedule, torch.tensor(decomposition.eigvals, dtype=torch.float64),
                             t, torch.tensor(noise, dtype=torch.float64))
    return decomposition.with_eigvals(eigvals.numpy())
