"""
Domain types of the GSDNet pipeline
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np
import torch

from src.linalg import SpectralDecomposition, SymmetricMatrix
from src.utils.config import Config
from src.utils.errors import DataError, ShapeError

MODALITIES: Tuple[str, ...] = tuple(Config.MODALITIES)

# Availability sets in the order of the fixed-pattern protocol: {t}, {v}, {a}, {t,v}, {t,a}, {a,v}, {t,a,v}
PATTERN_NAMES: Tuple[str, ...] = ("t", "v", "a", "tv", "ta", "av", "tav")


def canonical_order(modalities: Iterable[str]) -> Tuple[str, ...]:
    wanted = set(modalities)
    unknown = wanted - set(MODALITIES)
    if unknown:
        raise DataError(f"Unknown modality id(s): {sorted(unknown)}")
    return tuple(m for m in MODALITIES if m in wanted)


@dataclass(frozen=True)
class MultimodalSample:
    """
    One conversation: per-modality N x d_m feature matrices and a sentiment label

    Only present modalities appear in `modalities`; a masked sample simply omits the
    missing ones.
    """
    modalities: Dict[str, np.ndarray]
    label: float
    sample_id: int = 0

    def __post_init__(self):
        if not self.modalities:
            raise DataError("A sample needs at least one modality")
        canonical_order(self.modalities)
        lengths = {m: x.shape[0] for m, x in self.modalities.items()}
        for m, x in self.modalities.items():
            if x.ndim != 2 or x.shape[1] < 1:
                raise ShapeError(f"Modality {m!r} must be an N x d_m matrix with d_m > 0, got {x.shape}")
        if len(set(lengths.values())) != 1:
            raise ShapeError(f"Modalities disagree on the utterance count: {lengths}")
        if next(iter(lengths.values())) < 1:
            raise DataError("A sample needs at least one utterance")

    @property
    def n(self) -> int:
        return next(iter(self.modalities.values())).shape[0]

    @property
    def present(self) -> Tuple[str, ...]:
        return canonical_order(self.modalities)

    def tensors(self) -> Dict[str, torch.Tensor]:
        return {m: torch.as_tensor(self.modalities[m], dtype=torch.float64) for m in self.present}

    def restricted_to(self, keep: Iterable[str]) -> "MultimodalSample":
        keep = set(keep)
        return MultimodalSample({m: x for m, x in self.modalities.items() if m in keep},
                                self.label, self.sample_id)


@dataclass(frozen=True)
class MissingPattern:
    """Availability indicators alpha_k; I_o = {k | alpha_k = 1}, I_m = {k | alpha_k = 0}"""
    alpha: Dict[str, int]

    def __post_init__(self):
        canonical_order(self.alpha)
        if set(self.alpha) != set(MODALITIES):
            raise DataError(f"Pattern must assign every modality {MODALITIES}, got {sorted(self.alpha)}")
        if any(v not in (0, 1) for v in self.alpha.values()):
            raise DataError(f"Availability indicators must be 0 or 1, got {self.alpha}")
        if not any(self.alpha.values()):
            raise DataError("Pattern has no observed modality; recovery needs a condition")

    @classmethod
    def from_available(cls, available: Iterable[str]) -> "MissingPattern":
        available = set(canonical_order(available))
        return cls({m: int(m in available) for m in MODALITIES})

    @classmethod
    def complete(cls) -> "MissingPattern":
        return cls.from_available(MODALITIES)

    @property
    def observed(self) -> Tuple[str, ...]:
        return tuple(m for m in MODALITIES if self.alpha[m] == 1)

    @property
    def missing(self) -> Tuple[str, ...]:
        return tuple(m for m in MODALITIES if self.alpha[m] == 0)

    @property
    def name(self) -> str:
        return "".join(self.observed)

    def __str__(self) -> str:
        return self.name


def all_patterns() -> Tuple[MissingPattern, ...]:
    return tuple(MissingPattern.from_available(name) for name in PATTERN_NAMES)


@dataclass
class EncodedModalities:
    """Per-modality N x d blocks in the common feature space"""
    blocks: Dict[str, torch.Tensor]

    def __post_init__(self):
        shapes = {m: tuple(x.shape) for m, x in self.blocks.items()}
        if len(set(shapes.values())) > 1:
            raise ShapeError(f"Encoded blocks disagree on shape: {shapes}")
        for m, x in self.blocks.items():
            if x.ndim != 2:
                raise ShapeError(f"Encoded block {m!r} must be N x d, got {tuple(x.shape)}")

    @property
    def present(self) -> Tuple[str, ...]:
        return canonical_order(self.blocks)

    @property
    def n(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    @property
    def d(self) -> int:
        return next(iter(self.blocks.values())).shape[1]

    def detached(self) -> "EncodedModalities":
        return EncodedModalities({m: x.detach() for m, x in self.blocks.items()})

    def stacked(self) -> torch.Tensor:
        """(M N) x d, modality-major in canonical order"""
        return torch.cat([self.blocks[m] for m in self.present], dim=0)


@dataclass
class ConversationGraph:
    """
    Graph over (modality, utterance) nodes, modality-major: node = slot * N + utterance

    `block_spectra[m]` is the spectrum of modality m's intra-modal block of the adjacency.
    """
    features: np.ndarray
    modalities: Tuple[str, ...]
    n_utterances: int
    adjacency: SymmetricMatrix
    spectrum: SpectralDecomposition
    block_spectra: Dict[str, SpectralDecomposition] = field(default_factory=dict)
    degenerate: bool = False

    @property
    def n_nodes(self) -> int:
        return self.adjacency.n

    def block_slice(self, modality: str) -> slice:
        slot = self.modalities.index(modality)
        return slice(slot * self.n_utterances, (slot + 1) * self.n_utterances)
