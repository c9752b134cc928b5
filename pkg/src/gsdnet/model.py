"""
GSDNet model: encoder, per-modality score nets and decoders, GCN fusion, prediction head
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

import torch
import torch.nn as nn

from src.diffusion import DiffusionSchedule
from src.linalg import SpectralDecomposition
from src.utils.config import Config
from src.utils.errors import ConfigError, ShapeError
from src.utils.logger import setup_logger
from src.score import ScoreNet, StdScaledScore
from .encoder import ModalityEncoder
from .fusion import GCNFusion
from .head import PredictionHead
from .layers import MLPDecoder, seeded_init_
from .types import EncodedModalities, MODALITIES

logger = setup_logger()


@dataclass
class ModelSpec:
    """Everything needed to rebuild a GsdnetModel with identical shapes"""
    raw_dims: Dict[str, int]
    n_utterances: int
    common_dim: int = Config.COMMON_DIM
    kernel_sizes: Dict[str, int] = field(default_factory=lambda: dict(Config.KERNEL_SIZES))
    window: int = Config.GRAPH_WINDOW
    gcn_layers: int = Config.GCN_LAYERS
    time_embed_dim: int = Config.TIME_EMBED_DIM
    hidden_dims: List[int] = field(default_factory=lambda: list(Config.SCORE_HIDDEN_DIMS))
    activation: str = Config.SCORE_ACTIVATION
    decoder_hidden: int = Config.DECODER_HIDDEN
    beta: float = Config.BETA_LOSS
    spectral_diffusion: bool = True
    feature_schedule: Dict = field(default_factory=lambda: DiffusionSchedule().to_dict())
    spectrum_schedule: Dict = field(default_factory=lambda: DiffusionSchedule().to_dict())
    t_eps: float = Config.T_EPS
    seed: int = 0

    @classmethod
    def from_run_config(cls, config, raw_dims: Mapping[str, int], n_utterances: int) -> "ModelSpec":
        model = config.model
        return cls(
            raw_dims=dict(raw_dims),
            n_utterances=n_utterances,
            common_dim=model.common_dim,
            kernel_sizes=dict(model.kernel_sizes),
            window=model.window,
            gcn_layers=model.gcn_layers,
            time_embed_dim=model.time_embed_dim,
            hidden_dims=list(model.hidden_dims),
            activation=model.activation,
            decoder_hidden=model.decoder_hidden,
            beta=model.beta,
            spectral_diffusion=model.spectral_diffusion,
            feature_schedule=DiffusionSchedule.from_params(config.schedule.features).to_dict(),
            spectrum_schedule=DiffusionSchedule.from_params(config.schedule.spectrum).to_dict(),
            t_eps=config.schedule.t_eps,
            seed=config.seed,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> "ModelSpec":
        if set(self.raw_dims) != set(MODALITIES):
            raise ConfigError(f"raw_dims must cover {MODALITIES}, got {sorted(self.raw_dims)}")
        if any(d < 1 for d in self.raw_dims.values()):
            raise ConfigError(f"raw_dims must be positive, got {self.raw_dims}")
        if self.n_utterances < 1:
            raise ConfigError(f"n_utterances must be >= 1, got {self.n_utterances}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.common_dim < 1 or self.gcn_layers < 1:
            raise ConfigError("common_dim and gcn_layers must be >= 1")
        missing_kernels = set(MODALITIES) - set(self.kernel_sizes)
        if missing_kernels:
            raise ConfigError(f"kernel_sizes lacks {sorted(missing_kernels)}")
        return self


class GsdnetModel(nn.Module):
    """
    Graph spectral diffusion model for missing-modality recovery

    Per target modality m there is one feature score net (state = one encoded row,
    cond = the observed rows of the same utterance in modality slots plus an availability
    mask), one spectrum score net (state = block spectrum Lambda_m, cond = slotted observed
    block spectra, slotted pooled encodings and the mask), a feature decoder back to raw
    space and a residual spectrum decoder. Score nets predict the negated unit noise and
    are read as scores through StdScaledScore. `training_counts[m]` counts the train steps
    in which m was a recovery target.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec.validate()
        d, n = spec.common_dim, spec.n_utterances

        self.feature_schedule = DiffusionSchedule(**spec.feature_schedule)
        self.spectrum_schedule = DiffusionSchedule(**spec.spectrum_schedule)

        generator = torch.Generator().manual_seed(spec.seed)
        self.encoder = seeded_init_(ModalityEncoder(spec.raw_dims, d, spec.kernel_sizes), generator)

        net_kwargs = dict(time_embed_dim=spec.time_embed_dim, hidden_dims=spec.hidden_dims,
                          activation=spec.activation)
        self.feature_nets = nn.ModuleDict({
            m: ScoreNet(d, cond_dim=self.feature_cond_dim, seed=spec.seed * 100 + k, **net_kwargs)
            for k, m in enumerate(MODALITIES)
        })
        self.feature_decoders = nn.ModuleDict({
            m: seeded_init_(MLPDecoder(d, spec.decoder_hidden, spec.raw_dims[m]), generator)
            for m in MODALITIES
        })

        self.spectrum_nets = nn.ModuleDict()
        self.spectrum_decoders = nn.ModuleDict()
        if spec.spectral_diffusion:
            for k, m in enumerate(MODALITIES):
                self.spectrum_nets[m] = ScoreNet(n, cond_dim=self.spectrum_cond_dim,
                                                 seed=spec.seed * 100 + 50 + k, **net_kwargs)
                decoder = seeded_init_(MLPDecoder(n, spec.decoder_hidden, n, residual=True), generator)
                decoder.zero_output_()
                self.spectrum_decoders[m] = decoder

        self.gcn = GCNFusion(d, spec.gcn_layers, generator=generator)
        self.head = seeded_init_(PredictionHead(d), generator)

        self.training_counts: Dict[str, int] = {m: 0 for m in MODALITIES}
        logger.debug(f"Built GSDNet model: d={d}, N={n}, {self.num_parameters} parameters, "
                     f"spectral_diffusion={spec.spectral_diffusion}")

    @property
    def beta(self) -> float:
        return self.spec.beta

    @property
    def window(self) -> int:
        return self.spec.window

    @property
    def t_eps(self) -> float:
        return self.spec.t_eps

    @property
    def spectral_diffusion(self) -> bool:
        return self.spec.spectral_diffusion

    @property
    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def untrained_targets(self, modalities: Sequence[str]) -> List[str]:
        return [m for m in modalities if self.training_counts.get(m, 0) == 0]

    @property
    def feature_cond_dim(self) -> int:
        return len(MODALITIES) * (self.spec.common_dim + 1)

    @property
    def spectrum_cond_dim(self) -> int:
        return len(MODALITIES) * (self.spec.n_utterances + self.spec.common_dim + 1)

    # Conditioning vectors
    @staticmethod
    def availability_mask(observed: Sequence[str]) -> torch.Tensor:
        """1.0 in the slot of every observed modality, canonical order"""
        return torch.tensor([1.0 if m in observed else 0.0 for m in MODALITIES], dtype=torch.float64)

    def feature_condition(self, encoded: EncodedModalities, observed: Sequence[str]) -> torch.Tensor:
        """
        N x M(d + 1): per utterance, the observed encoded rows in modality slots (zeros
        for unobserved slots) followed by the availability mask
        """
        if not observed:
            raise ShapeError("Feature condition needs at least one observed modality")
        n, d = encoded.n, encoded.d
        slots = [encoded.blocks[m] if m in observed else torch.zeros((n, d), dtype=torch.float64)
                 for m in MODALITIES]
        mask = self.availability_mask(observed).expand(n, len(MODALITIES))
        return torch.cat(slots + [mask], dim=-1)

    def spectrum_condition(self, spectra: Mapping[str, SpectralDecomposition], encoded: EncodedModalities,
                           observed: Sequence[str]) -> torch.Tensor:
        """
        M(N + d + 1): slotted observed block spectra, slotted mean-pooled encodings, mask

        `spectra` maps each observed modality to the decomposition of its intra-modal block.
        """
        if not observed:
            raise ShapeError("Spectrum condition needs at least one observed modality")
        n, d = self.spec.n_utterances, encoded.d
        slots, pooled = [], []
        for m in MODALITIES:
            if m in observed:
                slots.append(torch.tensor(spectra[m].eigvals, dtype=torch.float64))
                pooled.append(encoded.blocks[m].mean(dim=0))
            else:
                slots.append(torch.zeros(n, dtype=torch.float64))
                pooled.append(torch.zeros(d, dtype=torch.float64))
        return torch.cat(slots + pooled + [self.availability_mask(observed)])

    def feature_score(self, modality: str) -> StdScaledScore:
        return StdScaledScore(self.feature_nets[modality], self.feature_schedule)

    def spectrum_score(self, modality: str) -> StdScaledScore:
        return StdScaledScore(self.spectrum_nets[modality], self.spectrum_schedule)

    def feature_score_fn(self, modality: str, cond: torch.Tensor):
        score = self.feature_score(modality)
        return lambda x, t: score(x, cond, t)

    def spectrum_score_fn(self, modality: str, cond: torch.Tensor):
        score = self.spectrum_score(modality)
        return lambda x, t: score(x, cond, t)

    def fuse(self, encoded: EncodedModalities, adjacency: torch.Tensor) -> torch.Tensor:
        """Scalar sentiment score from node features and the (unnormalized) adjacency"""
        return self.head(self.gcn(encoded.stacked(), adjacency))
