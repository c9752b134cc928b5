"""
Seeded synthetic conversations with cross-modal structure

Text features follow an AR(1) process over utterances; audio and visual features are
full-rank linear maps of the text features plus noise; the label is a scaled linear
readout of the mean text feature plus noise, clipped to [-3, 3].
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from src.gsdnet.types import MultimodalSample
from src.utils.config import Config
from src.utils.errors import DataError
from src.utils.logger import setup_logger

logger = setup_logger()

LABEL_SPREAD = 1.5
SPLITS = ("train", "val", "test")


@dataclass
class SyntheticConfig:
    seed: int = 0
    n_conversations: int = Config.N_CONVERSATIONS
    n_utterances: int = Config.N_UTTERANCES
    raw_dims: Dict[str, int] = field(default_factory=lambda: dict(Config.RAW_DIMS))
    noise: float = Config.CROSS_MODAL_NOISE
    label_noise: float = Config.CROSS_MODAL_NOISE
    smoothness: float = 0.6
    split_ratios: List[float] = field(default_factory=lambda: list(Config.SPLIT_RATIOS))

    @classmethod
    def from_run_config(cls, config) -> "SyntheticConfig":
        data = config.data
        return cls(seed=config.seed, n_conversations=data.n_conversations,
                   n_utterances=data.n_utterances, raw_dims=dict(data.raw_dims),
                   noise=data.noise, label_noise=data.label_noise,
                   smoothness=data.smoothness, split_ratios=list(data.split_ratios))

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "SyntheticConfig":
        ratios = np.asarray(self.split_ratios, dtype=np.float64)
        if ratios.shape != (3,) or np.any(ratios < 0) or abs(ratios.sum() - 1.0) > 1e-9:
            raise DataError(f"split_ratios must be three non-negative values summing to 1, got {self.split_ratios}")
        if self.n_conversations < 3:
            raise DataError(f"n_conversations must be >= 3, got {self.n_conversations}")
        if self.n_utterances < 1:
            raise DataError(f"n_utterances must be >= 1, got {self.n_utterances}")
        if set(self.raw_dims) != {"t", "a", "v"} or any(d < 1 for d in self.raw_dims.values()):
            raise DataError(f"raw_dims must give a positive width for t, a and v, got {self.raw_dims}")
        if self.noise < 0 or self.label_noise < 0:
            raise DataError("Noise scales must be non-negative")
        if not 0.0 <= self.smoothness < 1.0:
            raise DataError(f"smoothness must lie in [0, 1), got {self.smoothness}")
        return self


@dataclass
class CrossModalMaps:
    """Linear maps text -> audio/visual and the latent readout"""
    audio: np.ndarray
    visual: np.ndarray
    readout: np.ndarray
    label_scale: float

    def apply(self, text: np.ndarray, modality: str) -> np.ndarray:
        return text @ (self.audio if modality == "a" else self.visual)

    def latent(self, text: np.ndarray) -> float:
        return float(text.mean(axis=0) @ self.readout)


@dataclass
class SyntheticDataset:
    config: SyntheticConfig
    maps: CrossModalMaps
    splits: Dict[str, List[MultimodalSample]]
    latents: Dict[int, float]

    @property
    def raw_dims(self) -> Dict[str, int]:
        return dict(self.config.raw_dims)

    @property
    def n_utterances(self) -> int:
        return self.config.n_utterances

    def __getitem__(self, split: str) -> List[MultimodalSample]:
        return self.splits[split]


def _full_rank_map(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    while True:
        m = rng.standard_normal((rows, cols)) / np.sqrt(rows)
        if np.linalg.matrix_rank(m) == min(rows, cols):
            return m


def mean_variance_ar1(n: int, rho: float) -> float:
    """Variance of the mean of n unit-variance AR(1) values with coefficient rho"""
    lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return float(np.sum(rho ** lags)) / n ** 2


def split_sizes(n: int, ratios) -> List[int]:
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    return [n_train, n_val, n - n_train - n_val]


def generate(config: SyntheticConfig) -> SyntheticDataset:
    """Draw maps, then every conversation, then a seeded permutation into the three splits"""
    config.validate()
    rng = np.random.default_rng(config.seed)
    dims, n, rho = config.raw_dims, config.n_utterances, config.smoothness

    readout = rng.standard_normal(dims["t"])
    maps = CrossModalMaps(
        audio=_full_rank_map(rng, dims["t"], dims["a"]),
        visual=_full_rank_map(rng, dims["t"], dims["v"]),
        readout=readout / np.linalg.norm(readout),
        label_scale=LABEL_SPREAD / np.sqrt(mean_variance_ar1(n, rho)),
    )

    samples, latents = [], {}
    for sample_id in range(config.n_conversations):
        text = np.empty((n, dims["t"]))
        text[0] = rng.standard_normal(dims["t"])
        for i in range(1, n):
            text[i] = rho * text[i - 1] + np.sqrt(1 - rho ** 2) * rng.standard_normal(dims["t"])
        audio = maps.apply(text, "a") + config.noise * rng.standard_normal((n, dims["a"]))
        visual = maps.apply(text, "v") + config.noise * rng.standard_normal((n, dims["v"]))

        latent = maps.label_scale * maps.latent(text)
        label = float(np.clip(latent + config.label_noise * rng.standard_normal(), -3.0, 3.0))
        latents[sample_id] = latent
        samples.append(MultimodalSample({"t": text, "a": audio, "v": visual}, label, sample_id))

    order = rng.permutation(config.n_conversations)
    sizes = split_sizes(config.n_conversations, config.split_ratios)
    bounds = np.cumsum([0] + sizes)
    splits = {name: [samples[i] for i in order[bounds[k]:bounds[k + 1]]] for k, name in enumerate(SPLITS)}

    logger.info(f"Generated {config.n_conversations} conversations "
                f"(N={n}, dims={dims}, noise={config.noise}); splits {sizes}")
    return SyntheticDataset(config=config, maps=maps, splits=splits, latents=latents)
