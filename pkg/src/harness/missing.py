"""
Missing-modality protocols: fixed availability patterns and random per-cell rates
"""
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from src.gsdnet.types import MODALITIES, MissingPattern, MultimodalSample, all_patterns
from src.utils.config import Config
from src.utils.errors import DataError
from src.utils.logger import setup_logger

logger = setup_logger()

FIXED_PATTERN = "fixed-pattern"
RANDOM_RATE = "random-rate"
MODES = (FIXED_PATTERN, RANDOM_RATE)


@dataclass(frozen=True)
class MaskedSample:
    sample: MultimodalSample        # observed modalities only
    truth: MultimodalSample         # every modality
    pattern: MissingPattern


@dataclass
class MaskedDataset:
    items: List[MaskedSample]
    mode: str
    parameter: Union[str, float]    # pattern name or missing rate

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def missing_fraction(self) -> float:
        cells = len(self.items) * len(MODALITIES)
        return sum(len(item.pattern.missing) for item in self.items) / cells if cells else 0.0


def fixed_patterns() -> Sequence[MissingPattern]:
    return all_patterns()


def draw_cell_mask(n_samples: int, n_modalities: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli(rate) mask; True marks a missing (sample, modality) cell"""
    return rng.random((n_samples, n_modalities)) < rate


def _mask(sample: MultimodalSample, pattern: MissingPattern) -> MaskedSample:
    observed = sample if not pattern.missing else sample.restricted_to(pattern.observed)
    return MaskedSample(sample=observed, truth=sample, pattern=pattern)


def apply_missing(samples: Sequence[MultimodalSample], mode: str,
                  rate_or_pattern: Union[str, float, MissingPattern], seed: int = 0) -> MaskedDataset:
    """
    Mask whole modalities per sample

    fixed-pattern: every sample gets the given pattern. random-rate: each (sample,
    modality) cell is dropped with probability `rate`; a sample that would lose every
    modality is re-drawn until it keeps one.
    """
    if mode == FIXED_PATTERN:
        pattern = (rate_or_pattern if isinstance(rate_or_pattern, MissingPattern)
                   else MissingPattern.from_available(str(rate_or_pattern)))
        return MaskedDataset([_mask(s, pattern) for s in samples], mode, pattern.name)

    if mode != RANDOM_RATE:
        raise DataError(f"Unknown missingness mode {mode!r}; choose from {MODES}")
    rate = float(rate_or_pattern)
    if not 0.0 <= rate <= Config.MAX_MISSING_RATE:
        raise DataError(f"Missing rate must lie in [0, {Config.MAX_MISSING_RATE}], got {rate}")

    rng = np.random.default_rng(seed)
    mask = draw_cell_mask(len(samples), len(MODALITIES), rate, rng)
    rerolled = 0
    for i in range(len(samples)):
        while mask[i].all():
            mask[i] = draw_cell_mask(1, len(MODALITIES), rate, rng)[0]
            rerolled += 1
    if rerolled:
        logger.warning(f"Re-rolled {rerolled} mask row(s) that dropped every modality (rate={rate})")

    items = [
        _mask(s, MissingPattern({m: int(not mask[i, k]) for k, m in enumerate(MODALITIES)}))
        for i, s in enumerate(samples)
    ]
    return MaskedDataset(items, mode, rate)
