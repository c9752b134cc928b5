"""
Classical restoration baselines: fill missing modalities with training means or zeros
"""
from typing import Dict, Sequence

import numpy as np

from src.gsdnet.types import MODALITIES, MissingPattern, MultimodalSample
from src.utils.errors import DataError


class Imputer:
    """Fills every missing modality of a masked sample with one row repeated N times"""

    name = "imputer"

    def __init__(self):
        self.fill_rows: Dict[str, np.ndarray] = {}

    def fit(self, samples: Sequence[MultimodalSample]) -> "Imputer":
        raise NotImplementedError

    def impute(self, sample: MultimodalSample, pattern: MissingPattern) -> MultimodalSample:
        if not self.fill_rows:
            raise DataError(f"{type(self).__name__} must be fit before imputing")
        modalities = dict(sample.modalities)
        for m in pattern.missing:
            modalities[m] = np.tile(self.fill_rows[m], (sample.n, 1))
        return MultimodalSample(modalities, sample.label, sample.sample_id)


class MeanImputer(Imputer):
    """Per-modality, per-feature mean over every utterance of the training split"""

    name = "mean"

    def fit(self, samples: Sequence[MultimodalSample]) -> "MeanImputer":
        if not samples:
            raise DataError("Cannot fit an imputer on an empty split")
        self.fill_rows = {
            m: np.concatenate([s.modalities[m] for s in samples], axis=0).mean(axis=0)
            for m in MODALITIES
        }
        return self


class ZeroImputer(Imputer):
    name = "zero"

    def fit(self, samples: Sequence[MultimodalSample]) -> "ZeroImputer":
        if not samples:
            raise DataError("Cannot fit an imputer on an empty split")
        self.fill_rows = {m: np.zeros(samples[0].modalities[m].shape[1]) for m in MODALITIES}
        return self


IMPUTERS = {"mean": MeanImputer, "zero": ZeroImputer}
