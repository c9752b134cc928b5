"""
Dataset files: one torch-serialized file per split plus a JSON manifest with content hashes
"""
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np
import torch

from src.gsdnet.types import MODALITIES, MultimodalSample
from src.utils.errors import ConfigError, DataError
from src.utils.helpers import arrays_hash, load_json, save_json
from src.utils.logger import setup_logger
from .synthetic import SPLITS, SyntheticConfig, SyntheticDataset

logger = setup_logger()

DATASET_FORMAT = "gsdnet-dataset v1"
MANIFEST_NAME = "manifest.json"


def _split_arrays(samples: Iterable[MultimodalSample]) -> Iterable[np.ndarray]:
    for s in samples:
        for m in MODALITIES:
            yield s.modalities[m]
        yield np.array([s.label, s.sample_id], dtype=np.float64)


def split_hash(samples: List[MultimodalSample]) -> str:
    return arrays_hash(_split_arrays(samples))


def dataset_hash(splits: Dict[str, List[MultimodalSample]]) -> str:
    return arrays_hash(a for name in SPLITS for a in _split_arrays(splits[name]))


def save_dataset(dataset: SyntheticDataset, directory: Path) -> Dict:
    """Write train/val/test split files and the manifest; returns the manifest"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in SPLITS:
        records = [{"modalities": dict(s.modalities), "label": s.label, "sample_id": s.sample_id}
                   for s in dataset.splits[name]]
        path = directory / f"{name}.pt"
        torch.save({"format": DATASET_FORMAT, "split": name, "samples": records}, path)
        files[name] = {"file": path.name, "count": len(records), "arrays_hash": split_hash(dataset.splits[name])}

    manifest = {
        "format": DATASET_FORMAT,
        "config": dataset.config.to_dict(),
        "raw_dims": dataset.raw_dims,
        "n_utterances": dataset.n_utterances,
        "splits": files,
        "dataset_hash": dataset_hash(dataset.splits),
        "maps": {"audio": dataset.maps.audio.tolist(), "visual": dataset.maps.visual.tolist(),
                 "readout": dataset.maps.readout.tolist(), "label_scale": dataset.maps.label_scale},
    }
    save_json(manifest, directory / MANIFEST_NAME)
    logger.info(f"Saved dataset to {directory} (hash {manifest['dataset_hash'][:12]})")
    return manifest


def load_manifest(directory: Path) -> Dict:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"No dataset manifest at {path}")
    manifest = load_json(path)
    if manifest.get("format") != DATASET_FORMAT:
        raise ConfigError(f"{path} has format {manifest.get('format')!r}, expected {DATASET_FORMAT!r}")
    return manifest


def load_split(directory: Path, split: str, verify: bool = True) -> List[MultimodalSample]:
    """Load one split; with `verify` its content hash must match the manifest"""
    if split not in SPLITS:
        raise DataError(f"Unknown split {split!r}; choose from {SPLITS}")
    manifest = load_manifest(directory)
    entry = manifest["splits"][split]
    payload = torch.load(Path(directory) / entry["file"], weights_only=False)
    samples = [MultimodalSample(r["modalities"], r["label"], r["sample_id"]) for r in payload["samples"]]
    if verify and split_hash(samples) != entry["arrays_hash"]:
        raise ConfigError(f"Split {split!r} in {directory} does not match its manifest hash")
    return samples


def load_dataset(directory: Path) -> Dict[str, List[MultimodalSample]]:
    return {name: load_split(directory, name) for name in SPLITS}


def synthetic_config_of(manifest: Dict) -> SyntheticConfig:
    return SyntheticConfig(**manifest["config"])
