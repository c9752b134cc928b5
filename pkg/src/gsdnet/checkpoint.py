"""
Model checkpoints: the score-net container extended with every other block and a manifest
"""
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import torch

from src.score import FORMAT_VERSION, score_net_payload
from src.utils.errors import ConfigError
from src.utils.helpers import format_file_size
from src.utils.logger import setup_logger
from .graph import GRAPH_RULE_VERSION
from .model import GsdnetModel, ModelSpec

logger = setup_logger()

KIND = "gsdnet"


def model_manifest(model: GsdnetModel, dataset_hash: Optional[str] = None) -> Dict[str, Any]:
    return {
        "spec": model.spec.to_dict(),
        "graph_rule_version": GRAPH_RULE_VERSION,
        "dataset_hash": dataset_hash,
        "num_parameters": model.num_parameters,
    }


def save_model(model: GsdnetModel, file_path: Path, dataset_hash: Optional[str] = None,
               training_state: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write model weights, manifest and (optionally) the optimizer/generator state

    `training_state` carries whatever a resumed run needs: step, optimizer state dict,
    generator state.
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "manifest": model_manifest(model, dataset_hash),
        "state_dict": model.state_dict(),
        "training_counts": dict(model.training_counts),
        "score_nets": {
            **{f"features/{m}": score_net_payload(net, model.feature_schedule)
               for m, net in model.feature_nets.items()},
            **{f"spectrum/{m}": score_net_payload(net, model.spectrum_schedule)
               for m, net in model.spectrum_nets.items()},
        },
        "training_state": training_state,
    }
    tmp_path = file_path.with_suffix(file_path.suffix + ".tmp")
    torch.save(payload, tmp_path)
    tmp_path.replace(file_path)
    logger.debug(f"Saved model checkpoint to {file_path} ({format_file_size(file_path.stat().st_size)})")
    return file_path


def load_model(file_path: Path) -> Tuple[GsdnetModel, Dict[str, Any]]:
    """Rebuild the model; returns (model, checkpoint payload) so callers can read the manifest"""
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {file_path}")
    payload = torch.load(file_path, weights_only=False)
    if payload.get("kind") != KIND:
        raise ConfigError(f"{file_path} is not a GSDNet checkpoint")
    if payload.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"Unsupported checkpoint version {payload.get('format_version')}")
    manifest = payload["manifest"]
    if manifest.get("graph_rule_version") != GRAPH_RULE_VERSION:
        raise ConfigError(
            f"Checkpoint uses graph rule v{manifest.get('graph_rule_version')}, "
            f"this build uses v{GRAPH_RULE_VERSION}"
        )

    model = GsdnetModel(ModelSpec(**manifest["spec"]))
    model.load_state_dict(payload["state_dict"])
    model.training_counts.update(payload["training_counts"])
    return model, payload
