"""
Versioned score-net checkpoints
"""
from pathlib import Path
from typing import Tuple

import torch

from src.diffusion import DiffusionSchedule
from src.utils.errors import ConfigError
from src.utils.logger import setup_logger
from .score_net import ScoreNet

logger = setup_logger()

FORMAT_VERSION = 1


def score_net_payload(net: ScoreNet, schedule: DiffusionSchedule) -> dict:
    """Shapes, flat parameter vector and schedule of one score net"""
    state = net.state_dict()
    return {
        "config": net.config(),
        "shapes": {name: list(tensor.shape) for name, tensor in state.items()},
        "flat_parameters": torch.cat([tensor.reshape(-1) for tensor in state.values()]).clone(),
        "schedule": schedule.to_dict(),
    }


def score_net_from_payload(payload: dict) -> Tuple[ScoreNet, DiffusionSchedule]:
    net = ScoreNet(**payload["config"])
    flat = payload["flat_parameters"]
    state, offset = {}, 0
    for name, shape in payload["shapes"].items():
        count = 1
        for size in shape:
            count *= size
        state[name] = flat[offset:offset + count].reshape(shape).clone()
        offset += count
    if offset != flat.numel():
        raise ConfigError(f"Checkpoint holds {flat.numel()} values, shapes account for {offset}")
    net.load_state_dict(state)
    return net, DiffusionSchedule(**payload["schedule"])


def save_score_net(net: ScoreNet, schedule: DiffusionSchedule, file_path: Path) -> Path:
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"format_version": FORMAT_VERSION, "kind": "score_net",
                **score_net_payload(net, schedule)}, file_path)
    logger.debug(f"Saved score net ({net.num_parameters} parameters) to {file_path}")
    return file_path


def load_score_net(file_path: Path) -> Tuple[ScoreNet, DiffusionSchedule]:
    payload = torch.load(Path(file_path), weights_only=False)
    if payload.get("kind") != "score_net":
        raise ConfigError(f"{file_path} is not a score-net checkpoint")
    if payload.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"Unsupported checkpoint version {payload.get('format_version')}")
    return score_net_from_payload(payload)
