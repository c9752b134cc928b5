"""
Shared fixtures: seeded generators, a tiny model and a tiny synthetic dataset
"""
import numpy as np
import pytest
import torch

from src.gsdnet import GsdnetModel, ModelSpec
from src.harness import SyntheticConfig, generate
from src.utils import RunConfig, save_json

TINY_RAW_DIMS = {"t": 4, "a": 3, "v": 2}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def generator():
    return torch.Generator().manual_seed(1234)


def tiny_spec(**overrides) -> ModelSpec:
    values = dict(
        raw_dims=dict(TINY_RAW_DIMS),
        n_utterances=4,
        common_dim=4,
        kernel_sizes={"t": 3, "a": 1, "v": 3},
        window=1,
        gcn_layers=1,
        time_embed_dim=4,
        hidden_dims=[16],
        decoder_hidden=8,
        beta=0.5,
        seed=3,
    )
    values.update(overrides)
    return ModelSpec(**values)


@pytest.fixture
def make_spec():
    return tiny_spec


@pytest.fixture
def spec():
    return tiny_spec()


@pytest.fixture
def model(spec):
    return GsdnetModel(spec)


@pytest.fixture
def tiny_dataset():
    config = SyntheticConfig(seed=7, n_conversations=20, n_utterances=4,
                             raw_dims=dict(TINY_RAW_DIMS), noise=0.1, label_noise=0.1)
    return generate(config)


@pytest.fixture
def sample(tiny_dataset):
    return tiny_dataset["train"][0]


def tiny_run_config(out_dir) -> RunConfig:
    """A run config small enough for end-to-end CLI tests"""
    return RunConfig.from_dict({
        "seed": 5,
        "output_dir": str(out_dir),
        "data": {"n_conversations": 20, "n_utterances": 3, "raw_dims": dict(TINY_RAW_DIMS)},
        "model": {"common_dim": 4, "window": 1, "gcn_layers": 1, "time_embed_dim": 4,
                  "hidden_dims": [8], "decoder_hidden": 8},
        "train": {"steps": 2, "reverse_steps": 2, "checkpoint_every": 100},
        "eval": {"recovery_steps": 3},
        "compare": {"n_graphs": 2, "n_nodes": 6, "feature_dim": 3, "window": 1, "times": [0.1, 0.5]},
    })


@pytest.fixture
def run_config_file(tmp_path):
    """Path of a tiny config JSON plus the output directory it points at"""
    out_dir = tmp_path / "run"
    config = tiny_run_config(out_dir)
    path = tmp_path / "config.json"
    save_json(config.to_dict(), path)
    return path, out_dir
