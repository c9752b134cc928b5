"""
Tests for run configuration, snapshots and the JSON/hash helpers
"""
import numpy as np
import pytest

from src.utils import (
    Config,
    ConfigError,
    RunConfig,
    arrays_hash,
    canonical_json,
    content_hash,
    load_json,
    save_json
)


class TestRunConfig:

    def test_defaults_follow_config(self):
        config = RunConfig()
        assert config.model.common_dim == Config.COMMON_DIM
        assert config.schedule.t_eps == Config.T_EPS
        assert config.eval.patterns == ["t", "v", "a", "tv", "ta", "av", "tav"]

    def test_partial_sections(self):
        config = RunConfig.from_dict({"model": {"window": 3}})
        assert config.model.window == 3
        assert config.model.gcn_layers == Config.GCN_LAYERS

    @pytest.mark.parametrize("data, key", [
        ({"sed": 1}, "sed"),
        ({"model": {"widow": 3}}, "model.widow"),
        ({"schedule": {"spectrum": {"kind": "vp", "beta": 1}}}, "schedule.spectrum.beta"),
    ])
    def test_unknown_keys_are_named(self, data, key):
        with pytest.raises(ConfigError, match=f"Unknown config key: {key}"):
            RunConfig.from_dict(data)

    def test_section_must_be_object(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"model": 3})

    def test_override(self):
        config = RunConfig()
        config.override("model.beta", 0.5)
        config.override("schedule.features.kind", "ve")
        assert config.model.beta == 0.5
        assert config.schedule.features.kind == "ve"

    @pytest.mark.parametrize("key", ["model.nope", "nope.beta", "model.beta.inner"])
    def test_override_unknown(self, key):
        with pytest.raises(ConfigError, match="Unknown config key"):
            RunConfig().override(key, 1)

    @pytest.mark.parametrize("key, value", [
        ("model.beta", -1.0),
        ("schedule.spectrum.kind", "subvp"),
        ("eval.mode", "burst"),
        ("eval.imputers", ["knn"]),
        ("threads", 0),
        ("train.batch_size", 0),
        ("train.dsm_draws", 0),
        ("eval.draws", 0),
    ])
    def test_override_validates(self, key, value):
        with pytest.raises(ConfigError):
            RunConfig().override(key, value)

    def test_file_round_trip(self, tmp_path):
        config = RunConfig.from_dict({"seed": 9, "train": {"steps": 7}})
        save_json(config.to_dict(), tmp_path / "c.json")
        assert RunConfig.load(tmp_path / "c.json") == config

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.load(path)

    def test_snapshot_hash(self, tmp_path):
        config = RunConfig(seed=3)
        digest = config.snapshot(tmp_path, name="train_config")
        written = load_json(tmp_path / "train_config.json")
        assert written["content_hash"] == digest == content_hash(written["config"])
        assert digest != RunConfig(seed=4).content_hash()

    def test_resolved_paths(self, tmp_path):
        config = RunConfig(output_dir=str(tmp_path))
        assert config.dataset_dir == tmp_path / "data"
        assert config.eval_dataset_dir == tmp_path / "data"
        assert config.eval_checkpoint == tmp_path / "checkpoints" / "latest.pt"
        config.override("eval.dataset_dir", str(tmp_path / "other"))
        assert config.eval_dataset_dir == tmp_path / "other"


class TestDefaults:

    def test_defaults_are_valid(self):
        assert Config.validate() is True

    def test_inverted_beta_range(self, monkeypatch):
        monkeypatch.setattr(Config, "BETA_MAX", 0.01)
        with pytest.raises(ValueError):
            Config.validate()

    def test_odd_time_embedding(self, monkeypatch):
        monkeypatch.setattr(Config, "TIME_EMBED_DIM", 15)
        with pytest.raises(ValueError):
            Config.validate()


class TestHashing:

    def test_canonical_json_sorts_keys(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
        assert content_hash({"b": 1, "a": 2}) == content_hash({"a": 2, "b": 1})

    def test_arrays_hash_sees_shape(self):
        a = np.arange(6, dtype=np.float64)
        assert arrays_hash([a]) == arrays_hash([a.copy()])
        assert arrays_hash([a]) != arrays_hash([a.reshape(2, 3)])
