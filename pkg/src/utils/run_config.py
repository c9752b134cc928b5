"""
Per-run configuration: one JSON file, strict keys, defaults from Config
"""
import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config import Config
from .errors import ConfigError
from .helpers import content_hash, load_json, save_json


@dataclass
class ScheduleParams:
    kind: str = Config.SCHEDULE_KIND
    beta_min: float = Config.BETA_MIN
    beta_max: float = Config.BETA_MAX
    sigma_min: float = Config.SIGMA_MIN
    sigma_max: float = Config.SIGMA_MAX


@dataclass
class ScheduleSection:
    features: ScheduleParams = field(default_factory=ScheduleParams)
    spectrum: ScheduleParams = field(default_factory=ScheduleParams)
    t_eps: float = Config.T_EPS


@dataclass
class DataSection:
    n_conversations: int = Config.N_CONVERSATIONS
    n_utterances: int = Config.N_UTTERANCES
    raw_dims: Dict[str, int] = field(default_factory=lambda: dict(Config.RAW_DIMS))
    noise: float = Config.CROSS_MODAL_NOISE
    label_noise: float = Config.CROSS_MODAL_NOISE
    smoothness: float = 0.6
    split_ratios: List[float] = field(default_factory=lambda: list(Config.SPLIT_RATIOS))


@dataclass
class ModelSection:
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


@dataclass
class TrainSection:
    steps: int = Config.TRAIN_STEPS
    learning_rate: float = Config.LEARNING_RATE
    reverse_steps: int = Config.TRAIN_REVERSE_STEPS
    batch_size: int = Config.TRAIN_BATCH_SIZE
    dsm_draws: int = Config.TRAIN_DSM_DRAWS
    checkpoint_every: int = Config.CHECKPOINT_EVERY
    dataset_dir: Optional[str] = None
    resume: bool = False


@dataclass
class EvalSection:
    mode: str = "fixed-pattern"
    patterns: List[str] = field(default_factory=lambda: ["t", "v", "a", "tv", "ta", "av", "tav"])
    missing_rates: List[float] = field(default_factory=lambda: list(Config.MISSING_RATES))
    recovery_steps: int = Config.RECOVERY_STEPS
    corrector_steps: int = Config.CORRECTOR_STEPS
    corrector_snr: float = Config.CORRECTOR_SNR
    draws: int = Config.RECOVERY_DRAWS
    imputers: List[str] = field(default_factory=lambda: ["diffusion", "mean"])
    split: str = "test"
    checkpoint: Optional[str] = None
    dataset_dir: Optional[str] = None


@dataclass
class CompareSection:
    n_graphs: int = 50
    n_nodes: int = 16
    feature_dim: int = 8
    window: int = Config.GRAPH_WINDOW
    times: List[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])


@dataclass
class RunConfig:
    """Resolved configuration of one command invocation"""
    seed: int = 0
    output_dir: str = str(Config.RUNS_DIR / "default")
    threads: int = 1
    data: DataSection = field(default_factory=DataSection)
    model: ModelSection = field(default_factory=ModelSection)
    schedule: ScheduleSection = field(default_factory=ScheduleSection)
    train: TrainSection = field(default_factory=TrainSection)
    eval: EvalSection = field(default_factory=EvalSection)
    compare: CompareSection = field(default_factory=CompareSection)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return _build(cls, data, prefix="")

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        try:
            raw = load_json(path)
        except ValueError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def content_hash(self) -> str:
        return content_hash(self.to_dict())

    def override(self, dotted_key: str, value: Any) -> None:
        """Set a value by dotted key, e.g. ``model.beta``"""
        parts = dotted_key.split(".")
        target = self
        for part in parts[:-1]:
            if not hasattr(target, part):
                raise ConfigError(f"Unknown config key: {dotted_key}")
            target = getattr(target, part)
        if not dataclasses.is_dataclass(target) or parts[-1] not in {f.name for f in dataclasses.fields(target)}:
            raise ConfigError(f"Unknown config key: {dotted_key}")
        setattr(target, parts[-1], value)
        self.validate()

    def validate(self) -> "RunConfig":
        for name, params in (("features", self.schedule.features), ("spectrum", self.schedule.spectrum)):
            if params.kind not in ("vp", "ve"):
                raise ConfigError(f"schedule.{name}.kind must be 'vp' or 've', got {params.kind!r}")
        if not 0.0 <= self.model.beta:
            raise ConfigError(f"model.beta must be non-negative, got {self.model.beta}")
        if self.eval.mode not in ("fixed-pattern", "random-rate"):
            raise ConfigError(f"eval.mode must be 'fixed-pattern' or 'random-rate', got {self.eval.mode!r}")
        unknown = set(self.eval.imputers) - {"diffusion", "mean", "zero"}
        if unknown:
            raise ConfigError(f"eval.imputers has unknown entries: {sorted(unknown)}")
        for key, value in (("train.batch_size", self.train.batch_size), ("train.dsm_draws", self.train.dsm_draws),
                           ("eval.draws", self.eval.draws)):
            if value < 1:
                raise ConfigError(f"{key} must be >= 1, got {value}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        return self

    def snapshot(self, directory: Path, name: str = "resolved_config") -> str:
        """Write the resolved config and its content hash next to the outputs"""
        directory = Path(directory)
        digest = self.content_hash()
        save_json({"config": self.to_dict(), "content_hash": digest}, directory / f"{name}.json")
        return digest

    # Resolved paths
    @property
    def root(self) -> Path:
        return Path(self.output_dir)

    @property
    def dataset_dir(self) -> Path:
        return Path(self.train.dataset_dir) if self.train.dataset_dir else self.root / "data"

    @property
    def eval_dataset_dir(self) -> Path:
        return Path(self.eval.dataset_dir) if self.eval.dataset_dir else self.dataset_dir

    @property
    def checkpoint_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def eval_checkpoint(self) -> Path:
        return Path(self.eval.checkpoint) if self.eval.checkpoint else self.checkpoint_dir / "latest.pt"


def _build(cls, data: Dict[str, Any], prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"Config section '{prefix.rstrip('.') or '<root>'}' must be an object")

    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"Unknown config key: {prefix}{key}")

    kwargs = {}
    for name, value in data.items():
        hint = hints[name]
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _build(hint, value, prefix=f"{prefix}{name}.")
        else:
            kwargs[name] = value
    instance = cls(**kwargs)
    if isinstance(instance, RunConfig):
        instance.validate()
    return instance
