"""
Command-line entry point: python -m src.cli {generate,train,eval,compare,recover}

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure, 4 I/O error.
"""
import argparse
import json
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch

from src.diffusion import DiffusionSchedule, SdeStepPlan
from src.gsdnet import (
    LOSS_COLUMNS,
    GsdnetModel,
    MissingPattern,
    ModelSpec,
    load_model,
    recover,
    save_model,
    training_steps
)
from src.harness import (
    FIXED_PATTERN,
    RANDOM_RATE,
    EvalReport,
    SyntheticConfig,
    apply_missing,
    diffusion_space_comparison,
    evaluate,
    generate,
    load_manifest,
    load_split,
    mean_curves,
    random_graphs,
    save_dataset
)
from src.harness.evaluation import recovery_error
from src.linalg import save_matrix_binary
from src.score import make_optimizer
from src.utils import (
    ConfigError,
    DataError,
    NumericalError,
    RunConfig,
    ShapeError,
    setup_logger
)

logger = setup_logger()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

LOSS_LOG_VERSION = "# gsdnet-loss-log v1"
LOSS_LOG_NAME = "loss_log.csv"
LATEST_CHECKPOINT = "latest.pt"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with command-line overrides applied on top"""
    config = RunConfig.load(args.config) if args.config else RunConfig()

    if args.seed is not None:
        config.override("seed", args.seed)
    if args.out is not None:
        config.override("output_dir", str(args.out))
    if args.threads is not None:
        config.override("threads", args.threads)

    if getattr(args, "beta", None) is not None:
        config.override("model.beta", args.beta)
    if getattr(args, "resume", False):
        config.override("train.resume", True)
    if getattr(args, "checkpoint", None) is not None:
        config.override("eval.checkpoint", str(args.checkpoint))
    if getattr(args, "steps", None) is not None:
        key = "train.steps" if args.command == "train" else "eval.recovery_steps"
        config.override(key, args.steps)
    if getattr(args, "pattern", None) is not None:
        config.override("eval.patterns", [MissingPattern.from_available(args.pattern).name])
        config.override("eval.mode", FIXED_PATTERN)
    if getattr(args, "missing_rate", None) is not None:
        config.override("eval.missing_rates", [args.missing_rate])
        config.override("eval.mode", RANDOM_RATE)

    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        config.override(key.strip(), _parse_value(value))
    return config


def _start_run(config: RunConfig, command: str) -> str:
    torch.set_num_threads(config.threads)
    config.root.mkdir(parents=True, exist_ok=True)
    setup_logger(log_dir=config.root / "logs")
    digest = config.snapshot(config.root, name=f"{command}_config")
    logger.info(f"[{command}] output={config.root} seed={config.seed} config={digest[:12]}")
    return digest


def _load_checked_model(config: RunConfig):
    """Checkpoint and dataset manifest; their dataset hashes must agree"""
    model, payload = load_model(config.eval_checkpoint)
    manifest = load_manifest(config.eval_dataset_dir)
    trained_on = payload["manifest"].get("dataset_hash")
    if trained_on != manifest["dataset_hash"]:
        raise ConfigError(
            f"Checkpoint {config.eval_checkpoint} was trained on dataset {str(trained_on)[:12]}, "
            f"but {config.eval_dataset_dir} holds {manifest['dataset_hash'][:12]}"
        )
    return model, manifest


def _recovery_plan(config: RunConfig, model: GsdnetModel) -> SdeStepPlan:
    return SdeStepPlan(num_steps=config.eval.recovery_steps, corrector_steps=config.eval.corrector_steps,
                       corrector_snr=config.eval.corrector_snr, t_eps=model.t_eps)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(config: RunConfig) -> Dict:
    _start_run(config, "generate")
    dataset = generate(SyntheticConfig.from_run_config(config))
    return save_dataset(dataset, config.dataset_dir)


def _write_loss_rows(path: Path, rows: List[Dict], header: bool) -> None:
    frame = pd.DataFrame(rows, columns=["step", *LOSS_COLUMNS])
    with open(path, "a" if not header else "w", encoding="utf-8", newline="") as f:
        if header:
            f.write(LOSS_LOG_VERSION + "\n")
        frame.to_csv(f, index=False, header=header, float_format="%.17g")


def read_loss_log(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def _save_training_checkpoint(model, optimizer, generator, step: int, checkpoint_dir: Path,
                              dataset_hash: str) -> None:
    state = {"step": step, "optimizer": optimizer.state_dict(), "generator_state": generator.get_state()}
    save_model(model, checkpoint_dir / f"step_{step:06d}.pt", dataset_hash, state)
    save_model(model, checkpoint_dir / LATEST_CHECKPOINT, dataset_hash, state)


def cmd_train(config: RunConfig) -> Path:
    _start_run(config, "train")
    manifest = load_manifest(config.dataset_dir)
    train_samples = load_split(config.dataset_dir, "train")
    dataset_hash = manifest["dataset_hash"]

    generator = torch.Generator().manual_seed(config.seed)
    loss_log = config.root / LOSS_LOG_NAME
    latest = config.checkpoint_dir / LATEST_CHECKPOINT
    start_step = 0

    if config.train.resume and latest.exists():
        model, payload = load_model(latest)
        if payload["manifest"].get("dataset_hash") != dataset_hash:
            raise ConfigError(f"Checkpoint {latest} was trained on a different dataset")
        state = payload["training_state"]
        optimizer = make_optimizer(model.parameters(), lr=config.train.learning_rate)
        optimizer.load_state_dict(state["optimizer"])
        generator.set_state(state["generator_state"])
        start_step = int(state["step"])
        # Drop log rows written after the checkpoint
        kept = read_loss_log(loss_log) if loss_log.exists() else pd.DataFrame(columns=["step", *LOSS_COLUMNS])
        _write_loss_rows(loss_log, kept[kept["step"] <= start_step].to_dict("records"), header=True)
        logger.info(f"Resuming from step {start_step} ({latest})")
    else:
        spec = ModelSpec.from_run_config(config, manifest["raw_dims"], manifest["n_utterances"])
        model = GsdnetModel(spec)
        optimizer = make_optimizer(model.parameters(), lr=config.train.learning_rate)
        _write_loss_rows(loss_log, [], header=True)

    logger.info(f"Training {model.num_parameters} parameters on {len(train_samples)} conversations, "
                f"steps {start_step + 1}..{config.train.steps}, beta={model.beta}")

    started = time.time()
    step = start_step
    try:
        for step, losses in training_steps(model, optimizer, train_samples, generator, start_step,
                                           config.train.steps, config.train.reverse_steps,
                                           batch_size=config.train.batch_size,
                                           dsm_draws=config.train.dsm_draws):
            _write_loss_rows(loss_log, [losses.row(step)], header=False)
            if step % config.train.checkpoint_every == 0:
                _save_training_checkpoint(model, optimizer, generator, step, config.checkpoint_dir, dataset_hash)
            if step % 100 == 0:
                logger.info(f"step {step}: L_total={losses.total:.4f} (pattern {losses.pattern})")
    except NumericalError:
        logger.error(f"Training aborted after step {step}; last good checkpoint kept in {config.checkpoint_dir}")
        raise

    if step % config.train.checkpoint_every != 0 or step == start_step:
        _save_training_checkpoint(model, optimizer, generator, step, config.checkpoint_dir, dataset_hash)
    logger.info(f"Training finished at step {step} in {time.time() - started:.1f}s")
    return latest


def cmd_eval(config: RunConfig) -> EvalReport:
    digest = _start_run(config, "eval")
    model, _ = _load_checked_model(config)
    samples = load_split(config.eval_dataset_dir, config.eval.split)
    needs_train = any(name != "diffusion" for name in config.eval.imputers)
    train_samples = load_split(config.eval_dataset_dir, "train") if needs_train else None
    plan = _recovery_plan(config, model)

    if config.eval.mode == FIXED_PATTERN:
        settings = [(FIXED_PATTERN, p, 0) for p in config.eval.patterns]
    else:
        settings = [(RANDOM_RATE, rate, config.seed) for rate in config.eval.missing_rates]

    report = EvalReport()
    for imputer in config.eval.imputers:
        for mode, parameter, mask_seed in settings:
            masked = apply_missing(samples, mode, parameter, seed=mask_seed)
            generator = torch.Generator().manual_seed(config.seed)
            report.add(evaluate(model, masked, plan, generator, imputer=imputer,
                                train_samples=train_samples, seed=config.seed, config_hash=digest,
                                draws=config.eval.draws))

    out_dir = config.root / "eval"
    report.to_csv(out_dir / f"eval_report_{config.eval.mode}.csv")
    report.to_json(out_dir / f"eval_report_{config.eval.mode}.json")
    logger.info(f"Wrote {len(report.rows)} report rows to {out_dir}")
    return report


def cmd_compare(config: RunConfig) -> pd.DataFrame:
    _start_run(config, "compare")
    section = config.compare
    graphs = random_graphs(section.n_graphs, section.n_nodes, section.feature_dim, section.window, config.seed)
    schedule = DiffusionSchedule.from_params(config.schedule.spectrum)
    generator = torch.Generator().manual_seed(config.seed)
    frame = diffusion_space_comparison(graphs, schedule, section.times, generator)

    out_dir = config.root / "compare"
    out_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_dir / "degradation_curves.csv", index=False, float_format="%.10g")
    mean_curves(frame).to_csv(out_dir / "mean_curves.csv", index=False, float_format="%.10g")
    return frame


def cmd_recover(config: RunConfig) -> pd.DataFrame:
    _start_run(config, "recover")
    model, _ = _load_checked_model(config)
    samples = load_split(config.eval_dataset_dir, config.eval.split)
    pattern = MissingPattern.from_available(config.eval.patterns[0])
    plan = _recovery_plan(config, model)
    generator = torch.Generator().manual_seed(config.seed)
    masked = apply_missing(samples, FIXED_PATTERN, pattern)

    rows = []
    originals: Dict[str, list] = {m: [] for m in pattern.missing}
    recovered: Dict[str, list] = {m: [] for m in pattern.missing}
    for item in masked:
        result = recover(model, item.sample, item.pattern, plan, generator, draws=config.eval.draws)
        for m in pattern.missing:
            err, count = recovery_error(item.truth, {m: result.decoded[m]})
            rows.append({"sample_id": item.truth.sample_id, "pattern": pattern.name,
                         "modality": m, "mse": err / count})
            originals[m].append(item.truth.modalities[m])
            recovered[m].append(result.decoded[m])

    out_dir = config.root / "recover"
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=["sample_id", "pattern", "modality", "mse"])
    frame.to_csv(out_dir / f"recovery_mse_{pattern.name}.csv", index=False, float_format="%.10g")
    for m in pattern.missing:
        save_matrix_binary(np.concatenate(originals[m]), out_dir / f"{pattern.name}_{m}_original.npy")
        save_matrix_binary(np.concatenate(recovered[m]), out_dir / f"{pattern.name}_{m}_recovered.npy")
    logger.info(f"Recovered {list(pattern.missing)} for {len(masked)} samples into {out_dir}")
    return frame


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "recover": cmd_recover,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=Path, default=None, help="Output directory")
    common.add_argument("--threads", type=int, default=None, help="Torch intra-op thread cap")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="Override any config value by dotted key, e.g. model.window=3")

    parser = argparse.ArgumentParser(prog="python -m src.cli",
                                     description="Graph spectral diffusion for missing-modality recovery")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[common], help="Generate the synthetic dataset")

    train = sub.add_parser("train", parents=[common], help="Train a model")
    train.add_argument("--beta", type=float, default=None, help="Weight of the missing-modality loss")
    train.add_argument("--steps", type=int, default=None, help="Total training steps")
    train.add_argument("--resume", action="store_true", help="Continue from checkpoints/latest.pt")

    for name, text in (("eval", "Evaluate under missingness"), ("recover", "Export recoveries")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--pattern", default=None, help="Available modalities, e.g. 'tv'")
        command.add_argument("--steps", type=int, default=None, help="Reverse-SDE steps")
        command.add_argument("--checkpoint", type=Path, default=None)
        if name == "eval":
            command.add_argument("--missing-rate", type=float, default=None)

    sub.add_parser("compare", parents=[common], help="Adjacency vs spectral noising experiment")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        COMMANDS[args.command](config)
        return EXIT_OK
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERIC
    except (ConfigError, DataError, ShapeError, ValueError) as e:
        logger.error(f"Invalid configuration or input: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
