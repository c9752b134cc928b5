"""
Evaluation protocol: recover (or impute), predict, score, and collect report rows
"""
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import torch

from src.diffusion import SdeStepPlan
from src.gsdnet import GsdnetModel, predict_complete, predict_recovered, recover
from src.gsdnet.types import MultimodalSample
from src.utils.config import Config
from src.utils.errors import DataError
from src.utils.helpers import save_json
from src.utils.logger import setup_logger
from .imputation import IMPUTERS, Imputer
from .metrics import sentiment_scores
from .missing import MaskedDataset

logger = setup_logger()

REPORT_VERSION = "gsdnet-eval-report v1"
METRIC_COLUMNS = ["acc2", "f1", "acc7", "recovery_mse"]
AVERAGE = "Average"


@dataclass
class EvalRow:
    pattern: str            # pattern name, or "rate" for random-rate rows
    missing_rate: float
    imputer: str
    variant: str            # "spectral" or "features-only"
    seed: int
    n_samples: int
    acc2: float
    f1: float
    acc7: float
    recovery_mse: float
    runtime_s: float
    config_hash: str = ""


@dataclass
class EvalReport:
    rows: List[EvalRow] = field(default_factory=list)

    def add(self, row: EvalRow) -> None:
        self.rows.append(row)

    def to_frame(self, with_average: bool = True, with_runtime: bool = False) -> pd.DataFrame:
        """Rows as a frame; wall-clock runtime is left out unless asked for"""
        if not self.rows:
            raise DataError("Report has no rows")
        frame = pd.DataFrame([asdict(row) for row in self.rows])
        if not with_runtime:
            frame = frame.drop(columns=["runtime_s"])
        if not with_average:
            return frame
        # One Average row after each (imputer, variant) block
        parts = []
        for _, group in frame.groupby(["imputer", "variant"], sort=False):
            parts.extend([group, average_row(group)])
        return pd.concat(parts, ignore_index=True)

    def to_csv(self, file_path: Path) -> Path:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="") as f:
            f.write(f"# {REPORT_VERSION}\n")
            self.to_frame().to_csv(f, index=False, float_format="%.10g")
        return file_path

    def to_json(self, file_path: Path) -> Path:
        frame = self.to_frame()
        save_json({"version": REPORT_VERSION, "rows": frame.to_dict(orient="records")}, file_path)
        return Path(file_path)


def average_row(frame: pd.DataFrame) -> pd.DataFrame:
    """Arithmetic mean of every metric column, labelled as the Average row"""
    means = frame[[c for c in METRIC_COLUMNS + ["runtime_s"] if c in frame.columns]].mean()
    row = {column: "" for column in frame.columns}
    row.update(pattern=AVERAGE, missing_rate=frame["missing_rate"].mean(),
               n_samples=int(frame["n_samples"].sum()), seed=int(frame["seed"].iloc[0]),
               imputer=frame["imputer"].iloc[0], variant=frame["variant"].iloc[0],
               config_hash=frame["config_hash"].iloc[0])
    row.update(means.to_dict())
    return pd.DataFrame([row], columns=frame.columns)


def recovery_error(truth: MultimodalSample, reconstructions: dict) -> tuple:
    """(sum of squared raw-space errors, entry count) over the reconstructed modalities"""
    total, count = 0.0, 0
    for m, values in reconstructions.items():
        diff = np.asarray(values) - truth.modalities[m]
        total += float(np.sum(diff ** 2))
        count += diff.size
    return total, count


def evaluate(model: GsdnetModel, masked: MaskedDataset, plan: SdeStepPlan,
             generator: torch.Generator, imputer: Union[str, Imputer] = "diffusion",
             train_samples: Optional[Sequence[MultimodalSample]] = None,
             seed: int = 0, config_hash: str = "", draws: int = Config.RECOVERY_DRAWS) -> EvalRow:
    """
    Score one masked dataset

    imputer="diffusion" recovers missing modalities with the model; "mean"/"zero" (or
    a fitted Imputer) restore them first and predict on the completed sample. `draws`
    reverse chains are averaged per recovered block.
    Recovery MSE is the mean squared raw-space error over every missing entry (0 when
    nothing is missing).
    """
    if len(masked) == 0:
        raise DataError("Cannot evaluate an empty dataset")
    if isinstance(imputer, str) and imputer != "diffusion":
        if imputer not in IMPUTERS:
            raise DataError(f"Unknown imputer {imputer!r}")
        if not train_samples:
            raise DataError(f"The {imputer} imputer needs the training split")
        imputer = IMPUTERS[imputer]().fit(train_samples)
    name = imputer if isinstance(imputer, str) else imputer.name

    started = time.perf_counter()
    predictions, labels = [], []
    squared, entries = 0.0, 0
    for item in masked:
        if name == "diffusion":
            result = recover(model, item.sample, item.pattern, plan, generator, draws=draws)
            prediction = predict_recovered(model, result)
            reconstructions = result.decoded
        else:
            completed = imputer.impute(item.sample, item.pattern)
            prediction = predict_complete(model, completed)
            reconstructions = {m: completed.modalities[m] for m in item.pattern.missing}
        err, count = recovery_error(item.truth, reconstructions)
        squared += err
        entries += count
        predictions.append(prediction.score)
        labels.append(item.truth.label)

    scores = sentiment_scores(predictions, labels)
    row = EvalRow(
        pattern=masked.parameter if isinstance(masked.parameter, str) else "rate",
        missing_rate=masked.missing_fraction if isinstance(masked.parameter, str) else float(masked.parameter),
        imputer=name,
        variant="spectral" if model.spectral_diffusion else "features-only",
        seed=seed,
        n_samples=len(masked),
        acc2=scores.acc2, f1=scores.f1, acc7=scores.acc7,
        recovery_mse=squared / entries if entries else 0.0,
        runtime_s=time.perf_counter() - started,
        config_hash=config_hash,
    )
    logger.info(f"Evaluated {row.pattern} (rate {row.missing_rate:.2f}, {name}): "
                f"ACC2={row.acc2:.3f} F1={row.f1:.3f} ACC7={row.acc7:.3f} MSE={row.recovery_mse:.4f}")
    return row
