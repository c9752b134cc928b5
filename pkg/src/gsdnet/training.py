"""
Joint training step: score matching, reconstruction, fusion and prediction
"""
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np
import torch

from src.diffusion import forward_sample, integrate_reverse
from src.score import dsm_loss, sample_times
from src.utils.config import Config
from src.utils.errors import DataError, NumericalError
from src.utils.logger import setup_logger
from .graph import assemble_adjacency, block_spectra, similarity_adjacency
from .head import prediction_loss
from .model import GsdnetModel
from .types import MODALITIES, EncodedModalities, MissingPattern, MultimodalSample, all_patterns

logger = setup_logger()

LOSS_COLUMNS = ("L_s_theta", "L_s_phi", "L_rec", "L_pred", "L_total")

Batch = Sequence[Tuple[MultimodalSample, MissingPattern]]


@dataclass(frozen=True)
class TrainLosses:
    """
    Loss components of one step, averaged over the step's conversations

    total == beta * ((rec + s_theta) + s_phi) + pred, evaluated in that order.
    """
    s_theta: float
    s_phi: float
    rec: float
    pred: float
    total: float
    pattern: str

    def row(self, step: int) -> Dict[str, float]:
        return {"step": step, "L_s_theta": self.s_theta, "L_s_phi": self.s_phi,
                "L_rec": self.rec, "L_pred": self.pred, "L_total": self.total}

    def to_dict(self) -> dict:
        return asdict(self)


def reconstruction_loss(decoded: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Sum of squared errors"""
    return torch.sum((decoded - target) ** 2)


def reverse_times(t: float, t_eps: float, steps: int) -> Sequence[float]:
    """steps + 1 equally spaced times from t down to t_eps; a single point when t <= t_eps"""
    if steps < 1 or t <= t_eps:
        return [t]
    return [t - k * (t - t_eps) / steps for k in range(steps)] + [t_eps]


def reconstruction_branch(model: GsdnetModel, stream: str, modality: str, x0: torch.Tensor,
                          cond: torch.Tensor, t: float, noise: torch.Tensor,
                          generator: torch.Generator, steps: int) -> torch.Tensor:
    """Perturb x0 to time t, then run `steps` reverse steps back to t_eps"""
    if stream == "features":
        schedule, score_fn = model.feature_schedule, model.feature_score_fn(modality, cond)
    else:
        schedule, score_fn = model.spectrum_schedule, model.spectrum_score_fn(modality, cond)
    xt = forward_sample(schedule, x0, t, noise)
    return integrate_reverse(schedule, score_fn, xt, reverse_times(t, model.t_eps, steps), generator)


def _check_finite(losses: Dict[str, torch.Tensor], label: str) -> None:
    bad = {name: float(value) for name, value in losses.items() if not math.isfinite(float(value))}
    if bad:
        values = {name: float(value) for name, value in losses.items()}
        logger.error(f"Non-finite loss on {label}: {values}")
        raise NumericalError(f"Non-finite loss component(s) {sorted(bad)} on {label}: {values}")


def _check_trainable(sample: MultimodalSample, pattern: MissingPattern) -> None:
    if not pattern.observed:
        raise DataError("Training needs at least one observed modality")
    absent = set(pattern.missing) - set(sample.present)
    if absent:
        raise DataError(f"Sample {sample.sample_id} lacks ground truth for {sorted(absent)}")


def _repeat_rows(x: torch.Tensor, draws: int) -> torch.Tensor:
    """draws stacked copies of x as rows: (draws * rows) x width, or draws x len for vectors"""
    return x.repeat(draws, 1) if x.dim() == 2 else x.unsqueeze(0).expand(draws, -1)


def sample_losses(model: GsdnetModel, sample: MultimodalSample, pattern: MissingPattern,
                  generator: torch.Generator, reverse_steps: int = Config.TRAIN_REVERSE_STEPS,
                  dsm_draws: int = Config.TRAIN_DSM_DRAWS) -> Dict[str, torch.Tensor]:
    """
    Loss components of one conversation under a simulated missingness pattern

    Every missing modality contributes `dsm_draws` score-matching draws per stream,
    each row with its own t, averaged over the draws. The reconstruction branch uses one
    t per conversation.

    Returns:
        Dict with tensors "s_theta", "s_phi", "rec" and "pred"
    """
    raw = sample.tensors()
    encoded = model.encoder(raw)
    frozen = encoded.detached()

    features = np.concatenate([frozen.blocks[m].numpy() for m in MODALITIES], axis=0)
    similarity, _ = similarity_adjacency(features, len(MODALITIES), frozen.n, model.window)
    spectra = block_spectra(similarity, MODALITIES, frozen.n)

    zero = torch.zeros((), dtype=torch.float64)
    l_theta, l_phi, l_rec = zero, zero, zero
    t = float(sample_times(1, generator, model.t_eps)[0])

    blocks = {m: encoded.blocks[m] for m in pattern.observed}
    recovered_spectra = {}
    if pattern.missing:
        x_cond = model.feature_condition(frozen, pattern.observed)
        lam_cond = (model.spectrum_condition(spectra, frozen, pattern.observed)
                    if model.spectral_diffusion else None)

    for m in pattern.missing:
        x0 = frozen.blocks[m]
        rows = _repeat_rows(x0, dsm_draws)
        noise = torch.randn(rows.shape, generator=generator, dtype=torch.float64)
        times = sample_times(rows.shape[0], generator, model.t_eps)
        l_theta = l_theta + dsm_loss(model.feature_score(m), model.feature_schedule, rows,
                                     _repeat_rows(x_cond, dsm_draws), times, noise,
                                     t_eps=model.t_eps) / dsm_draws

        noise = torch.randn(x0.shape, generator=generator, dtype=torch.float64)
        x_rec = reconstruction_branch(model, "features", m, encoded.blocks[m], x_cond, t, noise,
                                      generator, reverse_steps)
        l_rec = l_rec + reconstruction_loss(model.feature_decoders[m](x_rec), raw[m])
        blocks[m] = x_rec

        if model.spectral_diffusion:
            lam0 = torch.tensor(spectra[m].eigvals, dtype=torch.float64)
            rows = _repeat_rows(lam0, dsm_draws)
            noise = torch.randn(rows.shape, generator=generator, dtype=torch.float64)
            times = sample_times(dsm_draws, generator, model.t_eps)
            l_phi = l_phi + dsm_loss(model.spectrum_score(m), model.spectrum_schedule, rows,
                                     _repeat_rows(lam_cond, dsm_draws), times, noise,
                                     t_eps=model.t_eps) / dsm_draws

            noise = torch.randn(lam0.shape, generator=generator, dtype=torch.float64)
            lam_rec = reconstruction_branch(model, "spectrum", m, lam0, lam_cond, t, noise,
                                            generator, reverse_steps)
            lam_hat = model.spectrum_decoders[m](lam_rec)
            l_rec = l_rec + reconstruction_loss(lam_hat, lam0)
            recovered_spectra[m] = lam_hat

    if pattern.missing:
        adjacency = assemble_adjacency(blocks, recovered_spectra, window=model.window)
    else:
        adjacency = torch.tensor(similarity, dtype=torch.float64)
    score = model.fuse(EncodedModalities(blocks), adjacency)
    return {"s_theta": l_theta, "s_phi": l_phi, "rec": l_rec, "pred": prediction_loss(score, sample.label)}


def train_batch(model: GsdnetModel, optimizer: torch.optim.Optimizer, batch: Batch,
                generator: torch.Generator, reverse_steps: int = Config.TRAIN_REVERSE_STEPS,
                dsm_draws: int = Config.TRAIN_DSM_DRAWS) -> TrainLosses:
    """
    One optimization step on a minibatch of (conversation, pattern) pairs

    Every sample must carry ground truth for every modality; `pattern.missing` is what
    gets hidden from the conditioning and reconstructed. Loss components are averaged
    over the batch before they are combined.

    Args:
        model: Model to update in place
        optimizer: Optimizer over model.parameters()
        batch: Non-empty sequence of (sample, pattern)
        generator: Source of every t, noise and sampler draw
        reverse_steps: K_rec reverse steps in the reconstruction branch
        dsm_draws: Score-matching draws per missing modality and stream

    Returns:
        TrainLosses of the step

    Raises:
        DataError: Empty batch, a pattern without observed modalities, or missing ground truth
        NumericalError: A non-finite loss component; the model is left untouched
    """
    if not batch:
        raise DataError("Training batch is empty")
    if dsm_draws < 1:
        raise ValueError(f"dsm_draws must be >= 1, got {dsm_draws}")
    for sample, pattern in batch:
        _check_trainable(sample, pattern)

    model.train()
    optimizer.zero_grad(set_to_none=True)

    parts: List[Dict[str, torch.Tensor]] = [
        sample_losses(model, sample, pattern, generator, reverse_steps, dsm_draws)
        for sample, pattern in batch
    ]
    l_theta, l_phi, l_rec, l_pred = (
        torch.stack([part[name] for part in parts]).mean()
        for name in ("s_theta", "s_phi", "rec", "pred")
    )

    l_miss = l_rec + l_theta + l_phi
    l_total = model.beta * l_miss + l_pred
    label = ", ".join(f"sample {s.sample_id} ({p.name})" for s, p in batch)
    _check_finite({"L_s_theta": l_theta, "L_s_phi": l_phi, "L_rec": l_rec,
                   "L_pred": l_pred, "L_total": l_total}, label)

    l_total.backward()
    optimizer.step()
    for _, pattern in batch:
        for m in pattern.missing:
            model.training_counts[m] += 1

    return TrainLosses(s_theta=float(l_theta), s_phi=float(l_phi), rec=float(l_rec),
                       pred=float(l_pred), total=float(l_total),
                       pattern=",".join(p.name for _, p in batch))


def train_step(model: GsdnetModel, optimizer: torch.optim.Optimizer, sample: MultimodalSample,
               pattern: MissingPattern, generator: torch.Generator,
               reverse_steps: int = Config.TRAIN_REVERSE_STEPS,
               dsm_draws: int = Config.TRAIN_DSM_DRAWS) -> TrainLosses:
    """One optimization step on one conversation under a simulated missingness pattern"""
    return train_batch(model, optimizer, [(sample, pattern)], generator, reverse_steps, dsm_draws)


def draw_pattern(generator: torch.Generator) -> MissingPattern:
    """Uniform draw over the seven availability sets, complete case included"""
    patterns = all_patterns()
    return patterns[int(torch.randint(len(patterns), (1,), generator=generator))]


def training_steps(model: GsdnetModel, optimizer: torch.optim.Optimizer,
                   samples: Sequence[MultimodalSample], generator: torch.Generator,
                   start_step: int, end_step: int,
                   reverse_steps: int = Config.TRAIN_REVERSE_STEPS,
                   batch_size: int = Config.TRAIN_BATCH_SIZE,
                   dsm_draws: int = Config.TRAIN_DSM_DRAWS) -> Iterator[Tuple[int, TrainLosses]]:
    """
    Yield (step, losses) for steps start_step + 1 .. end_step

    Each step draws `batch_size` (sample index, pattern) pairs with replacement.
    """
    if not samples:
        raise DataError("Training split is empty")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    for step in range(start_step + 1, end_step + 1):
        batch = []
        for _ in range(batch_size):
            index = int(torch.randint(len(samples), (1,), generator=generator))
            batch.append((samples[index], draw_pattern(generator)))
        yield step, train_batch(model, optimizer, batch, generator, reverse_steps, dsm_draws)
