"""
Centralized default configuration for the GSDNet toolkit
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load the declared GSDNET_* variables from a local .env, if any
load_dotenv()


class Config:
    """Application defaults. Per-run values live in RunConfig and fall back to these."""

    # Project paths
    BASE_DIR = Path(__file__).parent.parent.parent
    RUNS_DIR = BASE_DIR / "runs"

    # Logging (the only environment variable the toolkit reads)
    LOG_LEVEL = os.getenv("GSDNET_LOG_LEVEL", "INFO")

    # Numerics
    JACOBI_MAX_SWEEPS = 100
    JACOBI_TOL = 1e-12

    # Diffusion schedules (VP linear beta, VE geometric sigma)
    SCHEDULE_KIND = "vp"
    BETA_MIN = 0.1
    BETA_MAX = 20.0
    SIGMA_MIN = 0.01
    SIGMA_MAX = 10.0
    T_EPS = 1e-3

    # Sampler
    RECOVERY_STEPS = 200
    TRAIN_REVERSE_STEPS = 5        # K_rec inside train_step
    TRAIN_DSM_DRAWS = 8            # score-matching draws per missing modality
    RECOVERY_DRAWS = 1             # reverse chains averaged per recovered modality
    CORRECTOR_STEPS = 0
    CORRECTOR_SNR = 0.16
    CORRECTOR_STEP_FLOOR = 1e-5

    # Score networks
    TIME_EMBED_DIM = 16
    SCORE_HIDDEN_DIMS = [128, 128]
    SCORE_ACTIVATION = "tanh"

    # GSDNet
    MODALITIES = ("t", "a", "v")
    COMMON_DIM = 32                # d
    KERNEL_SIZES = {"t": 3, "a": 3, "v": 3}
    GRAPH_WINDOW = 2
    GCN_LAYERS = 2
    DECODER_HIDDEN = 64
    BETA_LOSS = 0.1

    # Optimizer (Adam)
    LEARNING_RATE = 1e-3
    ADAM_BETAS = (0.9, 0.999)
    ADAM_EPS = 1e-8

    # Synthetic data
    N_CONVERSATIONS = 300
    N_UTTERANCES = 6
    RAW_DIMS = {"t": 16, "a": 12, "v": 10}
    CROSS_MODAL_NOISE = 0.1        # eta
    SPLIT_RATIOS = (0.70, 0.15, 0.15)

    # Training loop
    TRAIN_STEPS = 2000
    TRAIN_BATCH_SIZE = 4
    CHECKPOINT_EVERY = 500

    # Missing-rate sweep
    MISSING_RATES = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
    MAX_MISSING_RATE = 0.7

    @classmethod
    def validate(cls):
        """Validate default configuration"""
        if not cls.BETA_MIN < cls.BETA_MAX:
            raise ValueError("BETA_MIN must be smaller than BETA_MAX")
        if not 0 < cls.SIGMA_MIN < cls.SIGMA_MAX:
            raise ValueError("SIGMA_MIN must be positive and smaller than SIGMA_MAX")
        if abs(sum(cls.SPLIT_RATIOS) - 1.0) > 1e-12:
            raise ValueError("SPLIT_RATIOS must sum to 1")
        if cls.TIME_EMBED_DIM % 2:
            raise ValueError("TIME_EMBED_DIM must be even")
        if set(cls.KERNEL_SIZES) != set(cls.MODALITIES) or set(cls.RAW_DIMS) != set(cls.MODALITIES):
            raise ValueError("KERNEL_SIZES and RAW_DIMS must cover every modality")
        return True


# Validate on import
Config.validate()
