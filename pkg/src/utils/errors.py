"""
Exception types shared across the toolkit
"""


class GsdnetError(Exception):
    """Base class for every error raised by the toolkit"""


class ConfigError(GsdnetError):
    """Invalid or unknown configuration, or a checkpoint/dataset manifest mismatch"""


class ShapeError(GsdnetError, ValueError):
    """Operands with incompatible shapes"""


class DataError(GsdnetError, ValueError):
    """Invalid dataset, split ratios, missing patterns or missing rates"""


class NumericalError(GsdnetError):
    """Non-finite values, degenerate kernels or an unusable (untrained) model"""


class ConvergenceError(NumericalError):
    """Iterative solver hit its iteration cap"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual off-diagonal norm {residual:.3e})")
        self.residual = residual
