"""
GSDNet toolkit - graph spectral diffusion for missing-modality recovery
"""
from . import utils
from . import linalg
from . import diffusion
from . import score
from . import gsdnet
from . import harness

__version__ = "0.1.0"

__all__ = [
    'utils',
    'linalg',
    'diffusion',
    'score',
    'gsdnet',
    'harness'
]
