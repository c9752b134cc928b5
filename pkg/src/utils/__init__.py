"""
Utility module for configuration, logging, errors and helper functions
"""
from .config import Config
from .logger import setup_logger
from .errors import (
    GsdnetError,
    ConfigError,
    ShapeError,
    DataError,
    NumericalError,
    ConvergenceError
)
from .run_config import RunConfig
from .helpers import (
    canonical_json,
    content_hash,
    arrays_hash,
    save_json,
    load_json,
    format_file_size
)

__all__ = [
    # Configuration
    'Config',
    'RunConfig',

    # Logging
    'setup_logger',

    # Errors
    'GsdnetError',
    'ConfigError',
    'ShapeError',
    'DataError',
    'NumericalError',
    'ConvergenceError',

    # Helper functions
    'canonical_json',
    'content_hash',
    'arrays_hash',
    'save_json',
    'load_json',
    'format_file_size'
]
