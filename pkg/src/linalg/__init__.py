"""
Dense symmetric linear algebra: eigendecomposition, spectral reconstruction, norms
"""
from .symmetric import (
    SymmetricMatrix,
    SpectralDecomposition,
    as_symmetric,
    eigh,
    reconstruct,
    frobenius_distance,
    subspace_alignment
)
from .matrix_io import (
    save_matrix_binary,
    load_matrix_binary,
    save_matrix_csv,
    load_matrix_csv
)

__all__ = [
    # Types
    'SymmetricMatrix',
    'SpectralDecomposition',

    # Operations
    'as_symmetric',
    'eigh',
    'reconstruct',
    'frobenius_distance',
    'subspace_alignment',

    # Serialization
    'save_matrix_binary',
    'load_matrix_binary',
    'save_matrix_csv',
    'load_matrix_csv'
]
