"""
Matrix containers: row-major binary (.npy) and CSV, both with an explicit shape header
"""
from pathlib import Path

import numpy as np

from src.utils.errors import ShapeError
from src.utils.logger import setup_logger
from .symmetric import ArrayLike

logger = setup_logger()

CSV_HEADER_PREFIX = "# shape:"


def save_matrix_binary(matrix: ArrayLike, file_path: Path) -> Path:
    """Write a matrix as a C-ordered float64 .npy file (shape lives in the .npy header)"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    array = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    np.save(file_path, array, allow_pickle=False)
    return file_path


def load_matrix_binary(file_path: Path) -> np.ndarray:
    array = np.load(Path(file_path), allow_pickle=False)
    if array.ndim != 2:
        raise ShapeError(f"{file_path} does not hold a matrix (ndim={array.ndim})")
    return array


def save_matrix_csv(matrix: ArrayLike, file_path: Path) -> Path:
    """Write a matrix as CSV; the first line is '# shape: rows,cols'"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    array = np.asarray(matrix, dtype=np.float64)
    if array.ndim != 2:
        raise ShapeError(f"Expected a matrix, got ndim={array.ndim}")
    header = f"shape: {array.shape[0]},{array.shape[1]}"
    np.savetxt(file_path, array, delimiter=",", fmt="%.17g", header=header, comments="# ")
    return file_path


def load_matrix_csv(file_path: Path) -> np.ndarray:
    file_path = Path(file_path)
    with open(file_path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    if not first.startswith(CSV_HEADER_PREFIX):
        raise ShapeError(f"{file_path} is missing the '{CSV_HEADER_PREFIX}' header")
    rows, cols = (int(x) for x in first[len(CSV_HEADER_PREFIX):].split(","))

    array = np.loadtxt(file_path, delimiter=",", comments="#", ndmin=2)
    if rows == 0 or cols == 0:
        array = array.reshape(rows, cols)
    if array.shape != (rows, cols):
        raise ShapeError(f"{file_path}: header says {(rows, cols)}, body has {array.shape}")
    return array
