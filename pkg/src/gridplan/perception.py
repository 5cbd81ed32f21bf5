"""Grayscale frame pre-processing: thresholding, linear prediction, sharpness.

Frames are 2-D float arrays with values in [0, 255]. The linear predictor keeps
the negative-sum convention ``y_hat(n) = -sum_i a_i * y(n - i)``, so its
coefficients are the negated AR coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gridworld import Coord, GridMap

RIDGE_EPS = 1e-8


def as_frame(frame) -> np.ndarray:
    a = np.asarray(frame, dtype=float)
    if a.ndim == 1:
        a = a[np.newaxis, :]
    if a.ndim != 2 or a.size == 0:
        raise ValueError("frame must be a non-empty 2-D array")
    if not np.all(np.isfinite(a)) or a.min() < 0 or a.max() > 255:
        raise ValueError("pixel values must lie in [0, 255]")
    return a


def _check_threshold(threshold: float) -> float:
    if not 0 < threshold < 255:
        raise ValueError(f"threshold must be in (0, 255), got {threshold}")
    return float(threshold)


def binarize(frame, threshold: float) -> np.ndarray:
    """255 where the pixel exceeds ``threshold``, else 0 (ties go to 0)."""
    a = as_frame(frame)
    return np.where(a > _check_threshold(threshold), 255.0, 0.0)


@dataclass(frozen=True)
class QualityReport:
    f_x: float
    f_y: float
    sf: float
    residual_mse: float = 0.0

    def csv_row(self) -> str:
        return ",".join(f"{v:.6g}" for v in (self.f_x, self.f_y, self.sf, self.residual_mse))

    CSV_HEADER = "f_x,f_y,sf,residual_mse"


def spatial_frequency(frame) -> QualityReport:
    """Row/column RMS gradient with the 1/(M*N) normalizer.

    ``f_x`` uses horizontal neighbor differences, ``f_y`` vertical ones. A
    component with no difference pairs (single column or row) is 0.
    """
    a = as_frame(frame)
    m, n = a.shape
    fx = math.sqrt(float(np.sum(np.diff(a, axis=1) ** 2)) / (m * n))
    fy = math.sqrt(float(np.sum(np.diff(a, axis=0) ** 2)) / (m * n))
    return QualityReport(fx, fy, math.hypot(fx, fy))


@dataclass(frozen=True)
class PredictorModel:
    coefficients: np.ndarray
    residual_mse: float = 0.0
    regularized: bool = False

    @property
    def order(self) -> int:
        return len(self.coefficients)


def _lagged(y: np.ndarray, k: int) -> np.ndarray:
    # column i-1 holds -y(n-i) for n = k..len-1
    return -np.column_stack([y[k - i:len(y) - i] for i in range(1, k + 1)])


def fit_predictor(signal, k: int) -> PredictorModel:
    """Least-squares order-``k`` predictor minimizing the mean squared error.

    Rank-deficient normal equations fall back to a ridge solve with
    ``RIDGE_EPS`` and the model is flagged ``regularized``.
    """
    y = np.asarray(signal, dtype=float).ravel()
    if k < 1:
        raise ValueError("order must be >= 1")
    if len(y) <= 2 * k:
        raise ValueError(f"signal length {len(y)} too short for order {k}")
    X = _lagged(y, k)
    target = y[k:]
    gram = X.T @ X
    rhs = X.T @ target
    regularized = np.linalg.matrix_rank(gram) < k
    if regularized:
        coef = np.linalg.solve(gram + RIDGE_EPS * np.eye(k), rhs)
    else:
        coef = np.linalg.lstsq(X, target, rcond=None)[0]
    model = PredictorModel(coef, 0.0, bool(regularized))
    return PredictorModel(coef, residual_score(y, model), bool(regularized))


def predict(signal, model: PredictorModel) -> np.ndarray:
    """One-step predictions for n = k..len-1."""
    y = np.asarray(signal, dtype=float).ravel()
    return _lagged(y, model.order) @ np.asarray(model.coefficients, dtype=float)


def residual_score(signal, model: PredictorModel) -> float:
    y = np.asarray(signal, dtype=float).ravel()
    if len(y) <= model.order:
        raise ValueError("signal shorter than model order")
    e = y[model.order:] - predict(y, model)
    return float(np.mean(e * e))


def quality_report(frame, k: int = 2) -> QualityReport:
    """Spatial frequency plus the predictor residual over the row-major scan."""
    a = as_frame(frame)
    sf = spatial_frequency(a)
    scan = a.ravel()
    mse = fit_predictor(scan, k).residual_mse if len(scan) > 2 * k else 0.0
    return QualityReport(sf.f_x, sf.f_y, sf.sf, mse)


def frame_to_occupancy(frame, threshold: float, cell: int = 1,
                       white_is_obstacle: bool = True) -> np.ndarray:
    """Boolean obstacle matrix: a ``cell``x``cell`` block is blocked when at
    least half of its binarized pixels are occupied."""
    a = as_frame(frame)
    if cell < 1 or a.shape[0] % cell or a.shape[1] % cell:
        raise ValueError(f"frame shape {a.shape} not divisible by cell size {cell}")
    occupied = binarize(a, threshold) == (255.0 if white_is_obstacle else 0.0)
    r, c = a.shape[0] // cell, a.shape[1] // cell
    share = occupied.reshape(r, cell, c, cell).mean(axis=(1, 3))
    return share >= 0.5


def frame_to_grid(frame, threshold: float, cell: int = 1, start=None, target=None,
                  white_is_obstacle: bool = True) -> GridMap:
    """Occupancy grid from a frame; start/target default to the first and last
    free cells in row-major order."""
    blocked = frame_to_occupancy(frame, threshold, cell, white_is_obstacle)
    free = np.argwhere(~blocked)
    if start is None or target is None:
        if len(free) == 0:
            raise ValueError("frame has no free cell for start/target")
        start = Coord(*free[0]) if start is None else start
        target = Coord(*free[-1]) if target is None else target
    return GridMap(blocked, start, target)


# ---------------------------------------------------------------- ASCII PGM (P2)

def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not an ASCII PGM (P2) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
        values = np.array([float(t) for t in tokens[4:]])
    except ValueError:
        raise ValueError("malformed PGM header or pixel data") from None
    if values.size != width * height:
        raise ValueError(f"expected {width * height} pixels, found {values.size}")
    if maxval <= 0:
        raise ValueError("PGM maxval must be positive")
    return as_frame(values.reshape(height, width) * (255.0 / maxval))


def write_pgm(path, frame) -> None:
    a = np.rint(as_frame(frame)).astype(int)
    h, w = a.shape
    lines = ["P2", f"{w} {h}", "255"]
    lines += [" ".join(map(str, row)) for row in a]
    Path(path).write_text("\n".join(lines) + "\n")
