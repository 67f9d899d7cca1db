"""Stationary covariance kernels, the induced metric, and Gram matrices.

Everything else in this package measures similarity between candidate
parameters through one of these kernels.  The kernel also induces a
metric, ``d(a, b) = sqrt(2 * (k(a, a) - k(a, b)))``, which converts a
bound on a function's kernel norm into a bound on how much the function
can change between two points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "FAMILIES",
    "Kernel",
    "evaluate",
    "gram",
    "kernel_metric",
    "metric_matrix",
    "pairwise",
]

FAMILIES = ("matern32", "squared_exponential")

_SQRT3 = float(np.sqrt(3.0))

# Radicand slack tolerated before kernel_metric reports a broken kernel.
_METRIC_TOL = 1e-12


@dataclass(frozen=True)
class Kernel:
    """Stationary kernel with constant diagonal ``k(a, a) = output_scale``.

    Parameters
    ----------
    family : str
        ``"matern32"`` (default) or ``"squared_exponential"``.
    lengthscale : float
        Positive correlation length.
    output_scale : float
        Positive variance scale, the value of ``k(a, a)``.
    """

    family: str = "matern32"
    lengthscale: float = 0.1
    output_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.lengthscale > 0.0:
            raise ValueError("lengthscale must be positive")
        if not self.output_scale > 0.0:
            raise ValueError("output_scale must be positive")

    def profile(self, dists: np.ndarray) -> np.ndarray:
        """Kernel value as a function of Euclidean distance."""
        r = np.asarray(dists, dtype=float) / self.lengthscale
        if self.family == "matern32":
            return self.output_scale * (1.0 + _SQRT3 * r) * np.exp(-_SQRT3 * r)
        return self.output_scale * np.exp(-0.5 * r * r)

    def to_config(self) -> dict:
        return {
            "family": self.family,
            "lengthscale": self.lengthscale,
            "output_scale": self.output_scale,
        }

    @classmethod
    def from_config(cls, config: dict) -> "Kernel":
        return cls(
            family=config.get("family", "matern32"),
            lengthscale=float(config.get("lengthscale", 0.1)),
            output_scale=float(config.get("output_scale", 1.0)),
        )


def _as_points(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError("points must be vectors or (n, d) arrays")
    return x


def evaluate(kernel: Kernel, a: np.ndarray, b: np.ndarray) -> float:
    """Kernel value ``k(a, b)`` for a single pair of points."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(kernel.profile(np.linalg.norm(a - b)))


def pairwise(kernel: Kernel, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix between the rows of ``x`` and ``y`` (``x`` itself if omitted)."""
    x = _as_points(x)
    y = x if y is None else _as_points(y)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return kernel.profile(cdist(x, y))


def gram(kernel: Kernel, points: np.ndarray) -> np.ndarray:
    """Symmetric kernel matrix of a point list.

    The result is returned exactly as evaluated; stabilizing jitter is
    the business of factorization routines, not of the covariance itself.
    """
    points = _as_points(points)
    if points.shape[0] == 0:
        raise ValueError("point list must be non-empty")
    k = pairwise(kernel, points)
    # cdist can leave asymmetry at the last ulp; symmetrize so downstream
    # factorizations see an exactly symmetric matrix.
    return 0.5 * (k + k.T)


def kernel_metric(kernel: Kernel, a: np.ndarray, b: np.ndarray) -> float:
    """Distance ``sqrt(2 * (k(a, a) - k(a, b)))`` induced by the kernel.

    Raises
    ------
    ValueError
        If ``k(a, b)`` exceeds ``k(a, a)`` by more than roundoff, which
        means the kernel configuration is invalid for a metric.
    """
    radicand = 2.0 * (kernel.output_scale - evaluate(kernel, a, b))
    if radicand < -_METRIC_TOL * kernel.output_scale:
        raise ValueError("kernel metric radicand is negative; invalid kernel")
    return float(np.sqrt(max(radicand, 0.0)))


def metric_matrix(kernel: Kernel, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise kernel metric between rows of ``x`` and ``y``."""
    values = pairwise(kernel, x, y)
    radicand = 2.0 * (kernel.output_scale - values)
    if radicand.min() < -_METRIC_TOL * kernel.output_scale:
        raise ValueError("kernel metric radicand is negative; invalid kernel")
    return np.sqrt(np.maximum(radicand, 0.0))
