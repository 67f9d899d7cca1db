"""Synthetic ground truth with known kernel-norm budget.

Benchmarks need functions whose kernel norm is known exactly, because
the optimizer's guarantees are stated relative to that norm.  A random
kernel expansion ``f(a) = sum_j c_j k(a, x_j)`` has squared norm
``c' K c`` over its centers, so rescaling the coefficients pins the norm
to one.  Constraints are built by shifting such a function so that a
chosen share of the grid stays nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Domain
from .kernels import Kernel, gram, pairwise

__all__ = [
    "RkhsFunction",
    "ShiftedFunction",
    "nearest_rank_quantile",
    "sample_rkhs_function",
    "shift_to_quantile",
]

_NORM_TOL = 1e-10
_MAX_RESAMPLE = 32


@dataclass(frozen=True)
class RkhsFunction:
    """Kernel expansion ``sum_j coefficients[j] * k(a, centers[j])``."""

    kernel: Kernel
    centers: np.ndarray
    coefficients: np.ndarray
    rkhs_norm: float

    def __call__(self, points: np.ndarray) -> np.ndarray | float:
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        values = pairwise(self.kernel, np.atleast_2d(points), self.centers) @ self.coefficients
        return float(values[0]) if single else values

    def to_config(self) -> dict:
        return {
            "kernel": self.kernel.to_config(),
            "centers": self.centers.tolist(),
            "coefficients": self.coefficients.tolist(),
            "rkhs_norm": self.rkhs_norm,
        }

    @classmethod
    def from_config(cls, config: dict) -> "RkhsFunction":
        return cls(
            kernel=Kernel.from_config(config["kernel"]),
            centers=np.asarray(config["centers"], dtype=float),
            coefficients=np.asarray(config["coefficients"], dtype=float),
            rkhs_norm=float(config["rkhs_norm"]),
        )


@dataclass(frozen=True)
class ShiftedFunction:
    """A base function minus a constant threshold."""

    base: RkhsFunction
    offset: float

    def __call__(self, points: np.ndarray) -> np.ndarray | float:
        return self.base(points) - self.offset

    def to_config(self) -> dict:
        return {"base": self.base.to_config(), "offset": self.offset}

    @classmethod
    def from_config(cls, config: dict) -> "ShiftedFunction":
        return cls(RkhsFunction.from_config(config["base"]), float(config["offset"]))


def sample_rkhs_function(
    kernel: Kernel, domain: Domain, n_centers: int, rng: np.random.Generator
) -> RkhsFunction:
    """Random unit-norm kernel expansion over the domain's box.

    Centers are uniform in the box and coefficients standard normal,
    then rescaled so the squared norm ``c' K c`` equals one.  Degenerate
    draws (duplicate centers, numerically singular center matrix) are
    resampled.
    """
    if n_centers < 1:
        raise ValueError("need at least one center")
    lows = np.array([b[0] for b in domain.bounds])
    highs = np.array([b[1] for b in domain.bounds])

    for _ in range(_MAX_RESAMPLE):
        centers = rng.uniform(lows, highs, size=(n_centers, domain.dim))
        if np.unique(centers, axis=0).shape[0] != n_centers:
            continue
        coefficients = rng.standard_normal(n_centers)
        center_gram = gram(kernel, centers)
        sq_norm = float(coefficients @ center_gram @ coefficients)
        if not sq_norm > 0:
            continue
        try:
            np.linalg.cholesky(
                center_gram + 1e-10 * kernel.output_scale * np.eye(n_centers)
            )
        except np.linalg.LinAlgError:
            continue
        coefficients = coefficients / math.sqrt(sq_norm)
        norm = math.sqrt(float(coefficients @ center_gram @ coefficients))
        return RkhsFunction(
            kernel=kernel, centers=centers, coefficients=coefficients, rkhs_norm=norm
        )
    raise RuntimeError("could not sample a non-degenerate center set")


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """Quantile without interpolation: exactly ``ceil((1-q)*n)`` values
    are greater than or equal to the result (up to ties)."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    ordered = np.sort(np.asarray(values, dtype=float))
    n = ordered.shape[0]
    keep = math.ceil((1.0 - q) * n)
    return float(ordered[n - keep])


def shift_to_quantile(f: RkhsFunction, domain: Domain, q: float) -> ShiftedFunction:
    """Shift ``f`` down so its level-``q`` grid quantile sits at zero.

    The shifted function is nonnegative on the top ``1 - q`` share of
    grid points and keeps the argmax of ``f`` (a constant shift).
    """
    threshold = nearest_rank_quantile(f(domain.points), q)
    return ShiftedFunction(base=f, offset=threshold)
