"""Regularized Gaussian-process surrogate shared across several outputs.

All outputs are modeled with the same kernel and the same evaluation
inputs, so they share one Gram matrix, one Cholesky factor, and one
posterior standard deviation; only the posterior means differ.  Models
are persistent: appending an observation returns a new model and leaves
the old one untouched, so snapshots can be queried concurrently.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .kernels import Kernel, pairwise

__all__ = ["SurrogateModel"]

# Full refactorization cadence for the incrementally updated Cholesky
# factor, bounding accumulated drift on long runs.
_REFACTOR_EVERY = 64

# Dense eigensolver is deterministic and cheap up to this history size;
# beyond it, power iteration takes over.
_DENSE_EIG_MAX = 256

_POWER_MAX_ITERATIONS = 10_000
_POWER_RTOL = 1e-12


class SurrogateModel:
    """GP posterior state over ``n_outputs`` functions with shared variance.

    Parameters
    ----------
    kernel : Kernel
        Covariance shared by every output.
    regularization : float
        Diagonal regularizer of the Gram matrix, in ``(0, 1]``.
    n_outputs : int
        Number of modeled functions.
    inputs, targets : ndarray, optional
        Existing history: ``inputs`` is ``(t, d)``, ``targets`` is
        ``(n_outputs, t)``.  Omit both for an empty model.
    """

    def __init__(
        self,
        kernel: Kernel,
        regularization: float,
        n_outputs: int,
        inputs: np.ndarray | None = None,
        targets: np.ndarray | None = None,
        _gram: np.ndarray | None = None,
        _chol: np.ndarray | None = None,
        _appends: int = 0,
    ):
        if not 0.0 < regularization <= 1.0:
            raise ValueError("regularization must lie in (0, 1]")
        if n_outputs < 1:
            raise ValueError("need at least one output")
        self.kernel = kernel
        self.regularization = float(regularization)
        self.n_outputs = int(n_outputs)

        if inputs is None:
            inputs = np.zeros((0, 0))
            targets = np.zeros((n_outputs, 0))
        inputs = np.asarray(inputs, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if targets.shape != (self.n_outputs, inputs.shape[0]):
            raise ValueError("targets must have shape (n_outputs, n_inputs)")
        if targets.size and not np.all(np.isfinite(targets)):
            raise ValueError("targets must be finite")
        self.inputs = inputs
        self.targets = targets

        if self.t == 0:
            self._gram = np.zeros((0, 0))
            self._chol = np.zeros((0, 0))
            self._appends = 0
        else:
            self._gram = pairwise(kernel, inputs) if _gram is None else _gram
            if _chol is None:
                self._chol = self._factorize(self._gram)
                self._appends = 0
            else:
                self._chol = _chol
                self._appends = _appends

    @property
    def t(self) -> int:
        """Number of stored observations."""
        return self.inputs.shape[0]

    def _factorize(self, gram: np.ndarray) -> np.ndarray:
        shifted = gram + self.regularization * np.eye(gram.shape[0])
        return cholesky(shifted, lower=True)

    def with_observation(self, point: np.ndarray, values: np.ndarray) -> "SurrogateModel":
        """New model with one more evaluation appended.

        ``values`` holds one observation per output.  The cached Cholesky
        factor is extended by a rank-1 border; a full refactorization runs
        every 64 appends to bound numerical drift.
        """
        point = np.asarray(point, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (self.n_outputs,):
            raise ValueError("one observed value per output required")
        if not np.all(np.isfinite(values)):
            raise ValueError("targets must be finite")

        if self.t == 0:
            inputs = point[None, :]
            targets = values[:, None]
            return SurrogateModel(
                self.kernel, self.regularization, self.n_outputs, inputs, targets
            )

        if point.shape[0] != self.inputs.shape[1]:
            raise ValueError("point dimension does not match history")
        inputs = np.vstack([self.inputs, point[None, :]])
        targets = np.hstack([self.targets, values[:, None]])

        cross = pairwise(self.kernel, self.inputs, point[None, :])[:, 0]
        diag = float(self.kernel.output_scale)
        gram = np.zeros((self.t + 1, self.t + 1))
        gram[: self.t, : self.t] = self._gram
        gram[: self.t, self.t] = cross
        gram[self.t, : self.t] = cross
        gram[self.t, self.t] = diag

        appends = self._appends + 1
        if appends >= _REFACTOR_EVERY:
            chol = None
            appends = 0
        else:
            w = solve_triangular(self._chol, cross, lower=True)
            # The bordered pivot equals posterior variance plus the
            # regularizer, so it stays strictly positive.
            pivot = diag + self.regularization - float(w @ w)
            chol = np.zeros((self.t + 1, self.t + 1))
            chol[: self.t, : self.t] = self._chol
            chol[self.t, : self.t] = w
            chol[self.t, self.t] = np.sqrt(max(pivot, self.regularization * 1e-12))

        return SurrogateModel(
            self.kernel,
            self.regularization,
            self.n_outputs,
            inputs,
            targets,
            _gram=gram,
            _chol=chol,
            _appends=appends,
        )

    def posterior(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means and shared standard deviation at query points.

        For a ``(m, d)`` query array, returns ``(means, std)`` with shapes
        ``(n_outputs, m)`` and ``(m,)``.  A single point returns the
        ``(n_outputs,)`` mean vector and a scalar.  With no observations
        the prior is returned: zero mean and ``sqrt(k(a, a))``.
        """
        queries = np.asarray(queries, dtype=float)
        single = queries.ndim == 1
        if single:
            queries = queries[None, :]
        m = queries.shape[0]

        prior_var = float(self.kernel.output_scale)
        if self.t == 0:
            means = np.zeros((self.n_outputs, m))
            std = np.full(m, np.sqrt(prior_var))
        else:
            cross = pairwise(self.kernel, self.inputs, queries)  # (t, m)
            alpha = cho_solve((self._chol, True), self.targets.T)  # (t, n_outputs)
            means = alpha.T @ cross  # (n_outputs, m)
            half = solve_triangular(self._chol, cross, lower=True)  # (t, m)
            var = prior_var - np.einsum("ij,ij->j", half, half)
            std = np.sqrt(np.maximum(var, 0.0))
        if single:
            return means[:, 0], float(std[0])
        return means, std

    def xi_lambda_max(self) -> float:
        """Largest eigenvalue of ``K (K + reg I)^{-1}``.

        Computed through the closed form ``lam / (lam + reg)`` where
        ``lam`` is the top eigenvalue of the Gram matrix; both matrices
        share eigenvectors, so the spectra map through that scalar
        function.  Returns 0 with an empty history.
        """
        if self.t == 0:
            return 0.0
        lam = self._gram_lambda_max()
        return lam / (lam + self.regularization)

    def _gram_lambda_max(self) -> float:
        if self.t <= _DENSE_EIG_MAX:
            return float(np.linalg.eigvalsh(self._gram)[-1])
        return _power_iteration(self._gram)

    def log_det_information_gain(self) -> float:
        """Half log-determinant of ``I + K / reg``, zero on empty history."""
        if self.t == 0:
            return 0.0
        # log det(K + reg I) through the cached factor, then rescale.
        log_det = 2.0 * float(np.sum(np.log(np.diag(self._chol))))
        return 0.5 * (log_det - self.t * np.log(self.regularization))


def _power_iteration(matrix: np.ndarray) -> float:
    """Top eigenvalue of a symmetric PSD matrix, deterministic all-ones seed."""
    n = matrix.shape[0]
    vec = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(_POWER_MAX_ITERATIONS):
        nxt = matrix @ vec
        norm = float(np.linalg.norm(nxt))
        if norm == 0.0:
            return 0.0
        vec = nxt / norm
        new_lam = float(vec @ (matrix @ vec))
        if abs(new_lam - lam) <= _POWER_RTOL * max(abs(new_lam), 1e-300):
            return new_lam
        lam = new_lam
    raise RuntimeError(
        f"power iteration did not converge within {_POWER_MAX_ITERATIONS} iterations"
    )
