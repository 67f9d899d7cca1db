"""Safe exploration loop on a finite grid.

A run maintains, per candidate point, intersected confidence intervals
for the reward (output 0) and every constraint.  From those it derives:

* the safe set: points certified nonnegative for all constraints by a
  lower bound at an already-safe point minus the kernel-metric margin;
* the maximizer set: safe points whose reward upper bound still reaches
  the best safe reward lower bound;
* the expander set: safe points whose optimistic constraint value could
  certify at least one point outside the safe set.

Each iteration evaluates the most uncertain point among maximizers and
expanders, stopping once that uncertainty falls below the exploration
threshold.  Experiments are only ever run inside the safe set.

Two safety-multiplier modes are available: scenario bounds accumulated
from the noise model (works for any samplable noise), and the classic
multiplier for homoscedastic sub-Gaussian noise, kept for comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .confidence import ConfidenceState, beta_from_squares, update_intervals
from .domain import Domain
from .gp import SurrogateModel
from .kernels import Kernel, metric_matrix
from .noise import NoiseModel, ScenarioSchedule, scenario_bound

__all__ = [
    "EmptyAcquisitionSet",
    "OptimizerConfig",
    "OptimizerState",
    "SafeOptimizer",
    "StepRecord",
    "acquire",
    "classic_beta",
    "expanders",
    "maximizers",
    "reachable_set",
    "safe_set",
]


class EmptyAcquisitionSet(RuntimeError):
    """Raised when neither maximizers nor expanders offer a candidate."""


def safe_set(
    lower: np.ndarray,
    bounded: np.ndarray,
    previous: np.ndarray,
    norm_bounds: np.ndarray,
    metric: np.ndarray,
    constraints: tuple[int, ...],
) -> np.ndarray:
    """Points certified safe from the previous safe set, union the previous set.

    A point survives constraint ``i`` when some previously safe point has
    a lower bound large enough to cover the metric distance between them.
    The previous safe set is always kept: certification can lag behind
    while lower bounds are still loose, and exploration must never lose
    its anchor.
    """
    previous = np.asarray(previous, dtype=bool)
    if not previous.any():
        raise ValueError("previous safe set must be non-empty")
    certified = np.ones(previous.shape[0], dtype=bool)
    for i in constraints:
        anchors = previous & bounded[i]
        if not anchors.any():
            certified[:] = False
            break
        margin = lower[i][anchors, None] - norm_bounds[i] * metric[anchors, :]
        certified &= (margin >= 0.0).any(axis=0)
    return certified | previous


def maximizers(
    upper: np.ndarray,
    lower: np.ndarray,
    bounded: np.ndarray,
    safe: np.ndarray,
) -> np.ndarray:
    """Safe points whose reward upper bound reaches the best safe lower bound.

    Points with a still-unbounded upper interval qualify regardless of
    the threshold, and points with unbounded lower intervals contribute
    nothing to it.
    """
    safe = np.asarray(safe, dtype=bool)
    anchored = safe & bounded[0]
    threshold = lower[0][anchored].max() if anchored.any() else -math.inf
    reaches = np.where(bounded[0], upper[0] >= threshold, True)
    return safe & reaches


def expanders(
    upper: np.ndarray,
    bounded: np.ndarray,
    safe: np.ndarray,
    norm_bounds: np.ndarray,
    metric: np.ndarray,
    constraints: tuple[int, ...],
) -> tuple[np.ndarray, np.ndarray]:
    """Safe points that could certify something outside the safe set.

    Returns the expander mask together with, per point, the number of
    outside points optimistically reachable under at least one
    constraint.  An unbounded upper interval reaches everything.
    """
    safe = np.asarray(safe, dtype=bool)
    n = safe.shape[0]
    counts = np.zeros(n, dtype=int)
    outside = ~safe
    n_outside = int(outside.sum())
    if n_outside == 0 or not safe.any():
        return np.zeros(n, dtype=bool), counts

    reach_any = np.zeros((int(safe.sum()), n_outside), dtype=bool)
    for i in constraints:
        optimistic = upper[i][safe, None] - norm_bounds[i] * metric[np.ix_(safe, outside)]
        reach_i = optimistic >= 0.0
        reach_i |= ~bounded[i][safe, None]
        reach_any |= reach_i
    counts[safe] = reach_any.sum(axis=1)
    return counts > 0, counts


def acquire(widths: np.ndarray, std: np.ndarray, candidates: np.ndarray) -> int:
    """Most uncertain candidate: largest width over outputs.

    Ties break deterministically: unbounded widths first, then larger
    posterior standard deviation, then the lowest grid index.
    """
    candidates = np.asarray(candidates, dtype=bool)
    if not candidates.any():
        raise EmptyAcquisitionSet("no maximizer or expander candidates")
    worst = widths.max(axis=0)
    indices = np.flatnonzero(candidates)
    scores = worst[indices]
    if np.isinf(scores).any():
        pool = indices[np.isinf(scores)]
    else:
        pool = indices[scores == scores.max()]
    if pool.shape[0] > 1:
        pool = pool[std[pool] == std[pool].max()]
    return int(pool[0])


def classic_beta(
    norm_bound: float, noise_scale: float, info_gain: float, violation_prob: float
) -> float:
    """Safety multiplier for homoscedastic sub-Gaussian noise.

    ``norm_bound + noise_scale * sqrt(2 * (info_gain + 1 + log(1 / p)))``
    with the half log-determinant information gain of the current Gram
    matrix.  Used only as the comparison baseline.
    """
    if noise_scale < 0:
        raise ValueError("noise scale must be nonnegative")
    return norm_bound + noise_scale * math.sqrt(
        2.0 * (info_gain + 1.0 + math.log(1.0 / violation_prob))
    )


def reachable_set(
    constraint_values: np.ndarray,
    norm_bounds: np.ndarray,
    metric: np.ndarray,
    margin: float,
    seed: np.ndarray,
) -> np.ndarray:
    """Fixpoint of margin-``delta`` expansion under the true constraints.

    Only computable for synthetic benchmarks, where the ground-truth
    constraint values are available on the whole grid.  Serves as a
    diagnostic ceiling on what safe exploration could ever certify.
    """
    constraint_values = np.atleast_2d(np.asarray(constraint_values, dtype=float))
    current = np.asarray(seed, dtype=bool).copy()
    if not current.any():
        raise ValueError("seed set must be non-empty")
    while True:
        certified = np.ones(current.shape[0], dtype=bool)
        for ci in range(constraint_values.shape[0]):
            values = constraint_values[ci][current, None]
            cover = values - margin - norm_bounds[ci] * metric[current, :]
            certified &= (cover >= 0.0).any(axis=0)
        grown = current | certified
        if np.array_equal(grown, current):
            return current
        current = grown


@dataclass(frozen=True)
class OptimizerConfig:
    """Everything a run needs besides the kernel, the grid, and the noise.

    ``norm_bounds`` gives the kernel-norm budget per output (reward
    first).  ``constraint_indices`` names the outputs that must stay
    nonnegative; with a single output the reward constrains itself.
    ``beta_mode`` selects between ``"scenario"`` and
    ``"classic_subgaussian"`` safety multipliers, the latter using
    ``subgaussian_scale``.
    """

    norm_bounds: tuple[float, ...]
    regularization: float
    exploration_threshold: float
    schedule: ScenarioSchedule
    max_iterations: int
    initial_safe: tuple[int, ...]
    beta_mode: str = "scenario"
    subgaussian_scale: float = 0.0
    constraint_indices: tuple[int, ...] | None = None
    on_collapse: str = "error"

    def __post_init__(self) -> None:
        if len(self.initial_safe) == 0:
            raise ValueError("initial safe set must be non-empty")
        if not self.exploration_threshold > 0:
            raise ValueError("exploration threshold must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.beta_mode not in ("scenario", "classic_subgaussian"):
            raise ValueError(f"unknown beta mode {self.beta_mode!r}")
        n = len(self.norm_bounds)
        if self.schedule.n_outputs != n:
            raise ValueError("schedule output count must match norm bounds")
        constraints = self.constraint_indices
        if constraints is None:
            constraints = (0,) if n == 1 else tuple(range(1, n))
        constraints = tuple(int(i) for i in constraints)
        if not constraints or any(i < 0 or i >= n for i in constraints):
            raise ValueError("constraint indices must name existing outputs")
        object.__setattr__(self, "constraint_indices", constraints)
        object.__setattr__(self, "norm_bounds", tuple(float(b) for b in self.norm_bounds))

    @property
    def n_outputs(self) -> int:
        return len(self.norm_bounds)


@dataclass(frozen=True)
class StepRecord:
    """One executed experiment."""

    iteration: int
    point_index: int
    point: tuple[float, ...]
    observed: tuple[float, ...]
    true_values: tuple[float, ...]
    noise_bound: tuple[float, ...]
    n_scenarios: int
    betas: tuple[float, ...]
    safe_size: int
    acquisition_width: float
    best_index: int
    best_lower: float


@dataclass(frozen=True)
class OptimizerState:
    """Snapshot after an iteration; never mutated in place."""

    model: SurrogateModel
    confidence: ConfidenceState
    safe: np.ndarray
    maximizer_set: np.ndarray
    expander_set: np.ndarray
    expander_counts: np.ndarray
    means: np.ndarray
    std: np.ndarray
    betas: np.ndarray
    xi_lambda: float
    noise_sq_sums: np.ndarray
    records: tuple[StepRecord, ...] = ()
    terminated: bool = False
    termination_reason: str | None = None
    proposed_index: int | None = None

    @property
    def iterations_run(self) -> int:
        return len(self.records)


class SafeOptimizer:
    """Driver binding a kernel, a grid, and a configuration to the loop."""

    def __init__(self, kernel: Kernel, domain: Domain, config: OptimizerConfig):
        self.kernel = kernel
        self.domain = domain
        self.config = config
        if any(i < 0 or i >= domain.n_points for i in config.initial_safe):
            raise ValueError("initial safe indices outside the grid")
        self.metric = metric_matrix(kernel, domain.points)
        self._norms = np.asarray(config.norm_bounds, dtype=float)

    def initial_state(self) -> OptimizerState:
        n = self.domain.n_points
        k = self.config.n_outputs
        safe = np.zeros(n, dtype=bool)
        safe[list(self.config.initial_safe)] = True
        return OptimizerState(
            model=SurrogateModel(self.kernel, self.config.regularization, k),
            confidence=ConfidenceState.unbounded(k, n),
            safe=safe,
            maximizer_set=np.zeros(n, dtype=bool),
            expander_set=np.zeros(n, dtype=bool),
            expander_counts=np.zeros(n, dtype=int),
            means=np.zeros((k, n)),
            std=np.full(n, float(np.sqrt(self.kernel.output_scale))),
            betas=np.zeros(k),
            xi_lambda=0.0,
            noise_sq_sums=np.zeros(k),
        )

    def _beta_vector(self, state: OptimizerState, xi_lambda: float) -> np.ndarray:
        cfg = self.config
        if cfg.beta_mode == "scenario":
            return np.array(
                [
                    beta_from_squares(
                        self._norms[i],
                        cfg.regularization,
                        xi_lambda,
                        float(state.noise_sq_sums[i]),
                    )
                    for i in range(cfg.n_outputs)
                ]
            )
        info_gain = state.model.log_det_information_gain()
        return np.array(
            [
                classic_beta(
                    self._norms[i],
                    cfg.subgaussian_scale,
                    info_gain,
                    cfg.schedule.violation_prob,
                )
                for i in range(cfg.n_outputs)
            ]
        )

    def step(
        self,
        state: OptimizerState,
        oracle,
        noise_model: NoiseModel,
        rng: np.random.Generator,
    ) -> OptimizerState:
        """Run one loop body and return the successor state.

        ``oracle`` maps a parameter vector to the vector of true output
        values; observation noise is drawn here, so the oracle stays
        deterministic.  The successor either carries one more experiment
        or a termination flag; terminated states pass through unchanged.
        """
        if state.terminated:
            return state
        cfg = self.config

        means, std = state.model.posterior(self.domain.points)
        # The top Gram eigenvalue only grows as evaluations accumulate;
        # keeping the running max shields against eigensolver jitter.
        xi_lambda = max(state.xi_lambda, state.model.xi_lambda_max())
        betas = self._beta_vector(state, xi_lambda)
        conf = update_intervals(
            state.confidence, means, std, betas, on_collapse=cfg.on_collapse
        )

        first = state.model.t == 0 and not state.records
        if first:
            safe = state.safe.copy()
        else:
            safe = safe_set(
                conf.lower,
                conf.bounded,
                state.safe,
                self._norms,
                self.metric,
                cfg.constraint_indices,
            )
        maxim = maximizers(conf.upper, conf.lower, conf.bounded, safe)
        expand, counts = expanders(
            conf.upper, conf.bounded, safe, self._norms, self.metric, cfg.constraint_indices
        )

        state = replace(
            state,
            confidence=conf,
            safe=safe,
            maximizer_set=maxim,
            expander_set=expand,
            expander_counts=counts,
            means=means,
            std=std,
            betas=betas,
            xi_lambda=xi_lambda,
        )

        try:
            chosen = acquire(conf.widths(), std, maxim | expand)
        except EmptyAcquisitionSet:
            return replace(state, terminated=True, termination_reason="stalled")

        widths = conf.widths()[:, chosen]
        acq_width = float(widths.max())
        if acq_width < cfg.exploration_threshold:
            return replace(
                state,
                terminated=True,
                termination_reason="width_below_delta",
                proposed_index=chosen,
            )

        point = self.domain.points[chosen]
        measurement = len(state.records) + 1
        if cfg.beta_mode == "scenario":
            bound = scenario_bound(noise_model, cfg.schedule, measurement, point, rng)
            magnitudes = bound.magnitudes
            n_scen = bound.n_scenarios
        else:
            magnitudes = np.zeros(cfg.n_outputs)
            n_scen = 0

        truth = np.asarray(oracle(point), dtype=float).ravel()
        if truth.shape != (cfg.n_outputs,):
            raise ValueError("oracle must return one value per output")
        eps = np.array(
            [float(noise_model.sample(point, i, rng, 1)[0]) for i in range(cfg.n_outputs)]
        )
        observed = truth + eps

        model = state.model.with_observation(point, observed)
        sq_sums = state.noise_sq_sums + magnitudes * magnitudes

        best = self.best_parameter(state)
        record = StepRecord(
            iteration=measurement,
            point_index=chosen,
            point=tuple(float(v) for v in point),
            observed=tuple(float(v) for v in observed),
            true_values=tuple(float(v) for v in truth),
            noise_bound=tuple(float(v) for v in magnitudes),
            n_scenarios=n_scen,
            betas=tuple(float(v) for v in betas),
            safe_size=int(safe.sum()),
            acquisition_width=acq_width,
            best_index=best,
            best_lower=state.confidence.lower_bound(0, best),
        )

        new_state = replace(
            state,
            model=model,
            noise_sq_sums=sq_sums,
            records=state.records + (record,),
        )
        if len(new_state.records) >= cfg.max_iterations:
            new_state = replace(
                new_state, terminated=True, termination_reason="max_iterations"
            )
        return new_state

    def run(
        self,
        oracle,
        noise_model: NoiseModel,
        rng: np.random.Generator,
    ) -> OptimizerState:
        """Iterate :meth:`step` from a fresh state until termination."""
        state = self.initial_state()
        if self.config.max_iterations == 0:
            return replace(state, terminated=True, termination_reason="max_iterations")
        while not state.terminated:
            state = self.step(state, oracle, noise_model, rng)
        return state

    def best_parameter(self, state: OptimizerState) -> int:
        """Grid index maximizing the reward lower bound over the safe set.

        Ties, including the all-unbounded start, resolve to the lowest
        safe index.
        """
        safe_idx = np.flatnonzero(state.safe)
        lower = state.confidence.lower_filled()[0][safe_idx]
        return int(safe_idx[int(np.argmax(lower))])
