"""
Base Solver for the SPPA toolkit

This module provides the run loop shared by every iterative method, and the
trace it records. A concrete solver decides which marginal and step size
each iteration uses (draws) and how one step moves the iterate (step).

The loop itself only steps and stores iterates. Distances, step lengths,
objective values and per-step residuals are computed for the whole
trajectory at once when the run ends.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from src.spaces.geometry import SpiderBatch, batch_distance, distance, pair_distances
from src.spaces.points import EuclideanPoint
from src.utils.exceptions import ContractViolation

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["iter", "lambda", "marginal_index", "step_length", "dist_to_reference", "objective"]
STEP_RESIDUAL_TOL = 1e-9


def _empty():
    return np.empty(0)


@dataclass(frozen=True)
class IterationRecord:
    """What happened in one iteration"""
    i: int
    lam: float
    marginal_index: int
    point: object
    step_length: float
    residual: float = math.nan
    dist_to_reference: float = math.nan
    objective: float = math.nan


@dataclass
class RunTrace:
    """
    Trajectory of one run plus the settings that produced it.

    Columns are stored as arrays of length len(trace); `iterates` holds the
    finite iterates x_1..x_m, which is every iterate unless the run diverged.
    """
    method: str
    start: object
    seed: Optional[int] = None
    config: dict = field(default_factory=dict)
    iterates: list = field(default_factory=list)
    lams: np.ndarray = field(default_factory=_empty)
    marginal_indices: np.ndarray = field(default_factory=_empty)
    step_lengths: np.ndarray = field(default_factory=_empty)
    step_residuals: np.ndarray = field(default_factory=_empty)
    distances: np.ndarray = field(default_factory=_empty)
    objectives: np.ndarray = field(default_factory=_empty)
    diverged: bool = False
    diverged_at: Optional[int] = None

    def __len__(self):
        return len(self.lams)

    @property
    def final_point(self):
        """Last finite iterate (the start if no step was taken)"""
        return self.iterates[-1] if self.iterates else self.start

    @property
    def points(self):
        """x_1..x_n, None after divergence"""
        return list(self.iterates) + [None] * (len(self) - len(self.iterates))

    @property
    def records(self):
        return [
            IterationRecord(i + 1, lam, int(index), point, step, residual, dist, value)
            for i, (lam, index, point, step, residual, dist, value) in enumerate(
                zip(
                    self.lams.tolist(),
                    self.marginal_indices.tolist(),
                    self.points,
                    self.step_lengths.tolist(),
                    self.step_residuals.tolist(),
                    self.distances.tolist(),
                    self.objectives.tolist(),
                )
            )
        ]

    @property
    def running_min_objective(self):
        """min_{j <= i} F(x_j), nonincreasing by construction"""
        values = np.where(np.isnan(self.objectives), np.inf, self.objectives)
        return np.minimum.accumulate(values)

    @property
    def best_objective(self):
        if len(self) == 0:
            return math.nan
        best = float(self.running_min_objective[-1])
        return best if math.isfinite(best) else math.nan

    @property
    def min_step_residual(self):
        residuals = self.step_residuals[~np.isnan(self.step_residuals)]
        return float(residuals.min()) if residuals.size else math.nan

    def to_frame(self):
        """The trace as a DataFrame with exactly the CSV columns"""
        return pd.DataFrame(
            {
                "iter": np.arange(1, len(self) + 1, dtype=np.int64),
                "lambda": self.lams.astype(float),
                "marginal_index": self.marginal_indices.astype(np.int64),
                "step_length": self.step_lengths.astype(float),
                "dist_to_reference": self.distances.astype(float),
                "objective": self.objectives.astype(float),
            },
            columns=TRACE_COLUMNS,
        )


def stack_points(points):
    """Points of one space as a batch: (n, d) array or SpiderBatch"""
    if isinstance(points[0], EuclideanPoint):
        return np.stack([p.coords for p in points])
    return SpiderBatch.from_points(points)


def take(batch, selector):
    """Rows of a batch picked by a slice or boolean mask"""
    if isinstance(batch, SpiderBatch):
        return SpiderBatch(batch.legs[selector], batch.radii[selector])
    return batch[selector]


def fill_diagnostics(trace, used, reference=None, objective=None, certify=False):
    """
    Compute the per-iteration columns of a finished trajectory

    Args:
        trace (RunTrace): Trace with iterates, lams and marginal indices set
        used (dict): Marginal index -> marginal, for every index drawn
        reference: Known minimizer y, enables distances and step residuals
        objective (SupportObjective): F, evaluated at every finite iterate if given
        certify (bool): Evaluate d(x_{i-1},y)^2 - 2 lam [f(x_i) - f(y)] - d(x_i,y)^2
    """
    n = len(trace)
    m = len(trace.iterates)
    trace.step_lengths = np.full(n, math.nan)
    trace.step_residuals = np.full(n, math.nan)
    trace.distances = np.full(n, math.nan)
    trace.objectives = np.full(n, math.nan)
    # Rows past a divergence
    trace.distances[m:] = math.inf
    trace.objectives[m:] = math.inf
    if m == 0:
        return trace

    path = stack_points([trace.start] + trace.iterates)
    previous, current = take(path, slice(0, m)), take(path, slice(1, m + 1))
    trace.step_lengths[:m] = pair_distances(previous, current)

    if reference is not None:
        to_reference = batch_distance(path, reference)
        trace.distances[:m] = to_reference[1:]
    if objective is not None:
        trace.objectives[:m] = objective.batch(current)

    if certify and reference is not None:
        indices = trace.marginal_indices[:m]
        at_next = np.empty(m)
        at_reference = np.empty(m)
        for index, marginal in used.items():
            mask = indices == index
            at_next[mask] = marginal.values(take(current, mask))
            at_reference[mask] = marginal.value(reference)
        residuals = (
            to_reference[:-1] ** 2
            - 2.0 * trace.lams[:m] * (at_next - at_reference)
            - to_reference[1:] ** 2
        )
        trace.step_residuals[:m] = residuals
        bad = np.flatnonzero(residuals < -STEP_RESIDUAL_TOL)
        if bad.size:
            logger.warning(
                f"Step residual below {-STEP_RESIDUAL_TOL:g} at {bad.size} iteration(s), "
                f"first at {bad[0] + 1}: {residuals[bad[0]]:.3e} (seed {trace.seed})"
            )

    if logger.isEnabledFor(logging.DEBUG):
        i = 1
        while i <= m:
            logger.debug(
                f"{trace.method} iter {i}: lambda={trace.lams[i - 1]:.6g} "
                f"step={trace.step_lengths[i - 1]:.6g} residual={trace.step_residuals[i - 1]:.6g} "
                f"dist={trace.distances[i - 1]:.6g}"
            )
            i *= 10
    return trace


class SolverBase(ABC):
    """Base class for all iterative methods"""

    # Halt once the iterate leaves this ball around the reference (None: never)
    divergence_radius = None
    # Whether steps are resolvent steps, for which the per-step inequality holds
    certifies_steps = True

    def __init__(self, name, schedule, support):
        """
        Initialize the solver

        Args:
            name (str): Name of this method
            schedule (StepSchedule): Step sizes, validated at construction
            support (list): Every marginal the method may step with
        """
        self.name = name
        self.schedule = schedule
        self.support = tuple(support)
        self.parameters = {"schedule": schedule.to_dict()}
        logger.info(f"Initialized {name} solver with schedule {schedule.to_dict()}")

    @abstractmethod
    def draws(self, iterations):
        """
        Iterate over the marginals the run will use

        Args:
            iterations (int): Number of iterations

        Yields:
            tuple: (i, lambda_i, marginal index, marginal) for i = 1..iterations
        """

    @abstractmethod
    def step(self, x, marginal, lam):
        """
        Move from x using one marginal

        The run validates the start point against the support and the steps
        come from a validated schedule, so implementations skip both checks.

        Returns:
            SpacePoint or None: The next iterate, None if it is not finite
        """

    def check_start(self, start, reference=None):
        """Raise ContractViolation unless start (and reference) fit every marginal"""
        for marginal in self.support:
            marginal.check_point(start)
            if reference is not None:
                marginal.check_point(reference)

    def run(self, start, iterations, reference=None, objective=None, seed=None, certify=True):
        """
        Run the method for a fixed budget of iterations

        Args:
            start: Starting point x_0
            iterations (int): Iteration budget (>= 1)
            reference: Known minimizer, enables distances and step residuals
            objective (SupportObjective): F, evaluated at every iterate if given
            seed (int): Seed echoed into the trace
            certify (bool): Check the per-step inequality against the reference

        Returns:
            RunTrace: One row per iteration
        """
        if int(iterations) != iterations or int(iterations) < 1:
            logger.error(f"Invalid iteration budget {iterations}")
            raise ContractViolation(f"iterations must be an integer >= 1, got {iterations}")
        iterations = int(iterations)
        self.check_start(start, reference)
        center = reference if reference is not None else start
        radius = self.divergence_radius
        step = self.step

        x = start
        iterates, lams, indices, used = [], [], [], {}
        diverged_at = None
        for i, lam, index, marginal in self.draws(iterations):
            lams.append(lam)
            indices.append(index)
            if diverged_at is not None:
                continue
            x_next = step(x, marginal, lam)
            if x_next is None or (radius is not None and distance(x_next, center) > radius):
                diverged_at = i
                logger.warning(f"{self.name} diverged at iteration {i} (seed {seed})")
                continue
            used[index] = marginal
            iterates.append(x_next)
            x = x_next

        trace = RunTrace(
            method=self.name,
            start=start,
            seed=seed,
            config=dict(self.parameters),
            iterates=iterates,
            lams=np.array(lams, dtype=float),
            marginal_indices=np.array(indices, dtype=np.int64),
            diverged=diverged_at is not None,
            diverged_at=diverged_at,
        )
        fill_diagnostics(
            trace,
            used,
            reference=reference,
            objective=objective,
            certify=certify and self.certifies_steps,
        )

        total, total_sq = self.series_sums(iterations)
        logger.info(
            f"{self.name} finished {iterations} iterations (seed {seed}): "
            f"sum lambda={total:.6g}, sum lambda^2={total_sq:.6g}"
        )
        return trace

    def series_sums(self, iterations):
        """(sum lambda_i, sum lambda_i^2) over the steps of a run"""
        return self.schedule.partial_sums(iterations)
