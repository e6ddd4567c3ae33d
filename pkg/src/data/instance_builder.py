"""
Problem Instance Builder

Turns a validated ExperimentConfig into marginals, a sampler template, a
starting point and, where an oracle exists, the reference minimizer with
its objective value:

- least-squares / reg-least-squares: weighted normal equations;
- median in one dimension: weighted median of the data;
- spider-mean / spider-median: Fréchet mean / median oracles;
- abs-regression and median in d > 1: no reference (best objective only).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from src.data.config_loader import parse_vector
from src.data.generators import generate_points, generate_regression, generate_spider_sample
from src.data.schemas.experiment_config import ExperimentConfig, ProblemKind
from src.solvers.marginals import AbsAffine, NormDist, PowerDist, RegSqAffine, SqAffine
from src.solvers.sampler import Sampler
from src.spaces.euclidean import EuclideanSpace
from src.spaces.frechet import (
    WeightedSample,
    frechet_mean_oracle,
    frechet_median_oracle,
    weighted_median,
)
from src.spaces.points import EuclideanPoint, SpiderPoint, SPIDER_ORIGIN
from src.spaces.spider import SpiderSpace
from src.utils.exceptions import DegenerateMedianError, InstanceBuildError

logger = logging.getLogger(__name__)

# Normal equations above this condition number are treated as singular
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ProblemInstance:
    """Everything a run needs, independent of the seed"""
    config: ExperimentConfig
    space: object
    marginals: tuple
    weights: tuple
    start: object
    reference: Optional[object] = None
    inf_value: Optional[float] = None

    def sampler(self, seed):
        """Sampler over the marginals with the given stream seed"""
        return Sampler(self.marginals, self.weights, seed)

    @property
    def has_reference(self):
        return self.reference is not None


def _normalized(weights, count):
    if weights is None:
        return tuple([1.0 / count] * count)
    total = float(sum(weights))
    return tuple(float(w) / total for w in weights)


def _parse_start(config, space):
    text = config.start
    if text is None or text.strip() == "":
        return space.origin()
    text = text.strip()
    if isinstance(space, SpiderSpace):
        if text == "0":
            return SPIDER_ORIGIN
        leg, sep, radius = text.partition(":")
        if not sep:
            raise InstanceBuildError(f"Spider start {text!r} is not of the form leg:radius")
        point = SpiderPoint(int(leg), float(radius))
    else:
        point = EuclideanPoint(parse_vector(text))
    if not space.contains(point):
        raise InstanceBuildError(f"Start point {text!r} is not a point of {space!r}")
    return point


def _regression_data(config):
    if config.data is not None:
        return config.data.matrix, config.data.rhs
    spec = config.generator
    rows, rhs, _ = generate_regression(
        spec.count, config.dimension, spec.seed, spec.low, spec.high, spec.noise
    )
    return rows, rhs


def solve_normal_equations(rows, rhs, weights, mu=0.0):
    """
    Minimizer of sum_k w_k [(<a_k, x> - b_k)^2 / 2 + mu ||x||^2]

    Solves (A^T W A + 2 mu I) x = A^T W b.

    Raises:
        InstanceBuildError: If the system is singular or badly conditioned
    """
    a = np.asarray(rows, dtype=float)
    b = np.asarray(rhs, dtype=float)
    w = np.asarray(weights, dtype=float)
    gram = a.T @ (w[:, None] * a) + 2.0 * mu * np.eye(a.shape[1])
    moment = a.T @ (w * b)
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        logger.error(f"Normal equations are singular (condition number {condition:.3g})")
        raise InstanceBuildError(
            f"Normal equations are singular or ill-conditioned (condition number {condition:.3g})"
        )
    try:
        solution = scipy.linalg.solve(gram, moment, assume_a="pos")
    except (scipy.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Normal equation solve failed: {e}")
        raise InstanceBuildError(f"Normal equation solve failed: {e}") from e
    return EuclideanPoint(solution)


def _build_regression(config):
    rows, rhs = _regression_data(config)
    weights = _normalized(config.data.weights if config.data else None, len(rows))
    kind = config.problem
    if kind is ProblemKind.ABS_REGRESSION:
        marginals = tuple(AbsAffine(a, b) for a, b in zip(rows, rhs))
        return marginals, weights, None
    if kind is ProblemKind.LEAST_SQUARES:
        marginals = tuple(SqAffine(a, b) for a, b in zip(rows, rhs))
        return marginals, weights, solve_normal_equations(rows, rhs, weights)
    marginals = tuple(RegSqAffine(a, b, config.mu) for a, b in zip(rows, rhs))
    return marginals, weights, solve_normal_equations(rows, rhs, weights, config.mu)


def _build_median(config):
    if config.data is not None:
        points = config.data.points
    else:
        spec = config.generator
        points = generate_points(spec.count, config.dimension, spec.seed, spec.low, spec.high)
    weights = _normalized(config.data.weights if config.data else None, len(points))
    marginals = tuple(NormDist(EuclideanPoint(p)) for p in points)
    reference = None
    if len(points[0]) == 1:
        try:
            reference = EuclideanPoint.of(weighted_median([p[0] for p in points], weights))
        except DegenerateMedianError as e:
            raise InstanceBuildError(f"Median instance has no unique minimizer: {e}") from e
    return marginals, weights, reference


def _build_spider(config):
    if config.data is not None:
        points = [SpiderPoint(leg, radius) for leg, radius in config.data.spider_points]
    else:
        spec = config.generator
        points = generate_spider_sample(spec.count, config.legs, spec.seed, spec.low, spec.high)
    weights = _normalized(config.data.weights if config.data else None, len(points))
    q = 2 if config.problem is ProblemKind.SPIDER_MEAN else 1
    marginals = tuple(PowerDist(t, q) for t in points)
    sample = WeightedSample(points, weights)
    try:
        reference = frechet_mean_oracle(sample) if q == 2 else frechet_median_oracle(sample)
    except DegenerateMedianError as e:
        raise InstanceBuildError(f"Spider median instance has no unique minimizer: {e}") from e
    return marginals, weights, reference


def _space_for(config):
    if config.problem.is_spider:
        if config.legs is not None:
            return SpiderSpace(config.legs)
        top = max(leg for leg, _ in config.data.spider_points)
        return SpiderSpace(max(3, top))
    if config.dimension is not None:
        return EuclideanSpace(config.dimension)
    data = config.data
    dim = len(data.points[0]) if config.problem is ProblemKind.MEDIAN else len(data.matrix[0])
    return EuclideanSpace(dim)


def build_instance(config):
    """
    Build the problem instance described by a config

    Args:
        config (ExperimentConfig): Validated config

    Returns:
        ProblemInstance: Marginals, weights, start, reference and inf F

    Raises:
        InstanceBuildError: For degenerate instances or unusable data
    """
    try:
        space = _space_for(config)
        if config.problem.is_spider:
            marginals, weights, reference = _build_spider(config)
        elif config.problem is ProblemKind.MEDIAN:
            marginals, weights, reference = _build_median(config)
        else:
            marginals, weights, reference = _build_regression(config)
        start = _parse_start(config, space)
        sampler = Sampler(marginals, weights, 0)
        inf_value = sampler.objective(reference) if reference is not None else None
    except InstanceBuildError:
        raise
    except ValueError as e:
        logger.error(f"Could not build {config.problem.value} instance: {e}")
        raise InstanceBuildError(f"Could not build {config.problem.value} instance: {e}") from e

    logger.info(
        f"Built {config.problem.value} instance on {space!r}: {len(marginals)} marginals, "
        f"reference {reference!r}, inf F {inf_value}"
    )
    return ProblemInstance(
        config=config,
        space=space,
        marginals=marginals,
        weights=weights,
        start=start,
        reference=reference,
        inf_value=inf_value,
    )
