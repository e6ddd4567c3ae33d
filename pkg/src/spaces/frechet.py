"""
Fréchet Mean and Median Oracles on the Spider

This module provides exact minimizers of

    x -> sum_j w_j d(x, t_j)^q,   q in {1, 2}

for finite weighted samples on a k-spider, plus a brute-force grid search
used to validate them. Both closed forms reduce to one-dimensional convex
problems on a single leg:

- mean (q = 2): with the pull m_k = sum of w_j r_j over points on leg k,
  the mean sits on leg k at radius m_k - sum_{l != k} m_l when that is
  positive, and at the origin otherwise;
- median (q = 1): only a leg carrying more than half of the weight can hold
  the median; on that leg it is the weighted median of the leg radii, with
  the remaining weight acting as mass at radius 0.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from src.spaces.geometry import SpiderBatch, batch_distance
from src.spaces.points import SpiderPoint, SPIDER_ORIGIN
from src.spaces.spider import SpiderSpace, spider_for_points
from src.utils.exceptions import ContractViolation, DegenerateMedianError

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12
MEDIAN_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Finite weighted sample of spider points"""
    points: tuple
    weights: tuple

    def __post_init__(self):
        points = tuple(self.points)
        weights = tuple(float(w) for w in self.weights)
        if not points:
            raise ContractViolation("A weighted sample needs at least one point")
        if len(points) != len(weights):
            raise ContractViolation(
                f"{len(points)} points but {len(weights)} weights"
            )
        if any(not isinstance(p, SpiderPoint) for p in points):
            raise ContractViolation("Weighted samples hold spider points only")
        if any(not np.isfinite(w) or w <= 0.0 for w in weights):
            raise ContractViolation("Sample weights must be finite and strictly positive")
        total = sum(weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ContractViolation(f"Sample weights must sum to 1, got {total!r}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points):
        points = tuple(points)
        return cls(points, (1.0 / len(points),) * len(points))

    @property
    def batch(self):
        return SpiderBatch.from_points(self.points)

    @property
    def weight_array(self):
        return np.asarray(self.weights)

    @property
    def max_radius(self):
        return max(p.radius for p in self.points)

    def leg_weights(self):
        """Total weight per leg (origin points excluded)"""
        totals = defaultdict(float)
        for point, weight in zip(self.points, self.weights):
            if not point.is_origin:
                totals[point.leg] += weight
        return dict(totals)


def weighted_median(positions, weights, tol=MEDIAN_TIE_TOL):
    """
    Unique weighted median of real positions

    Args:
        positions: Real positions
        weights: Positive weights, same length
        tol (float): Slack used to detect a cumulative weight of exactly half

    Returns:
        float: The minimizer of sum_j w_j |r - r_j|

    Raises:
        DegenerateMedianError: If the minimizers form a nontrivial interval
    """
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if positions.size == 0 or positions.shape != weights.shape:
        raise ContractViolation("Positions and weights must be non-empty and of equal length")
    unique, inverse = np.unique(positions, return_inverse=True)
    merged = np.bincount(inverse, weights=weights)
    cumulative = np.cumsum(merged)
    half = 0.5 * cumulative[-1]
    index = int(np.argmax(cumulative >= half - tol))
    if abs(cumulative[index] - half) <= tol and index < unique.size - 1:
        logger.warning(
            f"Weighted median is the whole interval [{unique[index]}, {unique[index + 1]}]"
        )
        raise DegenerateMedianError(
            f"Weighted median is not unique: every point of "
            f"[{unique[index]}, {unique[index + 1]}] minimizes"
        )
    return float(unique[index])


def frechet_objective(sample, x, q):
    """sum_j w_j d(x, t_j)^q"""
    return float(sample.weight_array @ batch_distance(sample.batch, x) ** q)


def frechet_mean_oracle(sample):
    """
    Exact minimizer of sum_j w_j d(x, t_j)^2

    Args:
        sample (WeightedSample): Weighted spider sample

    Returns:
        SpiderPoint: The Fréchet mean
    """
    pulls = defaultdict(float)
    for point, weight in zip(sample.points, sample.weights):
        if not point.is_origin:
            pulls[point.leg] += weight * point.radius
    total = sum(pulls.values())
    for leg in sorted(pulls):
        excess = pulls[leg] - (total - pulls[leg])
        if excess > 0.0:
            return SpiderPoint(leg, excess)
    return SPIDER_ORIGIN


def frechet_median_oracle(sample):
    """
    Exact minimizer of sum_j w_j d(x, t_j)

    Args:
        sample (WeightedSample): Weighted spider sample

    Returns:
        SpiderPoint: The Fréchet median

    Raises:
        DegenerateMedianError: If a leg carries exactly half of the weight or
            the one-dimensional median on the dominant leg is an interval
    """
    leg_weights = sample.leg_weights()
    for leg, weight in sorted(leg_weights.items()):
        if abs(weight - 0.5) <= MEDIAN_TIE_TOL:
            logger.warning(f"Leg {leg} carries exactly half of the weight")
            raise DegenerateMedianError(
                f"Leg {leg} carries exactly half of the weight; the median is not unique"
            )
        if weight > 0.5:
            on_leg = [(p.radius, w) for p, w in zip(sample.points, sample.weights) if p.leg == leg]
            positions = [r for r, _ in on_leg]
            weights = [w for _, w in on_leg]
            elsewhere = 1.0 - weight
            if elsewhere > 0.0:
                # Weight off the leg pulls toward the origin like mass at radius 0
                positions.append(0.0)
                weights.append(elsewhere)
            return SpiderPoint(leg, weighted_median(positions, weights))
    return SPIDER_ORIGIN


def grid_search_oracle(sample, q, step, space=None):
    """
    Brute-force minimizer over a grid of every leg plus the origin

    Args:
        sample (WeightedSample): Weighted spider sample
        q (int): 1 (median) or 2 (mean)
        step (float): Grid spacing; the grid reaches the largest sample radius
        space (SpiderSpace): Legs to search, defaults to the smallest spider
            holding the sample

    Returns:
        SpiderPoint: Best grid point (first one on ties, origin first)
    """
    if q not in (1, 2):
        raise ContractViolation(f"Exponent q must be 1 or 2, got {q}")
    if not step > 0:
        raise ContractViolation(f"Grid step must be positive, got {step}")
    if space is None:
        space = spider_for_points(*sample.points)
    elif not isinstance(space, SpiderSpace):
        raise ContractViolation("Grid search runs on a spider space")

    grid = space.grid(sample.max_radius, step)
    targets = sample.batch
    # (grid points) x (sample points) distance matrix
    same_leg = grid.legs[:, None] == targets.legs[None, :]
    distances = np.where(
        same_leg,
        np.abs(grid.radii[:, None] - targets.radii[None, :]),
        grid.radii[:, None] + targets.radii[None, :],
    )
    objective = (distances ** q) @ sample.weight_array
    return grid.point(int(np.argmin(objective)))
