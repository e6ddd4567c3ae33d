"""
Synthetic Data Generators for the SPPA toolkit

Generates problem data from a SplitMix64 stream so that the same generator
spec yields the same numbers in any language. Draw order is part of the
contract and is documented per function.
"""

import logging

from src.spaces.points import SpiderPoint
from src.utils.exceptions import ContractViolation
from src.utils.rng import SplitMix64

logger = logging.getLogger(__name__)


def generate_points(count, dim, seed, low=-1.0, high=1.0):
    """
    Generate points with coordinates uniform in [low, high)

    Draw order: point by point, coordinate by coordinate.

    Args:
        count (int): Number of points
        dim (int): Coordinates per point
        seed (int): Stream seed

    Returns:
        list: count lists of dim floats
    """
    rng = SplitMix64(seed)
    points = [[rng.uniform(low, high) for _ in range(dim)] for _ in range(count)]
    logger.info(f"Generated {count} points in R^{dim} (seed {seed})")
    return points


def generate_regression(count, dim, seed, low=-1.0, high=1.0, noise=0.0):
    """
    Generate a regression instance around a planted solution

    Draw order: the planted solution (dim draws), then each row's entries,
    then one noise draw per row; rhs_k = <a_k, planted> + e_k with e_k
    uniform in [-noise, noise).

    Args:
        count (int): Number of rows
        dim (int): Number of columns
        seed (int): Stream seed
        low (float): Lower end of the entry range
        high (float): Upper end of the entry range
        noise (float): Half-width of the additive noise

    Returns:
        tuple: (rows, rhs, planted)
    """
    if noise < 0.0:
        raise ContractViolation(f"noise must be >= 0, got {noise}")
    rng = SplitMix64(seed)
    planted = [rng.uniform(low, high) for _ in range(dim)]
    rows = [[rng.uniform(low, high) for _ in range(dim)] for _ in range(count)]
    rhs = []
    for row in rows:
        clean = sum(a * x for a, x in zip(row, planted))
        rhs.append(clean + rng.uniform(-noise, noise))
    logger.info(f"Generated {count}x{dim} regression rows (seed {seed}, noise {noise})")
    return rows, rhs, planted


def generate_spider_sample(count, legs, seed, low=0.0, high=1.0):
    """
    Generate spider points with uniform legs and radii in [low, high)

    Draw order: for each point, the leg (one draw) then the radius (one draw).

    Returns:
        list: count SpiderPoint values
    """
    if low < 0.0:
        raise ContractViolation(f"Spider radii need low >= 0, got {low}")
    rng = SplitMix64(seed)
    points = []
    for _ in range(count):
        leg = 1 + rng.next_below(legs)
        points.append(SpiderPoint(leg, rng.uniform(low, high)))
    logger.info(f"Generated {count} points on a {legs}-spider (seed {seed})")
    return points
