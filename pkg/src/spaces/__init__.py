"""Concrete Hadamard spaces: Euclidean R^d and the k-spider."""

from src.spaces.points import EuclideanPoint, SpiderPoint, SpacePoint, SPIDER_ORIGIN
from src.spaces.geometry import (
    Geodesic,
    SpiderBatch,
    distance,
    geodesic_point,
    cat0_residual,
    geodesic_speed_residual,
)
from src.spaces.euclidean import EuclideanSpace
from src.spaces.spider import SpiderSpace, spider_for_points


def space_for(*points, spare_legs=0):
    """
    Smallest concrete space holding all the given points

    Args:
        *points: Points of one space
        spare_legs (int): Extra empty spider legs to add

    Returns:
        HadamardSpace: EuclideanSpace or SpiderSpace
    """
    first = points[0]
    if isinstance(first, EuclideanPoint):
        space = EuclideanSpace(first.dim)
    else:
        space = spider_for_points(*points, spare_legs=spare_legs)
    for point in points:
        space.check(point)
    return space
