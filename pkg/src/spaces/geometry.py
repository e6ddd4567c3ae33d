"""
Metric and geodesic primitives shared by every concrete space.

Functions dispatch on the point type. Between two spider points on
different legs the geodesic runs through the origin; on the same leg it is
the segment between them.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.spaces.points import EuclideanPoint, SpiderPoint, SpacePoint
from src.utils.exceptions import ContractViolation

# Tolerances for the geometry axioms
CAT0_ABS_TOL = 1e-10
GEODESIC_REL_TOL = 1e-12


@dataclass(frozen=True)
class SpiderBatch:
    """Column view of many spider points (legs, radii), origin on leg 0"""
    legs: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        legs = np.asarray(self.legs, dtype=np.int64).reshape(-1)
        if legs.shape != radii.shape:
            raise ContractViolation("Spider batch legs and radii differ in length")
        legs = np.where(radii == 0.0, 0, legs)
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def from_points(cls, points):
        return cls(
            np.array([p.leg for p in points], dtype=np.int64),
            np.array([p.radius for p in points], dtype=float),
        )

    def __len__(self):
        return self.radii.shape[0]

    def point(self, i):
        return SpiderPoint(int(self.legs[i]), float(self.radii[i]))


def same_space(x, y):
    """
    Check that two points live in the same concrete space

    Returns:
        type: EuclideanPoint or SpiderPoint
    """
    if isinstance(x, EuclideanPoint) and isinstance(y, EuclideanPoint):
        if x.coords.shape != y.coords.shape:
            raise ContractViolation(f"Dimension mismatch: {x.dim} vs {y.dim}")
        return EuclideanPoint
    if isinstance(x, SpiderPoint) and isinstance(y, SpiderPoint):
        return SpiderPoint
    raise ContractViolation(
        f"Points belong to different spaces: {type(x).__name__} and {type(y).__name__}"
    )


def distance(x: SpacePoint, y: SpacePoint) -> float:
    """Geodesic distance d(x, y)"""
    if same_space(x, y) is EuclideanPoint:
        diff = x.coords - y.coords
        return math.sqrt(float(diff @ diff))
    if x.leg == y.leg:
        return abs(x.radius - y.radius)
    return x.radius + y.radius


def geodesic_point(x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
    """
    Point at fraction t along the geodesic from x to y

    Args:
        x: Start point, returned for t = 0
        y: End point, returned for t = 1
        t (float): Fraction in [0, 1]

    Returns:
        SpacePoint: p with d(x, p) = t d(x, y) and d(p, y) = (1 - t) d(x, y)
    """
    kind = same_space(x, y)
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ContractViolation(f"Geodesic parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    if kind is EuclideanPoint:
        return EuclideanPoint((1.0 - t) * x.coords + t * y.coords)

    if x.leg == y.leg:
        return SpiderPoint(x.leg, (1.0 - t) * x.radius + t * y.radius)
    travelled = t * (x.radius + y.radius)
    if travelled < x.radius:
        return SpiderPoint(x.leg, x.radius - travelled)
    return SpiderPoint(y.leg, travelled - x.radius)


@dataclass(frozen=True)
class Geodesic:
    """Constant-speed geodesic gamma: [0, 1] -> space between two endpoints"""
    start: SpacePoint
    end: SpacePoint

    def __post_init__(self):
        same_space(self.start, self.end)

    @property
    def length(self):
        return distance(self.start, self.end)

    def __call__(self, t):
        return geodesic_point(self.start, self.end, t)


def cat0_residual(z: SpacePoint, x: SpacePoint, y: SpacePoint, t: float) -> float:
    """
    Right-hand side minus left-hand side of the CAT(0) inequality

        d(z, g(t))^2 <= (1-t) d(z, x)^2 + t d(z, y)^2 - t(1-t) d(x, y)^2

    where g is the geodesic from x to y. Nonnegative (up to -1e-10) in a
    Hadamard space; Euclidean space attains equality.
    """
    same_space(z, x)
    same_space(x, y)
    g_t = geodesic_point(x, y, t)
    t = float(t)
    rhs = (
        (1.0 - t) * distance(z, x) ** 2
        + t * distance(z, y) ** 2
        - t * (1.0 - t) * distance(x, y) ** 2
    )
    return rhs - distance(z, g_t) ** 2


def geodesic_speed_residual(x: SpacePoint, y: SpacePoint, s: float, t: float) -> float:
    """|d(g(s), g(t)) - |s - t| d(x, y)| for the geodesic g from x to y"""
    return abs(
        distance(geodesic_point(x, y, s), geodesic_point(x, y, t))
        - abs(float(s) - float(t)) * distance(x, y)
    )


def batch_distance(batch, point: SpacePoint) -> np.ndarray:
    """
    Distances from every element of a batch to one point

    Args:
        batch: (n, d) array for Euclidean points or a SpiderBatch
        point: The common second argument

    Returns:
        numpy.ndarray: n distances
    """
    if isinstance(point, EuclideanPoint):
        batch = np.asarray(batch, dtype=float)
        if batch.ndim != 2 or batch.shape[1] != point.dim:
            raise ContractViolation("Batch dimension does not match the point")
        return np.linalg.norm(batch - point.coords, axis=1)
    if isinstance(point, SpiderPoint) and isinstance(batch, SpiderBatch):
        return np.where(
            batch.legs == point.leg,
            np.abs(batch.radii - point.radius),
            batch.radii + point.radius,
        )
    raise ContractViolation("Batch and point belong to different spaces")


def pair_distances(first, second) -> np.ndarray:
    """Element-wise distances between two batches of equal length"""
    if isinstance(first, SpiderBatch) and isinstance(second, SpiderBatch):
        if len(first) != len(second):
            raise ContractViolation("Spider batches differ in length")
        return np.where(
            first.legs == second.legs,
            np.abs(first.radii - second.radii),
            first.radii + second.radii,
        )
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    if first.shape != second.shape:
        raise ContractViolation("Euclidean batches differ in shape")
    return np.linalg.norm(first - second, axis=1)


def batch_point(batch, i) -> SpacePoint:
    """Element i of a batch as a point object"""
    if isinstance(batch, SpiderBatch):
        return batch.point(i)
    return EuclideanPoint(np.asarray(batch)[i])
