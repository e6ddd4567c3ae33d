"""
Point types for the concrete Hadamard spaces.

Both types are immutable after construction and safe to share between
workers. A spider point with radius 0 is always stored as the origin
(leg 0), so equality between origins is structural.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.utils.exceptions import ContractViolation


@dataclass(frozen=True, eq=False)
class EuclideanPoint:
    """A point of R^d with finite coordinates"""
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.size == 0:
            raise ContractViolation("A Euclidean point needs at least one coordinate")
        if not np.all(np.isfinite(coords)):
            raise ContractViolation(f"Euclidean coordinates must be finite, got {coords.tolist()}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values):
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros(dim))

    @classmethod
    def trusted(cls, coords):
        """
        Wrap a 1-D float array the caller knows is finite, without copying

        The array is frozen in place; callers must not keep a writable alias.
        """
        coords.setflags(write=False)
        point = object.__new__(cls)
        object.__setattr__(point, "coords", coords)
        return point

    @property
    def dim(self):
        return self.coords.shape[0]

    def __eq__(self, other):
        if not isinstance(other, EuclideanPoint):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((self.coords.shape, self.coords.tobytes()))

    def __repr__(self):
        return f"EuclideanPoint({self.coords.tolist()})"


@dataclass(frozen=True)
class SpiderPoint:
    """
    A point of the k-spider: a leg index (1..k) and a distance from the origin.

    Leg 0 is reserved for the origin itself.
    """
    leg: int = 0
    radius: float = 0.0

    def __post_init__(self):
        radius = float(self.radius)
        if not math.isfinite(radius) or radius < 0.0:
            raise ContractViolation(f"Spider radius must be finite and >= 0, got {self.radius}")
        leg = int(self.leg)
        if leg < 0:
            raise ContractViolation(f"Spider leg index must be >= 0, got {self.leg}")
        if radius == 0.0:
            leg = 0
            radius = 0.0
        elif leg == 0:
            raise ContractViolation("Leg 0 is reserved for the origin; use a leg in 1..k")
        object.__setattr__(self, "leg", leg)
        object.__setattr__(self, "radius", radius)

    @property
    def is_origin(self):
        return self.leg == 0


SPIDER_ORIGIN = SpiderPoint()

SpacePoint = Union[EuclideanPoint, SpiderPoint]
