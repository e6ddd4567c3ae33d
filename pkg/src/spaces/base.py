"""
Base Geodesic Space for the SPPA toolkit

This module defines the common interface of a concrete Hadamard space: a
runtime descriptor (dimension or leg count) that validates membership,
samples points and batches, and exposes the shared metric operations.
"""

from abc import ABC, abstractmethod

from src.spaces import geometry
from src.utils.exceptions import ContractViolation


class HadamardSpace(ABC):
    """Base class for the concrete spaces"""

    name = "hadamard"

    @abstractmethod
    def contains(self, point):
        """
        Check whether a point belongs to this space

        Args:
            point: Candidate point

        Returns:
            bool: True if the point is a member
        """

    @abstractmethod
    def origin(self):
        """Distinguished base point (zero vector or spider origin)"""

    @abstractmethod
    def random_point(self, rng, scale=1.0):
        """
        Draw a random point

        Args:
            rng (numpy.random.Generator): Source of randomness
            scale (float): Spread of the draw

        Returns:
            SpacePoint: A point of the space
        """

    @abstractmethod
    def sample_ball(self, rng, center, radius, n):
        """
        Draw n points from the closed ball of the given radius around center

        Returns:
            A batch (numpy array or SpiderBatch) of n points
        """

    def check(self, point):
        """Raise ContractViolation unless the point belongs to this space"""
        if not self.contains(point):
            raise ContractViolation(f"{point!r} is not a point of {self!r}")
        return point

    def distance(self, x, y):
        return geometry.distance(self.check(x), self.check(y))

    def geodesic_point(self, x, y, t):
        return geometry.geodesic_point(self.check(x), self.check(y), t)

    def cat0_residual(self, z, x, y, t):
        return geometry.cat0_residual(self.check(z), self.check(x), self.check(y), t)
