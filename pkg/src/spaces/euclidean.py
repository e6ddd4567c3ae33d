import numpy as np

from src.spaces.base import HadamardSpace
from src.spaces.points import EuclideanPoint
from src.utils.exceptions import ContractViolation


class EuclideanSpace(HadamardSpace):
    """R^d with the Euclidean metric; d is a runtime value"""

    name = "euclidean"

    def __init__(self, dim):
        if int(dim) < 1:
            raise ContractViolation(f"Euclidean dimension must be >= 1, got {dim}")
        self.dim = int(dim)

    def __repr__(self):
        return f"EuclideanSpace(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, EuclideanSpace) and other.dim == self.dim

    def __hash__(self):
        return hash(("euclidean", self.dim))

    def contains(self, point):
        return isinstance(point, EuclideanPoint) and point.dim == self.dim

    def origin(self):
        return EuclideanPoint.zeros(self.dim)

    def random_point(self, rng, scale=1.0):
        return EuclideanPoint(rng.uniform(-scale, scale, size=self.dim))

    def sample_ball(self, rng, center, radius, n):
        self.check(center)
        directions = rng.standard_normal((n, self.dim))
        norms = np.linalg.norm(directions, axis=1)
        norms[norms == 0.0] = 1.0
        # Uniform in volume: radius * U^(1/d)
        lengths = radius * rng.uniform(0.0, 1.0, size=n) ** (1.0 / self.dim)
        return center.coords + directions * (lengths / norms)[:, None]
