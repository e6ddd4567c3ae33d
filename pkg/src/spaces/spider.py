"""
The k-spider: k half-lines (legs) glued at a common origin.

A metric tree, hence a locally compact Hadamard space. For k = 3 it is
isometric to the tree space of phylogenetic trees on four leaves (one
interior edge, three topologies), which is the smallest non-Euclidean
instance of that family.
"""

import numpy as np

from src.spaces.base import HadamardSpace
from src.spaces.geometry import SpiderBatch
from src.spaces.points import SpiderPoint, SPIDER_ORIGIN
from src.utils.exceptions import ContractViolation


class SpiderSpace(HadamardSpace):
    """k-spider with legs numbered 1..k"""

    name = "spider"

    def __init__(self, legs):
        legs = int(legs)
        # k <= 2 is isometric to a line
        if legs < 3:
            raise ContractViolation(f"A spider needs at least 3 legs, got {legs}")
        self.legs = legs

    def __repr__(self):
        return f"SpiderSpace(legs={self.legs})"

    def __eq__(self, other):
        return isinstance(other, SpiderSpace) and other.legs == self.legs

    def __hash__(self):
        return hash(("spider", self.legs))

    def contains(self, point):
        return isinstance(point, SpiderPoint) and point.leg <= self.legs

    def origin(self):
        return SPIDER_ORIGIN

    def random_point(self, rng, scale=1.0):
        leg = int(rng.integers(1, self.legs + 1))
        return SpiderPoint(leg, float(rng.uniform(0.0, scale)))

    def sample_ball(self, rng, center, radius, n):
        self.check(center)
        legs = rng.integers(1, self.legs + 1, size=n)
        same = legs == center.leg
        reach = radius - center.radius
        if reach <= 0.0:
            # Ball does not reach the origin: it is a segment of the center's leg
            legs[:] = center.leg
            same[:] = True
        low = np.where(same, max(0.0, center.radius - radius), 0.0)
        high = np.where(same, center.radius + radius, max(reach, 0.0))
        radii = rng.uniform(low, high)
        return SpiderBatch(legs, radii)

    def grid(self, max_radius, step):
        """
        Grid of every leg with the given spacing, plus the origin

        Returns:
            SpiderBatch: origin first, then leg 1 outward, leg 2 outward, ...
        """
        if step <= 0:
            raise ContractViolation(f"Grid step must be positive, got {step}")
        count = int(np.floor(max_radius / step + 1e-9))
        radii = step * np.arange(1, count + 1, dtype=float)
        legs = np.repeat(np.arange(1, self.legs + 1), count)
        return SpiderBatch(
            np.concatenate([[0], legs]),
            np.concatenate([[0.0], np.tile(radii, self.legs)]),
        )


def spider_for_points(*points, spare_legs=0):
    """Smallest spider (at least 3 legs) holding all the given points"""
    top = max([3] + [p.leg for p in points])
    return SpiderSpace(top + spare_legs)
