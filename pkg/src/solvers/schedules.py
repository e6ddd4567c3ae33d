"""
Step Schedules for the SPPA toolkit

A schedule is the sequence of positive step sizes

    lambda_i = c / (i + i0 - 1)^p,   i = 1, 2, ...

It is accepted only when sum lambda_i diverges and sum lambda_i^2
converges, which for this family means 1/2 < p <= 1.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.utils.exceptions import ScheduleError

logger = logging.getLogger(__name__)


def classify_exponent(p):
    """
    Name the series condition an exponent breaks

    Args:
        p (float): Decay exponent

    Returns:
        str or None: "divergent_sum" when p > 1, "square_summable" when
        p <= 1/2, None when both conditions hold
    """
    if p > 1.0:
        return "divergent_sum"
    if p <= 0.5:
        return "square_summable"
    return None


@dataclass(frozen=True)
class StepSchedule:
    """Polynomially decaying step sizes with scale c, exponent p and offset i0"""
    c: float = 1.0
    p: float = 1.0
    i0: int = 1

    def __post_init__(self):
        c, p = float(self.c), float(self.p)
        if not (np.isfinite(c) and c > 0.0):
            logger.error(f"Rejected schedule scale c={self.c}")
            raise ScheduleError(f"Schedule scale c must be > 0, got {self.c}", "positive_scale")
        if int(self.i0) != self.i0 or int(self.i0) < 1:
            logger.error(f"Rejected schedule offset i0={self.i0}")
            raise ScheduleError(f"Schedule offset i0 must be an integer >= 1, got {self.i0}", "offset")
        condition = classify_exponent(p)
        if condition == "divergent_sum":
            logger.error(f"Rejected schedule exponent p={p}")
            raise ScheduleError(
                f"p={p} > 1 makes sum lambda_i finite; steps must add up to infinity",
                condition,
            )
        if condition == "square_summable":
            logger.error(f"Rejected schedule exponent p={p}")
            raise ScheduleError(
                f"p={p} <= 1/2 makes sum lambda_i^2 infinite; squared steps must be summable",
                condition,
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "i0", int(self.i0))

    def lambda_at(self, i):
        """Step size of iteration i (1-based)"""
        if i < 1:
            raise ScheduleError(f"Iterations are numbered from 1, got {i}", "offset")
        return self.c / float(i + self.i0 - 1) ** self.p

    def lambdas(self, n):
        """lambda_1..lambda_n as a numpy array"""
        i = np.arange(1, int(n) + 1, dtype=float)
        return self.c / (i + (self.i0 - 1)) ** self.p

    def partial_sums(self, n):
        """
        Partial sums of the two series the convergence theory watches

        Returns:
            tuple: (sum of lambda_i, sum of lambda_i^2) for i = 1..n
        """
        steps = self.lambdas(n)
        return float(steps.sum()), float(steps @ steps)

    def to_dict(self):
        return {"c": self.c, "p": self.p, "i0": self.i0}
