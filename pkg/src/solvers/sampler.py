"""
Seeded Sampling over a Finite Support

A Sampler is the distribution of the random marginal: a finite list of
marginals with probabilities, plus the seed of its draw stream. Each draw
consumes exactly one 64-bit SplitMix64 output and maps it to an index by
inverse CDF, so a seed fixes the whole index sequence in any language.
"""

import bisect
import itertools
from functools import cached_property

import numpy as np

from src.solvers.marginals import Marginal, SupportObjective
from src.utils.exceptions import ContractViolation
from src.utils.rng import SplitMix64, validate_seed

WEIGHT_SUM_TOL = 1e-12


class Sampler:
    """Finite distribution over marginals with a seeded draw stream"""

    def __init__(self, support, weights=None, seed=0):
        """
        Args:
            support (list): Marginals, all acting on one space
            weights (list): Probabilities (uniform if None)
            seed (int): Unsigned 64-bit seed of the draw stream
        """
        support = tuple(support)
        if not support:
            raise ContractViolation("A sampler needs at least one marginal")
        if any(not isinstance(m, Marginal) for m in support):
            raise ContractViolation("Sampler support must contain marginals only")
        if weights is None:
            weights = [1.0 / len(support)] * len(support)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(support):
            raise ContractViolation(f"{len(support)} marginals but {len(weights)} weights")
        if any(not np.isfinite(w) or w <= 0.0 for w in weights):
            raise ContractViolation("Sampler weights must be finite and strictly positive")
        total = sum(weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ContractViolation(f"Sampler weights must sum to 1, got {total!r}")

        self.support = support
        self.weights = weights
        self.seed = validate_seed(seed)
        cumulative = list(itertools.accumulate(weights))
        cumulative[-1] = 1.0
        self._cumulative = tuple(cumulative)

    @classmethod
    def uniform(cls, support, seed=0):
        return cls(support, None, seed)

    def __len__(self):
        return len(self.support)

    def __repr__(self):
        return f"Sampler(size={len(self.support)}, seed={self.seed})"

    def with_seed(self, seed):
        """Same distribution, different draw stream"""
        return Sampler(self.support, self.weights, seed)

    def index_for(self, u):
        """Inverse CDF: the index j with F(j-1) <= u < F(j)"""
        return min(bisect.bisect_right(self._cumulative, u), len(self.support) - 1)

    def stream(self):
        """A fresh draw stream starting from the seed"""
        return SampleStream(self)

    @cached_property
    def objective(self):
        """F(x) = sum_j w_j f(x, xi_j) as a callable"""
        return SupportObjective(self.support, self.weights)

    @property
    def weight_array(self):
        return np.asarray(self.weights)


class SampleStream:
    """Iterator of (index, marginal) draws owning its own generator state"""

    def __init__(self, sampler):
        self.sampler = sampler
        self._rng = SplitMix64(sampler.seed)

    def __iter__(self):
        return self

    def __next__(self):
        index = self.sampler.index_for(self._rng.next_float())
        return index, self.sampler.support[index]

    def draw_index(self):
        return next(self)[0]


def estimate_objective(x, sampler):
    """
    Exact objective F(x) over the sampler's finite support

    Args:
        x: Point of the support's space
        sampler (Sampler): The distribution

    Returns:
        float: sum_j w_j f(x, xi_j)
    """
    sampler.support[0].check_point(x)
    return sampler.objective(x)
