"""
Marginal Functions for the SPPA toolkit

This module defines the per-sample convex functions f(., xi) whose weighted
average is the objective F, together with their closed-form resolvents

    J_lambda x = argmin_y [ f(y) + d(x, y)^2 / (2 lambda) ].

Every marginal evaluates itself at one point (value), at a batch of points
(values), and in stacked form across a support (see SupportObjective).
"""

import math
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from src.spaces.geometry import SpiderBatch, batch_distance, distance, geodesic_point
from src.spaces.points import EuclideanPoint, SpiderPoint
from src.utils.exceptions import ContractViolation, UnsupportedSpaceError


def _frozen_vector(values, name):
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.size == 0 or not np.all(np.isfinite(vector)):
        raise ContractViolation(f"{name} must be a non-empty finite vector")
    vector.setflags(write=False)
    return vector


def _finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise ContractViolation(f"{name} must be finite, got {value}")
    return value


class Marginal(ABC):
    """Base class for all marginal functions"""

    kind = "marginal"
    # True when the marginal lives on a vector space (subgradients exist)
    linear_space = False

    @abstractmethod
    def check_point(self, x):
        """Raise ContractViolation unless x lives in this marginal's space"""

    @abstractmethod
    def value(self, x):
        """f(x, xi)"""

    @abstractmethod
    def values(self, batch):
        """f at every point of a batch"""

    @abstractmethod
    def prox(self, x, lam):
        """Closed-form resolvent J_lam x"""

    @abstractmethod
    def anchor(self, x):
        """
        Reference point used to size random probe balls around x

        Returns:
            SpacePoint: A minimizer of f (or the nearest one to x)
        """

    def subgradient(self, x):
        """Canonical subgradient, zero at kinks (linear spaces only)"""
        raise UnsupportedSpaceError(
            f"{self.kind} has no subgradient: the space has no linear structure"
        )

    @classmethod
    def stack(cls, members):
        """
        Evaluator for several marginals of this class at one point

        Args:
            members (list): Marginals of this class

        Returns:
            callable: x -> numpy array of their values
        """
        members = list(members)
        return lambda x: np.array([m.value(x) for m in members])


class EuclideanMarginal(Marginal):
    """Marginal defined on R^d"""

    dim = None
    linear_space = True

    def check_point(self, x):
        if not isinstance(x, EuclideanPoint):
            raise ContractViolation(f"{self.kind} acts on Euclidean points, got {type(x).__name__}")
        if x.dim != self.dim:
            raise ContractViolation(f"{self.kind} acts on R^{self.dim}, got a point of R^{x.dim}")
        return x


@dataclass(frozen=True, eq=False)
class NormDist(EuclideanMarginal):
    """f(x) = ||x - b||"""
    b: EuclideanPoint

    kind = "norm-dist"

    def __post_init__(self):
        if not isinstance(self.b, EuclideanPoint):
            object.__setattr__(self, "b", EuclideanPoint(self.b))

    @property
    def dim(self):
        return self.b.dim

    def value(self, x):
        return distance(x, self.b)

    def values(self, batch):
        return batch_distance(batch, self.b)

    def prox(self, x, lam):
        gap = distance(x, self.b)
        if gap <= lam:
            return self.b
        return EuclideanPoint.trusted(x.coords + (lam / gap) * (self.b.coords - x.coords))

    def anchor(self, x):
        return self.b

    def subgradient(self, x):
        diff = x.coords - self.b.coords
        gap = math.sqrt(float(diff @ diff))
        if gap == 0.0:
            return np.zeros_like(diff)
        return diff / gap

    @classmethod
    def stack(cls, members):
        centers = np.stack([m.b.coords for m in members])
        return lambda x: np.linalg.norm(centers - x.coords, axis=1)


@dataclass(frozen=True, eq=False)
class _AffineMarginal(EuclideanMarginal):
    """Shared storage for marginals built on the residual <a, x> - b"""
    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen_vector(self.a, "a"))
        object.__setattr__(self, "b", _finite(self.b, "b"))
        object.__setattr__(self, "_a_sq", float(self.a @ self.a))

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def a_norm_sq(self):
        return self._a_sq

    def residual(self, x):
        return float(self.a @ x.coords) - self.b

    def anchor(self, x):
        if self._a_sq == 0.0:
            return x
        return EuclideanPoint(x.coords - (self.residual(x) / self._a_sq) * self.a)

    @staticmethod
    def _stack_rows(members):
        return np.stack([m.a for m in members]), np.array([m.b for m in members])


class AbsAffine(_AffineMarginal):
    """f(x) = |<a, x> - b|"""

    kind = "abs-affine"

    def value(self, x):
        return abs(self.residual(x))

    def values(self, batch):
        return np.abs(np.asarray(batch) @ self.a - self.b)

    def prox(self, x, lam):
        if self._a_sq == 0.0:
            return x
        r = self.residual(x)
        if r >= 0.0:
            return EuclideanPoint.trusted(x.coords - min(lam, r / self._a_sq) * self.a)
        return EuclideanPoint.trusted(x.coords + min(lam, -r / self._a_sq) * self.a)

    def subgradient(self, x):
        return np.sign(self.residual(x)) * self.a

    @classmethod
    def stack(cls, members):
        rows, rhs = cls._stack_rows(members)
        return lambda x: np.abs(rows @ x.coords - rhs)


class SqAffine(_AffineMarginal):
    """f(x) = (<a, x> - b)^2 / 2"""

    kind = "sq-affine"

    def value(self, x):
        return 0.5 * self.residual(x) ** 2

    def values(self, batch):
        return 0.5 * (np.asarray(batch) @ self.a - self.b) ** 2

    def prox(self, x, lam):
        scale = lam * self.residual(x) / (1.0 + lam * self._a_sq)
        return EuclideanPoint.trusted(x.coords - scale * self.a)

    def subgradient(self, x):
        return self.residual(x) * self.a

    @classmethod
    def stack(cls, members):
        rows, rhs = cls._stack_rows(members)
        return lambda x: 0.5 * (rows @ x.coords - rhs) ** 2


@dataclass(frozen=True, eq=False)
class RegSqAffine(_AffineMarginal):
    """f(x) = (<a, x> - b)^2 / 2 + mu ||x||^2 with mu > 0"""
    mu: float = 1.0

    kind = "reg-sq-affine"

    def __post_init__(self):
        super().__post_init__()
        mu = _finite(self.mu, "mu")
        if mu <= 0.0:
            raise ContractViolation(f"Regularization mu must be > 0, got {mu}")
        object.__setattr__(self, "mu", mu)

    def value(self, x):
        return 0.5 * self.residual(x) ** 2 + self.mu * float(x.coords @ x.coords)

    def values(self, batch):
        batch = np.asarray(batch)
        return 0.5 * (batch @ self.a - self.b) ** 2 + self.mu * np.einsum("ij,ij->i", batch, batch)

    def prox(self, x, lam):
        # Optimality: (a a^T + c I) y = x / lam + b a with c = 2 mu + 1 / lam;
        # Sherman-Morrison inverts the rank-one update of c I.
        c = 2.0 * self.mu + 1.0 / lam
        v = x.coords / lam + self.b * self.a
        y = (v - self.a * (float(self.a @ v) / (c + self._a_sq))) / c
        return EuclideanPoint.trusted(y)

    def anchor(self, x):
        return EuclideanPoint((self.b / (self._a_sq + 2.0 * self.mu)) * self.a)

    def subgradient(self, x):
        return self.residual(x) * self.a + 2.0 * self.mu * x.coords

    @classmethod
    def stack(cls, members):
        rows, rhs = cls._stack_rows(members)
        mus = np.array([m.mu for m in members])
        return lambda x: 0.5 * (rows @ x.coords - rhs) ** 2 + mus * float(x.coords @ x.coords)


@dataclass(frozen=True, eq=False)
class PowerDist(Marginal):
    """
    f(x) = d(x, t)^q with q in {1, 2}, on any Hadamard space.

    The resolvent of a nondecreasing function of d(., t) lies on the
    geodesic [x, t], so both closed forms move along it:
    q = 1 travels min(lam, d(x, t)); q = 2 stops at fraction 2 lam / (1 + 2 lam).
    """
    t: object
    q: int = 2

    kind = "power-dist"

    def __post_init__(self):
        if not isinstance(self.t, (EuclideanPoint, SpiderPoint)):
            raise ContractViolation("PowerDist target must be a Euclidean or spider point")
        if self.q not in (1, 2):
            raise ContractViolation(f"Exponent q must be 1 or 2, got {self.q}")

    @property
    def dim(self):
        return self.t.dim if isinstance(self.t, EuclideanPoint) else None

    @property
    def linear_space(self):
        return isinstance(self.t, EuclideanPoint)

    def check_point(self, x):
        if isinstance(self.t, EuclideanPoint):
            if not isinstance(x, EuclideanPoint) or x.dim != self.t.dim:
                raise ContractViolation("Point and PowerDist target live in different spaces")
        elif not isinstance(x, SpiderPoint):
            raise ContractViolation("Point and PowerDist target live in different spaces")
        return x

    def value(self, x):
        return distance(x, self.t) ** self.q

    def values(self, batch):
        return batch_distance(batch, self.t) ** self.q

    def prox(self, x, lam):
        if self.q == 2:
            return geodesic_point(x, self.t, 2.0 * lam / (1.0 + 2.0 * lam))
        gap = distance(x, self.t)
        if gap <= lam:
            return self.t
        return geodesic_point(x, self.t, lam / gap)

    def anchor(self, x):
        return self.t

    def subgradient(self, x):
        if not isinstance(self.t, EuclideanPoint):
            raise UnsupportedSpaceError(
                "Subgradients need linear structure; the spider has none"
            )
        diff = x.coords - self.t.coords
        if self.q == 2:
            return 2.0 * diff
        gap = math.sqrt(float(diff @ diff))
        if gap == 0.0:
            return np.zeros_like(diff)
        return diff / gap

    @classmethod
    def stack(cls, members):
        members = list(members)
        exponents = np.array([m.q for m in members], dtype=float)
        if isinstance(members[0].t, SpiderPoint):
            targets = SpiderBatch.from_points([m.t for m in members])
        else:
            targets = np.stack([m.t.coords for m in members])
        return lambda x: batch_distance(targets, x) ** exponents


class SupportObjective:
    """
    Weighted sum x -> sum_j w_j f_j(x) over a finite support.

    Marginals of the same class are evaluated together so that one call
    costs a handful of array operations whatever the support size.
    """

    def __init__(self, support, weights):
        self.support = tuple(support)
        self.weights = np.asarray(weights, dtype=float)
        if len(self.support) != self.weights.shape[0]:
            raise ContractViolation("Support and weights differ in length")
        groups = defaultdict(list)
        for index, marginal in enumerate(self.support):
            groups[type(marginal)].append(index)
        self._groups = []
        for marginal_cls, indices in groups.items():
            indices = np.array(indices)
            evaluate = marginal_cls.stack([self.support[i] for i in indices])
            self._groups.append((indices, evaluate, self.weights[indices]))

    def values(self, x):
        """Per-marginal values in support order"""
        out = np.empty(len(self.support))
        for indices, evaluate, _ in self._groups:
            out[indices] = evaluate(x)
        return out

    def __call__(self, x):
        total = 0.0
        for _, evaluate, weights in self._groups:
            total += float(weights @ evaluate(x))
        return total

    def batch(self, batch):
        """F at every point of a batch ((n, d) array or SpiderBatch)"""
        total = np.zeros(len(batch))
        for marginal, weight in zip(self.support, self.weights):
            total += weight * marginal.values(batch)
        return total
