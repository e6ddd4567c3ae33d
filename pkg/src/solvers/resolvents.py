"""
Resolvent Evaluation and Certification

This module wraps the closed-form resolvents of the marginal classes behind
a validated request type, and provides the two independent checks used to
trust them: a random-probe argmin oracle and the resolvent inequality

    f(Jx) - f(y) <= [d(x, y)^2 - d(Jx, y)^2] / (2 lambda)   for every y.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.solvers.marginals import Marginal
from src.spaces import space_for
from src.spaces.geometry import batch_distance, batch_point, distance
from src.spaces.points import SpacePoint
from src.utils.exceptions import ContractViolation


def check_step(lam):
    """Validate a step size lambda > 0 and return it as float"""
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0.0):
        raise ContractViolation(f"Step size lambda must be a finite positive number, got {lam}")
    return lam


@dataclass(frozen=True)
class ProxRequest:
    """One resolvent evaluation: the point x, the step lam and the marginal"""
    x: SpacePoint
    lam: float
    marginal: Marginal

    def __post_init__(self):
        if not isinstance(self.marginal, Marginal):
            raise ContractViolation(f"Expected a marginal, got {type(self.marginal).__name__}")
        object.__setattr__(self, "lam", check_step(self.lam))
        self.marginal.check_point(self.x)


def prox(req: ProxRequest) -> SpacePoint:
    """Exact argmin of y -> f(y) + d(x, y)^2 / (2 lam)"""
    return req.marginal.prox(req.x, req.lam)


def marginal_value(marginal: Marginal, x: SpacePoint) -> float:
    """f(x, xi)"""
    marginal.check_point(x)
    return float(marginal.value(x))


def prox_objective(req: ProxRequest, y: SpacePoint) -> float:
    """f(y) + d(x, y)^2 / (2 lam)"""
    return marginal_value(req.marginal, y) + distance(req.x, y) ** 2 / (2.0 * req.lam)


def lemma_residual(req: ProxRequest, y: SpacePoint) -> float:
    """
    Slack of the resolvent inequality at y

    Returns:
        float: [d(x,y)^2 - d(Jx,y)^2] / (2 lam) - [f(Jx) - f(y)], which is
        nonnegative for every y
    """
    req.marginal.check_point(y)
    jx = prox(req)
    distance_term = (distance(req.x, y) ** 2 - distance(jx, y) ** 2) / (2.0 * req.lam)
    return distance_term - (req.marginal.value(jx) - req.marginal.value(y))


def descent_gap(req: ProxRequest) -> float:
    """f(x) - [f(Jx) + d(x, Jx)^2 / (2 lam)]; nonnegative since y = x is a candidate"""
    jx = prox(req)
    return req.marginal.value(req.x) - prox_objective(req, jx)


def probe_oracle(req: ProxRequest, probes: int, rng=None, space=None) -> SpacePoint:
    """
    Best point found by random probing of the prox objective

    The candidates are the closed-form answer, x itself, and `probes` points
    drawn uniformly from the ball of radius 4 (1 + d(x, anchor)) around x.
    On the spider the ball covers every leg, including one spare empty leg.

    Args:
        req (ProxRequest): Request to certify
        probes (int): Number of random probe points (>= 1)
        rng (numpy.random.Generator): Source of randomness, seeded 0 if None
        space (HadamardSpace): Space to probe, inferred from the request if None

    Returns:
        SpacePoint: Candidate with the smallest prox objective (closed form on ties)
    """
    if int(probes) < 1:
        raise ContractViolation(f"probes must be >= 1, got {probes}")
    if rng is None:
        rng = np.random.default_rng(0)
    anchor = req.marginal.anchor(req.x)
    if space is None:
        space = space_for(req.x, anchor, spare_legs=1)
    radius = 4.0 * (1.0 + distance(req.x, anchor))
    batch = space.sample_ball(rng, req.x, radius, int(probes))
    probe_values = req.marginal.values(batch) + batch_distance(batch, req.x) ** 2 / (2.0 * req.lam)

    best = prox(req)
    best_value = prox_objective(req, best)
    x_value = prox_objective(req, req.x)
    if x_value < best_value:
        best, best_value = req.x, x_value
    index = int(np.argmin(probe_values))
    if probe_values[index] < best_value:
        best = batch_point(batch, index)
    return best
