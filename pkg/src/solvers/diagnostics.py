"""
Run Diagnostics for the SPPA toolkit

Observable pieces of the convergence argument:

- step_residual: the deterministic per-step inequality
  d(x_next, y)^2 <= d(x_prev, y)^2 - 2 lambda [f(x_next) - f(y)];
- growth_probe: empirical witnesses for the growth condition
  f(x) - f(y) <= L (1 + d(x, p)) d(x, y);
- conditional_descent: the same inequality averaged exactly over a finite
  support, i.e. the one-step conditional expectation.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.solvers.resolvents import ProxRequest, check_step, prox
from src.spaces import space_for
from src.spaces.geometry import batch_distance, distance, pair_distances
from src.utils.exceptions import ContractViolation

logger = logging.getLogger(__name__)


def step_residual(x_prev, x_next, marginal, lam, y):
    """
    Slack of the per-step inequality at y

    Args:
        x_prev: Iterate before the step
        x_next: Resolvent of the drawn marginal at x_prev
        marginal (Marginal): The drawn marginal
        lam (float): Step size of the step
        y: Comparison point, usually the known minimizer

    Returns:
        float: d(x_prev, y)^2 - 2 lam [f(x_next) - f(y)] - d(x_next, y)^2
    """
    lam = check_step(lam)
    marginal.check_point(y)
    return (
        distance(x_prev, y) ** 2
        - 2.0 * lam * (marginal.value(x_next) - marginal.value(y))
        - distance(x_next, y) ** 2
    )


@dataclass(frozen=True)
class GrowthEstimate:
    """Empirical growth constants, one per support marginal"""
    constants: np.ndarray
    anchor: object
    expected_sq: float
    pairs: int

    @property
    def max_constant(self):
        return float(self.constants.max())


def growth_probe(sampler, anchor, pairs, rng=None, radius=None):
    """
    Lower-bound witnesses of the growth constants L(xi)

    Pairs (x, y) are drawn from a ball around the anchor that covers every
    marginal's minimizer; pairs with d(x, y) = 0 are skipped.

    Args:
        sampler (Sampler): Finite distribution of marginals
        anchor: The point p of the growth condition
        pairs (int): Number of sampled pairs (>= 1)
        rng (numpy.random.Generator): Seeded 0 if None
        radius (float): Ball radius, chosen from the data if None

    Returns:
        GrowthEstimate: L-hat per marginal and sum_j w_j L-hat_j^2
    """
    pairs = int(pairs)
    if pairs < 1:
        raise ContractViolation(f"pairs must be >= 1, got {pairs}")
    if rng is None:
        rng = np.random.default_rng(0)
    anchors = [m.anchor(anchor) for m in sampler.support]
    for marginal in sampler.support:
        marginal.check_point(anchor)
    space = space_for(anchor, *anchors, spare_legs=1)
    if radius is None:
        radius = 4.0 * (1.0 + max(distance(anchor, a) for a in anchors))

    first = space.sample_ball(rng, anchor, radius, pairs)
    second = space.sample_ball(rng, anchor, radius, pairs)
    gaps = pair_distances(first, second)
    scale = (1.0 + batch_distance(first, anchor)) * gaps
    keep = gaps > 0.0
    if not np.any(keep):
        logger.warning("Every sampled pair was degenerate; growth constants default to 0")

    constants = np.zeros(len(sampler.support))
    for j, marginal in enumerate(sampler.support):
        rise = marginal.values(first) - marginal.values(second)
        if np.any(keep):
            constants[j] = max(0.0, float(np.max(rise[keep] / scale[keep])))
    expected_sq = float(sampler.weight_array @ constants ** 2)
    logger.info(f"Growth probe over {pairs} pairs: max L-hat {constants.max():.6g}, E[L^2] {expected_sq:.6g}")
    return GrowthEstimate(constants, anchor, expected_sq, pairs)


@dataclass(frozen=True)
class ConditionalDescent:
    """One SPPA step averaged over the support"""
    expected_sq_distance: float
    bound: float
    slack: float
    descent_term: float
    growth_bound: Optional[float] = None
    growth_holds: Optional[bool] = None


def conditional_descent(x, sampler, lam, y, growth: GrowthEstimate = None):
    """
    Exact conditional expectation of one step from x

    Computes E[d(x+, y)^2] and the bound
    d(x, y)^2 - 2 lam [F(x) - F(y)] + 2 lam E[f(x) - f(x+)],
    where x+ is the resolvent of the drawn marginal. With a growth
    estimate, the last term is compared with 4 lam^2 (1 + d(x, p))^2 E[L^2].

    Returns:
        ConditionalDescent: slack is bound - E[d(x+, y)^2], never negative
        beyond rounding
    """
    lam = check_step(lam)
    weights = sampler.weight_array
    expected_sq = 0.0
    descent = 0.0
    for weight, marginal in zip(weights, sampler.support):
        moved = prox(ProxRequest(x, lam, marginal))
        expected_sq += weight * distance(moved, y) ** 2
        descent += weight * (marginal.value(x) - marginal.value(moved))
    objective = sampler.objective
    descent_term = 2.0 * lam * descent
    bound = distance(x, y) ** 2 - 2.0 * lam * (objective(x) - objective(y)) + descent_term

    growth_bound = None
    growth_holds = None
    if growth is not None:
        growth_bound = 4.0 * lam ** 2 * (1.0 + distance(x, growth.anchor)) ** 2 * growth.expected_sq
        growth_holds = bool(descent_term <= growth_bound + 1e-12)
    return ConditionalDescent(
        expected_sq_distance=float(expected_sq),
        bound=float(bound),
        slack=float(bound - expected_sq),
        descent_term=float(descent_term),
        growth_bound=growth_bound,
        growth_holds=growth_holds,
    )
