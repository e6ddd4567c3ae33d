"""
Baseline Methods

Two comparison points for SPPA:

- the stochastic subgradient method, an explicit step x - lambda g that
  needs the linear structure of R^d;
- the cyclic proximal point method over the empirical risk sum_n f_n,
  which applies every resolvent once per cycle in a fixed order.
"""

import logging

import numpy as np

from src.solvers.marginals import SupportObjective
from src.solvers.resolvents import check_step
from src.solvers.schedules import StepSchedule
from src.solvers.solver_base import SolverBase
from src.spaces.points import EuclideanPoint
from src.utils.exceptions import ContractViolation, UnsupportedSpaceError

logger = logging.getLogger(__name__)

DIVERGENCE_RADIUS = 1e6


def _require_linear(marginal):
    if not marginal.linear_space:
        logger.error(f"Subgradient step requested for {marginal.kind} on a spider")
        raise UnsupportedSpaceError(
            f"{marginal.kind} lives on a space without linear structure; "
            "only resolvent methods apply"
        )


def subgradient_step(x, marginal, lam):
    """
    Explicit step x - lam g with the canonical subgradient g (zero at kinks)

    Args:
        x (EuclideanPoint): Current iterate
        marginal (Marginal): Euclidean marginal
        lam (float): Step size

    Returns:
        EuclideanPoint: The next iterate
    """
    _require_linear(marginal)
    if not isinstance(x, EuclideanPoint):
        raise UnsupportedSpaceError("Subgradient steps need a Euclidean point")
    lam = check_step(lam)
    marginal.check_point(x)
    return EuclideanPoint(x.coords - lam * marginal.subgradient(x))


class StochasticSubgradient(SolverBase):
    """
    Stochastic subgradient method on the same draw stream as SPPA.

    The run halts once the iterate leaves the ball of radius 1e6 around the
    reference (or the start) or stops being finite.
    """

    divergence_radius = DIVERGENCE_RADIUS
    certifies_steps = False

    def __init__(self, sampler, schedule=None, name="subgradient"):
        super().__init__(name, schedule if schedule is not None else StepSchedule(), sampler.support)
        for marginal in sampler.support:
            _require_linear(marginal)
        self.sampler = sampler
        self.parameters.update({"seed": sampler.seed, "support_size": len(sampler)})

    def draws(self, iterations):
        stream = self.sampler.stream()
        for i in range(1, iterations + 1):
            index, marginal = next(stream)
            yield i, self.schedule.lambda_at(i), index, marginal

    def step(self, x, marginal, lam):
        coords = x.coords - lam * marginal.subgradient(x)
        if not np.all(np.isfinite(coords)):
            return None
        return EuclideanPoint.trusted(coords)


class CyclicProximalPoint(SolverBase):
    """
    Deterministic cyclic PPA: every cycle applies the resolvent of each
    marginal in order, all with the step lambda_c of cycle c.
    """

    def __init__(self, marginals, schedule=None, name="cyclic_ppa"):
        marginals = tuple(marginals)
        if not marginals:
            raise ContractViolation("Cyclic PPA needs at least one marginal")
        super().__init__(name, schedule if schedule is not None else StepSchedule(), marginals)
        self.marginals = marginals
        self.parameters.update({"support_size": len(self.marginals)})

    def draws(self, iterations):
        count = len(self.marginals)
        for i in range(1, iterations + 1):
            cycle, index = divmod(i - 1, count)
            yield i, self.schedule.lambda_at(cycle + 1), index, self.marginals[index]

    def step(self, x, marginal, lam):
        return marginal.prox(x, lam)

    def series_sums(self, iterations):
        cycles = -(-iterations // len(self.marginals))
        steps = np.repeat(self.schedule.lambdas(cycles), len(self.marginals))[:iterations]
        return float(steps.sum()), float(steps @ steps)


def cyclic_ppa_run(start, marginals, schedule, cycles, reference=None, track_objective=True, certify=True):
    """
    Run cyclic PPA for a number of full cycles

    Args:
        start: Starting point
        marginals (list): Marginals in application order
        schedule (StepSchedule): Step sizes, indexed by cycle
        cycles (int): Number of cycles (>= 1)
        reference: Known minimizer, enables distances and per-step checks
        track_objective (bool): Record the average of the marginals at every step

    Returns:
        RunTrace: One record per resolvent step (cycles x len(marginals))
    """
    if int(cycles) != cycles or int(cycles) < 1:
        raise ContractViolation(f"cycles must be an integer >= 1, got {cycles}")
    marginals = tuple(marginals)
    solver = CyclicProximalPoint(marginals, schedule)
    objective = None
    if track_objective:
        objective = SupportObjective(marginals, np.full(len(marginals), 1.0 / len(marginals)))
    return solver.run(
        start,
        int(cycles) * len(marginals),
        reference=reference,
        objective=objective,
        certify=certify,
    )
