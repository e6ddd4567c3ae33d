"""
Stochastic Proximal Point Algorithm

Starting from x_0, every iteration draws a marginal xi_i from the sampler
and applies its resolvent with the scheduled step:

    x_i = J_{lambda_i}^{xi_i} x_{i-1}.
"""

import logging

from src.solvers.resolvents import ProxRequest, prox
from src.solvers.schedules import StepSchedule
from src.solvers.solver_base import SolverBase

logger = logging.getLogger(__name__)


def sppa_step(x, marginal, lam):
    """One resolvent step; pure"""
    return prox(ProxRequest(x, lam, marginal))


class StochasticProximalPoint(SolverBase):
    """
    SPPA over a finite-support sampler.

    The draw stream restarts from the sampler's seed on every run, so two
    runs of the same solver are identical.
    """

    def __init__(self, sampler, schedule=None, name="sppa"):
        """
        Initialize the solver

        Args:
            sampler (Sampler): Distribution of the marginals and its seed
            schedule (StepSchedule): Step sizes, 1/i if None
            name (str): Method name used in traces and logs
        """
        super().__init__(name, schedule if schedule is not None else StepSchedule(), sampler.support)
        self.sampler = sampler
        self.parameters.update({"seed": sampler.seed, "support_size": len(sampler)})

    def draws(self, iterations):
        stream = self.sampler.stream()
        for i in range(1, iterations + 1):
            index, marginal = next(stream)
            yield i, self.schedule.lambda_at(i), index, marginal

    def step(self, x, marginal, lam):
        return marginal.prox(x, lam)


def run(start, sampler, schedule, iterations, reference=None, track_objective=True, certify=True):
    """
    Run SPPA for a fixed number of iterations

    Args:
        start: Starting point x_0
        sampler (Sampler): Marginal distribution with its seed
        schedule (StepSchedule): Step sizes
        iterations (int): Iteration budget (>= 1)
        reference: Known minimizer, enables distances and per-step checks
        track_objective (bool): Record F(x_i) at every iteration
        certify (bool): Evaluate the per-step inequality at the reference

    Returns:
        RunTrace: Trace with one record per iteration
    """
    solver = StochasticProximalPoint(sampler, schedule)
    objective = sampler.objective if track_objective else None
    return solver.run(
        start,
        iterations,
        reference=reference,
        objective=objective,
        seed=sampler.seed,
        certify=certify,
    )
