"""Resolvents, step schedules, samplers and the iterative methods built on them."""

from src.solvers.marginals import (
    Marginal,
    NormDist,
    AbsAffine,
    SqAffine,
    RegSqAffine,
    PowerDist,
    SupportObjective,
)
from src.solvers.resolvents import (
    ProxRequest,
    prox,
    probe_oracle,
    lemma_residual,
    marginal_value,
    prox_objective,
)
from src.solvers.schedules import StepSchedule
from src.solvers.sampler import Sampler, estimate_objective
from src.solvers.diagnostics import (
    GrowthEstimate,
    step_residual,
    growth_probe,
    conditional_descent,
)
from src.solvers.solver_base import RunTrace, SolverBase
from src.solvers.sppa import StochasticProximalPoint, sppa_step, run
from src.solvers.baselines import (
    CyclicProximalPoint,
    StochasticSubgradient,
    cyclic_ppa_run,
    subgradient_step,
)
