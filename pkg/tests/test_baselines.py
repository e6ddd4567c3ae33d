import numpy as np
import pytest

from src.solvers import (
    AbsAffine,
    CyclicProximalPoint,
    NormDist,
    PowerDist,
    Sampler,
    SqAffine,
    StepSchedule,
    StochasticSubgradient,
    cyclic_ppa_run,
    run,
    sppa_step,
    subgradient_step,
)
from src.spaces import EuclideanPoint, SpiderPoint, distance
from src.utils.exceptions import ContractViolation, UnsupportedSpaceError

E = EuclideanPoint.of


class TestSubgradientStep:
    def test_sq_affine(self):
        assert subgradient_step(E(0, 0), SqAffine(a=[1, 0], b=1), 1.0) == E(1, 0)

    def test_norm_dist_kink(self):
        assert subgradient_step(E(2, -1), NormDist(E(2, -1)), 0.7) == E(2, -1)

    def test_abs_affine(self):
        assert subgradient_step(E(2, 0), AbsAffine(a=[1, 0], b=0), 0.5) == E(1.5, 0)

    def test_euclidean_power_dist(self):
        assert subgradient_step(E(2, 0), PowerDist(E(0, 0), q=2), 0.25) == E(1, 0)

    def test_spider_is_unsupported(self):
        with pytest.raises(UnsupportedSpaceError):
            subgradient_step(SpiderPoint(1, 1.0), PowerDist(SpiderPoint(2, 1.0), q=2), 0.5)

    def test_rejects_bad_step(self):
        with pytest.raises(ContractViolation):
            subgradient_step(E(0, 0), SqAffine(a=[1, 0], b=1), -1.0)


class TestStochasticSubgradient:
    def test_same_draws_as_sppa(self):
        support = [SqAffine(a=[1, 0], b=1), SqAffine(a=[0, 1], b=2), SqAffine(a=[1, 1], b=3)]
        sampler = Sampler.uniform(support, seed=42)
        sppa = run(E(0, 0), sampler, StepSchedule(), 100)
        subgradient = StochasticSubgradient(sampler).run(E(0, 0), 100)
        indices = [r.marginal_index for r in sppa.records]
        assert [r.marginal_index for r in subgradient.records] == indices
        assert [r.lam for r in subgradient.records] == [r.lam for r in sppa.records]

    def test_spider_sampler_is_unsupported(self):
        sampler = Sampler([PowerDist(SpiderPoint(1, 1.0), q=2)])
        with pytest.raises(UnsupportedSpaceError):
            StochasticSubgradient(sampler)

    def test_large_steps_diverge(self):
        support = [SqAffine(a=[2, 0], b=2), SqAffine(a=[0, 2], b=4)]
        sampler = Sampler.uniform(support, seed=1)
        schedule = StepSchedule(c=100.0)
        trace = StochasticSubgradient(sampler, schedule).run(E(0, 0), 200, reference=E(1, 2))
        assert trace.diverged
        assert len(trace) == 200
        assert np.isinf(trace.distances[-1])
        assert trace.points[-1] is None
        assert trace.final_point is not None

        stable = run(E(0, 0), sampler, schedule, 200, reference=E(1, 2))
        assert np.all(np.isfinite(stable.distances))

    def test_small_steps_converge(self):
        support = [SqAffine(a=[1, 0], b=1), SqAffine(a=[0, 1], b=2)]
        sampler = Sampler.uniform(support, seed=8)
        trace = StochasticSubgradient(sampler, StepSchedule(c=2.0)).run(E(0, 0), 5000, reference=E(1, 2))
        assert not trace.diverged
        assert distance(trace.final_point, E(1, 2)) <= 1e-2
        # Explicit steps carry no per-step certificate
        assert np.isnan(trace.step_residuals).all()


class TestCyclicProximalPoint:
    def test_single_marginal_one_cycle(self):
        marginal = SqAffine(a=[1, 0], b=1)
        trace = cyclic_ppa_run(E(0, 0), [marginal], StepSchedule(), 1)
        assert len(trace) == 1
        assert trace.final_point == sppa_step(E(0, 0), marginal, 1.0)

    def test_symmetric_centers_stay_on_axis(self):
        marginals = [NormDist(E(1, 0)), NormDist(E(-1, 0))]
        trace = cyclic_ppa_run(E(0, 0), marginals, StepSchedule(c=3.0, p=0.6), 40)
        for point in trace.points:
            assert point.coords[1] == 0.0
            assert -1.0 - 1e-12 <= point.coords[0] <= 1.0 + 1e-12

    def test_order_and_steps_follow_cycles(self):
        marginals = [NormDist(E(k, 0)) for k in range(3)]
        trace = cyclic_ppa_run(E(0, 0), marginals, StepSchedule(), 2)
        assert [r.marginal_index for r in trace.records] == [0, 1, 2, 0, 1, 2]
        assert [r.lam for r in trace.records] == [1.0, 1.0, 1.0, 0.5, 0.5, 0.5]

    def test_least_squares_converges(self):
        rows = [[1, 0], [0, 1], [1, 1], [2, -1]]
        solution = np.array([1.0, 2.0])
        marginals = [SqAffine(a=row, b=float(np.dot(row, solution))) for row in rows]
        trace = cyclic_ppa_run(E(0, 0), marginals, StepSchedule(), 2000, reference=E(1, 2))
        assert distance(trace.final_point, E(1, 2)) <= 1e-2
        assert trace.min_step_residual >= -1e-9

    def test_series_sums_use_cycle_steps(self):
        solver = CyclicProximalPoint([NormDist(E(0)), NormDist(E(1))], StepSchedule())
        total, total_sq = solver.series_sums(4)
        assert total == pytest.approx(3.0)
        assert total_sq == pytest.approx(2.5)

    def test_rejects_empty_cycle(self):
        with pytest.raises(ContractViolation):
            cyclic_ppa_run(E(0), [NormDist(E(1))], StepSchedule(), 0)
        with pytest.raises(ContractViolation):
            CyclicProximalPoint([], StepSchedule())
