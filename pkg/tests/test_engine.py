import math

import numpy as np
import pytest

from src.solvers import (
    AbsAffine,
    NormDist,
    PowerDist,
    Sampler,
    SqAffine,
    StepSchedule,
    StochasticProximalPoint,
    conditional_descent,
    estimate_objective,
    growth_probe,
    run,
    sppa_step,
    step_residual,
)
from src.solvers.resolvents import lemma_residual, ProxRequest
from src.solvers.schedules import classify_exponent
from src.spaces import EuclideanPoint, SpiderPoint, SPIDER_ORIGIN, distance
from src.utils.exceptions import ContractViolation, ScheduleError
from src.utils.rng import MASK64, SplitMix64

E = EuclideanPoint.of


class TestSplitMix64:
    def test_reference_stream(self):
        rng = SplitMix64(1234567)
        assert [rng.next_u64() for _ in range(5)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ]

    def test_seed_zero(self):
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_floats_in_unit_interval(self):
        rng = SplitMix64(MASK64)
        draws = [rng.next_float() for _ in range(1000)]
        assert all(0.0 <= u < 1.0 for u in draws)

    @pytest.mark.parametrize("seed", [-1, MASK64 + 1, 1.5, True])
    def test_invalid_seeds(self, seed):
        with pytest.raises(ContractViolation):
            SplitMix64(seed)


class TestStepSchedule:
    @pytest.mark.parametrize("p", [0.51, 0.75, 1.0])
    def test_valid_exponents(self, p):
        assert StepSchedule(1.0, p).lambda_at(1) == 1.0

    @pytest.mark.parametrize("p,condition", [(0.5, "square_summable"), (0.2, "square_summable"), (1.1, "divergent_sum")])
    def test_invalid_exponents(self, p, condition):
        with pytest.raises(ScheduleError) as err:
            StepSchedule(1.0, p)
        assert err.value.condition == condition
        assert classify_exponent(p) == condition

    def test_invalid_scale_and_offset(self):
        with pytest.raises(ScheduleError) as err:
            StepSchedule(0.0, 1.0)
        assert err.value.condition == "positive_scale"
        with pytest.raises(ScheduleError) as err:
            StepSchedule(1.0, 1.0, i0=0)
        assert err.value.condition == "offset"

    def test_offset_shifts_steps(self):
        schedule = StepSchedule(c=2.0, p=1.0, i0=3)
        assert schedule.lambda_at(1) == pytest.approx(2.0 / 3.0)
        assert schedule.lambdas(3) == pytest.approx([2.0 / 3.0, 0.5, 0.4])

    def test_partial_sums(self):
        total, total_sq = StepSchedule().partial_sums(4)
        assert total == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4)
        assert total_sq == pytest.approx(1 + 1 / 4 + 1 / 9 + 1 / 16)


class TestSampler:
    def test_same_seed_same_stream(self):
        support = [NormDist(E(k, 0)) for k in range(4)]
        first = Sampler.uniform(support, seed=7).stream()
        second = Sampler.uniform(support, seed=7).stream()
        assert [first.draw_index() for _ in range(200)] == [second.draw_index() for _ in range(200)]

    def test_draw_frequencies(self):
        support = [NormDist(E(k)) for k in range(3)]
        stream = Sampler(support, [0.2, 0.3, 0.5], seed=11).stream()
        counts = np.bincount([stream.draw_index() for _ in range(30_000)], minlength=3) / 30_000
        assert counts == pytest.approx([0.2, 0.3, 0.5], abs=0.015)

    def test_inverse_cdf(self):
        sampler = Sampler([NormDist(E(k)) for k in range(3)], [0.25, 0.25, 0.5])
        assert sampler.index_for(0.0) == 0
        assert sampler.index_for(0.25) == 1
        assert sampler.index_for(0.9999999) == 2

    def test_with_seed_keeps_distribution(self):
        sampler = Sampler([NormDist(E(0)), NormDist(E(1))], [0.4, 0.6], seed=1)
        other = sampler.with_seed(2)
        assert other.weights == sampler.weights
        assert other.seed == 2

    def test_invalid_weights(self):
        support = [NormDist(E(0)), NormDist(E(1))]
        with pytest.raises(ContractViolation):
            Sampler(support, [0.5, 0.6])
        with pytest.raises(ContractViolation):
            Sampler(support, [1.0, 0.0])
        with pytest.raises(ContractViolation):
            Sampler(support, [1.0])
        with pytest.raises(ContractViolation):
            Sampler([])


class TestEstimateObjective:
    def test_hand_example(self):
        sampler = Sampler([SqAffine(a=[1, 0], b=0), SqAffine(a=[0, 1], b=0)], [0.5, 0.5])
        assert estimate_objective(E(2, 2), sampler) == pytest.approx(2.0)

    def test_single_marginal(self):
        marginal = PowerDist(SpiderPoint(1, 2.0), q=2)
        assert estimate_objective(SpiderPoint(2, 1.0), Sampler([marginal])) == 9.0

    def test_values_per_marginal(self):
        support = [NormDist(E(0, 0)), AbsAffine(a=[1, 0], b=1), SqAffine(a=[0, 1], b=0)]
        sampler = Sampler.uniform(support)
        assert sampler.objective.values(E(3, 4)).tolist() == pytest.approx([5.0, 2.0, 8.0])


class TestSppaStep:
    def test_fixed_point(self):
        assert sppa_step(E(1, 2), NormDist(E(1, 2)), 0.3) == E(1, 2)

    def test_sq_affine(self):
        assert distance(sppa_step(E(0, 0), SqAffine(a=[1, 0], b=1), 1.0), E(0.5, 0)) <= 1e-12

    def test_capped_median_step(self):
        assert sppa_step(SpiderPoint(2, 2.0), PowerDist(SpiderPoint(1, 1.0), q=1), 5.0) == SpiderPoint(1, 1.0)


class TestRun:
    def test_single_iteration(self):
        support = [SqAffine(a=[1, 0], b=1), SqAffine(a=[0, 1], b=2)]
        sampler = Sampler.uniform(support, seed=3)
        trace = run(E(0, 0), sampler, StepSchedule(), 1)
        index = sampler.stream().draw_index()
        assert len(trace) == 1
        assert trace.records[0].marginal_index == index
        assert trace.final_point == sppa_step(E(0, 0), support[index], 1.0)

    def test_point_mass_is_deterministic_ppa(self):
        marginal = NormDist(E(3, 4))
        schedule = StepSchedule(c=0.5, p=0.75)
        trace = run(E(0, 0), Sampler([marginal], seed=99), schedule, 20)
        x = E(0, 0)
        for i in range(1, 21):
            x = sppa_step(x, marginal, schedule.lambda_at(i))
            assert trace.records[i - 1].point == x
            assert trace.records[i - 1].marginal_index == 0

    def test_deterministic(self):
        support = [SqAffine(a=[1, k], b=k) for k in range(5)]
        sampler = Sampler.uniform(support, seed=2024)
        first = run(E(1, 1), sampler, StepSchedule(), 500)
        second = run(E(1, 1), sampler, StepSchedule(), 500)
        assert first.points == second.points
        assert first.to_frame().equals(second.to_frame())

    def test_trace_contents(self):
        support = [NormDist(E(0, 0)), NormDist(E(2, 0))]
        trace = run(E(5, 5), Sampler.uniform(support, seed=1), StepSchedule(), 50, reference=E(1, 0))
        frame = trace.to_frame()
        assert list(frame.columns) == [
            "iter", "lambda", "marginal_index", "step_length", "dist_to_reference", "objective"
        ]
        assert frame["iter"].tolist() == list(range(1, 51))
        assert (frame["step_length"] >= 0).all()
        assert np.all(np.diff(trace.running_min_objective) <= 0)
        assert trace.min_step_residual >= -1e-9

    def test_no_reference_leaves_distances_blank(self):
        trace = run(E(0), Sampler([NormDist(E(1))]), StepSchedule(), 3)
        assert np.isnan(trace.distances).all()
        assert math.isnan(trace.min_step_residual)

    def test_rejects_empty_budget(self):
        with pytest.raises(ContractViolation):
            run(E(0), Sampler([NormDist(E(1))]), StepSchedule(), 0)

    def test_rejects_start_in_wrong_space(self):
        with pytest.raises(ContractViolation):
            run(SPIDER_ORIGIN, Sampler([NormDist(E(1))]), StepSchedule(), 3)

    def test_least_squares_converges(self):
        rows = [[1, 0], [0, 1], [1, 1], [1, -1]]
        solution = np.array([1.0, 2.0])
        support = [SqAffine(a=row, b=float(np.dot(row, solution))) for row in rows]
        trace = run(E(0, 0), Sampler.uniform(support, seed=5), StepSchedule(), 20000, reference=E(1, 2))
        # E[aa^T] = 0.75 I, so the error shrinks roughly like i^-0.75
        assert trace.distances[-1] < 0.5 * trace.distances[1999]
        assert distance(trace.final_point, E(1, 2)) <= 1e-2

    def test_solver_records_configuration(self):
        sampler = Sampler([NormDist(E(1))], seed=4)
        solver = StochasticProximalPoint(sampler, StepSchedule(c=2.0))
        assert solver.parameters == {
            "schedule": {"c": 2.0, "p": 1.0, "i0": 1},
            "seed": 4,
            "support_size": 1,
        }

    @pytest.mark.parametrize(
        "support, start, reference",
        [
            (
                [SqAffine(a=[1, 0], b=1), NormDist(E(0, 2)), AbsAffine(a=[1, 1], b=3)],
                E(3, -1),
                E(1, 2),
            ),
            (
                [PowerDist(SpiderPoint(1, 2.0), q=2), PowerDist(SpiderPoint(2, 1.0), q=1)],
                SpiderPoint(3, 4.0),
                SpiderPoint(1, 0.5),
            ),
        ],
    )
    def test_trace_columns_match_pointwise_values(self, support, start, reference):
        sampler = Sampler.uniform(support, seed=11)
        trace = run(start, sampler, StepSchedule(c=0.5), 40, reference=reference)
        objective = sampler.objective
        x = start
        for record in trace.records:
            marginal = support[record.marginal_index]
            assert record.point == sppa_step(x, marginal, record.lam)
            assert record.step_length == pytest.approx(distance(x, record.point), abs=1e-12)
            assert record.dist_to_reference == pytest.approx(distance(record.point, reference), abs=1e-12)
            assert record.objective == pytest.approx(objective(record.point), abs=1e-12)
            expected = step_residual(x, record.point, marginal, record.lam, reference)
            assert record.residual == pytest.approx(expected, abs=1e-9)
            x = record.point


class TestStepResidual:
    def test_at_next_iterate(self):
        marginal = SqAffine(a=[1, 0], b=1)
        x_next = sppa_step(E(0, 0), marginal, 1.0)
        assert step_residual(E(0, 0), x_next, marginal, 1.0, x_next) == pytest.approx(0.25)

    def test_sq_affine_step(self):
        marginal = SqAffine(a=[1, 0], b=1)
        x_next = sppa_step(E(0, 0), marginal, 1.0)
        residual = step_residual(E(0, 0), x_next, marginal, 1.0, E(1, 0))
        # 1 - 2 (0.125 - 0) - 0.25, twice the resolvent-inequality slack
        assert residual == pytest.approx(0.5)
        req = ProxRequest(E(0, 0), 1.0, marginal)
        assert residual == pytest.approx(2.0 * lemma_residual(req, E(1, 0)))

    def test_spider_steps(self, rng):
        target = SpiderPoint(1, 2.0)
        marginal = PowerDist(target, q=1)
        for _ in range(200):
            x = SpiderPoint(int(rng.integers(1, 4)), float(rng.uniform(0, 5)))
            y = SpiderPoint(int(rng.integers(1, 4)), float(rng.uniform(0, 5)))
            lam = float(rng.uniform(0.01, 3))
            assert step_residual(x, sppa_step(x, marginal, lam), marginal, lam, y) >= -1e-9

    def test_rejects_bad_step(self):
        with pytest.raises(ContractViolation):
            step_residual(E(0), E(0), NormDist(E(1)), 0.0, E(1))


class TestGrowthProbe:
    def test_norm_dist_bound(self, rng):
        support = [NormDist(E(*rng.uniform(-2, 2, size=3))) for _ in range(5)]
        estimate = growth_probe(Sampler.uniform(support), E(0, 0, 0), 10_000, rng)
        assert estimate.max_constant <= 1.0 + 1e-9
        assert np.all(estimate.constants >= 0)

    def test_abs_affine_bound(self, rng):
        marginal = AbsAffine(a=[3, 4], b=1)
        estimate = growth_probe(Sampler([marginal]), E(0, 0), 10_000, rng)
        assert 0.0 < estimate.max_constant <= 5.0 + 1e-9
        assert estimate.expected_sq == pytest.approx(estimate.max_constant ** 2)

    def test_zero_marginal(self, rng):
        estimate = growth_probe(Sampler([AbsAffine(a=[0, 0], b=0)]), E(1, 1), 500, rng)
        assert estimate.constants.tolist() == [0.0]
        assert estimate.expected_sq == 0.0

    def test_spider_support(self, rng):
        support = [PowerDist(SpiderPoint(1, 3.0), q=1), PowerDist(SpiderPoint(2, 1.0), q=1)]
        estimate = growth_probe(Sampler.uniform(support), SPIDER_ORIGIN, 5000, rng)
        assert estimate.max_constant <= 1.0 + 1e-9

    def test_needs_pairs(self):
        with pytest.raises(ContractViolation):
            growth_probe(Sampler([NormDist(E(0))]), E(0), 0)


class TestConditionalDescent:
    def test_slack_nonnegative(self):
        support = [SqAffine(a=[1, 0], b=1), SqAffine(a=[0, 1], b=2), SqAffine(a=[1, 1], b=3)]
        sampler = Sampler.uniform(support)
        result = conditional_descent(E(4, -3), sampler, 0.5, E(1, 2))
        assert result.slack >= -1e-9
        assert result.growth_bound is None

    def test_spider_mean(self):
        support = [PowerDist(SpiderPoint(1, 3.0), q=2), PowerDist(SpiderPoint(2, 1.0), q=2)]
        sampler = Sampler.uniform(support)
        result = conditional_descent(SpiderPoint(3, 2.0), sampler, 0.2, SpiderPoint(1, 1.0))
        assert result.slack >= -1e-9
        assert result.descent_term >= 0.0

    def test_with_growth_estimate(self, rng):
        support = [NormDist(E(0, 0)), NormDist(E(2, 0))]
        sampler = Sampler.uniform(support)
        growth = growth_probe(sampler, E(1, 0), 2000, rng)
        result = conditional_descent(E(5, 5), sampler, 0.1, E(1, 0), growth)
        assert result.growth_bound is not None
        assert isinstance(result.growth_holds, bool)
        assert result.slack >= -1e-9
