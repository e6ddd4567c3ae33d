import textwrap

import pytest

from src.data.config_loader import (
    load_config,
    parse_config,
    parse_rows,
    parse_seeds,
    parse_spider_points,
    parse_vector,
)
from src.data.generators import generate_points, generate_regression, generate_spider_sample
from src.data.instance_builder import build_instance, solve_normal_equations
from src.data.schemas.experiment_config import ProblemKind
from src.spaces import EuclideanPoint, EuclideanSpace, SpiderPoint, SpiderSpace, SPIDER_ORIGIN, distance
from src.utils.exceptions import ConfigError, InstanceBuildError

IDENTITY = textwrap.dedent(
    """
    [experiment]
    problem = least-squares
    iterations = 100
    seeds = 1, 2, 3

    [data]
    matrix = 1,0; 0,1
    rhs = 1, 2
"""
)


class TestParsers:
    def test_vector(self):
        assert parse_vector(" 1, 2.5 ,-3 ") == [1.0, 2.5, -3.0]

    def test_rows(self):
        assert parse_rows("1,2; 3,4;") == [[1.0, 2.0], [3.0, 4.0]]

    def test_spider_points(self):
        assert parse_spider_points("1:3; 2:0.5") == [(1, 3.0), (2, 0.5)]
        with pytest.raises(ValueError):
            parse_spider_points("1-3")

    def test_seeds_accept_hex(self):
        assert parse_seeds("1, 0x10, 18446744073709551615") == [1, 16, 18446744073709551615]


class TestParseConfig:
    def test_minimal_config(self, make_config):
        config = make_config(IDENTITY)
        assert config.problem is ProblemKind.LEAST_SQUARES
        assert config.iterations == 100
        assert config.seeds == [1, 2, 3]
        assert config.schedule_obj.lambda_at(2) == 0.5
        assert config.data.matrix == [[1.0, 0.0], [0.0, 1.0]]

    def test_shipped_configs_load(self, shipped_config):
        for name in (
            "least_squares.ini",
            "median_1d.ini",
            "spider_mean.ini",
            "spider_median.ini",
            "compare_stable.ini",
            "compare_large_steps.ini",
            "abs_regression.ini",
            "reg_least_squares.ini",
        ):
            config = shipped_config(name)
            assert config.iterations >= 1

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("[experiment]\nproblem = least-squares\niterations = 1\nseeds = 1\n", "exactly one of"),
            (IDENTITY + "[bogus]\nx = 1\n", "unknown section"),
            (IDENTITY.replace("iterations = 100", "iterations = 100\ncolor = red"), "unknown keys"),
            (IDENTITY.replace("least-squares", "least-cubes"), "problem"),
            (IDENTITY.replace("iterations = 100", "iterations = 0"), "iterations"),
            (IDENTITY.replace("rhs = 1, 2", "rhs = 1, 2, 3"), "rhs"),
            (IDENTITY.replace("1, 2, 3", "1, -2"), "seed"),
            (IDENTITY.replace("1, 2, 3", "1, 1, 2"), "duplicate seeds: [1]"),
            (IDENTITY.replace("1, 2, 3", "0x2, 2"), "duplicate seeds: [2]"),
            (IDENTITY + "[schedule]\np = 0.5\n", "p=0.5"),
            (IDENTITY + "[schedule]\np = 1.5\n", "p=1.5"),
            (IDENTITY.replace("seeds = 1, 2, 3", "seeds = 1\nmu = 0.1"), "mu"),
            (IDENTITY + "[space]\nlegs = 3\n", "legs"),
        ],
    )
    def test_invalid_configs(self, text, fragment):
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert fragment in str(err.value)

    def test_reg_least_squares_needs_mu(self):
        text = IDENTITY.replace("least-squares", "reg-least-squares")
        with pytest.raises(ConfigError):
            parse_config(text)
        assert parse_config(text.replace("seeds = 1, 2, 3", "seeds = 1\nmu = 0.5")).mu == 0.5

    def test_spider_config(self):
        config = parse_config(
            """
[experiment]
problem = spider-median
iterations = 10
seeds = 4

[space]
legs = 3

[data]
spider_points = 1:1; 1:3; 2:5
weights = 0.4, 0.3, 0.3
"""
        )
        assert config.problem.is_spider
        assert config.data.spider_points == [(1, 1.0), (1, 3.0), (2, 5.0)]

    def test_spider_point_beyond_legs(self):
        with pytest.raises(ConfigError):
            parse_config(
                "[experiment]\nproblem = spider-mean\niterations = 1\nseeds = 1\n"
                "[space]\nlegs = 3\n[data]\nspider_points = 4:1\n"
            )

    def test_weights_must_match_data(self):
        with pytest.raises(ConfigError):
            parse_config(IDENTITY + "weights = 0.5\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "missing.ini"))

    def test_load_from_file(self, write_config):
        config = load_config(write_config(IDENTITY))
        assert config.seeds == [1, 2, 3]


class TestOverridesAndHash:
    def test_overrides_revalidate(self, make_config):
        config = make_config(IDENTITY)
        changed = config.with_overrides(seeds=[9], iterations=5)
        assert changed.seeds == [9]
        assert changed.iterations == 5
        assert config.seeds == [1, 2, 3]
        with pytest.raises(ValueError):
            config.with_overrides(iterations=0)
        with pytest.raises(ValueError, match="duplicate seeds"):
            config.with_overrides(seeds=[4, 4])

    def test_hash_ignores_output_directory(self, make_config):
        first = make_config(IDENTITY, out="a")
        second = make_config(IDENTITY, out="b")
        assert first.config_hash() == second.config_hash()
        assert len(first.config_hash()) == 64

    def test_hash_tracks_settings(self, make_config):
        config = make_config(IDENTITY)
        assert config.with_overrides(iterations=101).config_hash() != config.config_hash()
        assert config.with_overrides(seeds=[1, 2]).config_hash() != config.config_hash()

    def test_configs_are_frozen(self, make_config):
        config = make_config(IDENTITY)
        with pytest.raises(ValueError):
            config.iterations = 5


class TestGenerators:
    def test_points_are_reproducible(self):
        assert generate_points(5, 2, 7) == generate_points(5, 2, 7)
        assert generate_points(5, 2, 7) != generate_points(5, 2, 8)

    def test_points_in_range(self):
        points = generate_points(200, 3, 1, low=-2.0, high=5.0)
        assert all(-2.0 <= v < 5.0 for p in points for v in p)

    def test_noiseless_regression_is_consistent(self):
        rows, rhs, planted = generate_regression(10, 3, 4)
        for row, b in zip(rows, rhs):
            assert sum(a * x for a, x in zip(row, planted)) == pytest.approx(b)

    def test_spider_sample(self):
        points = generate_spider_sample(300, 4, 3, low=0.5, high=2.0)
        assert {p.leg for p in points} == {1, 2, 3, 4}
        assert all(0.5 <= p.radius < 2.0 for p in points)


class TestBuildInstance:
    def test_identity_least_squares(self, make_config):
        instance = build_instance(make_config(IDENTITY))
        assert distance(instance.reference, EuclideanPoint.of(1, 2)) <= 1e-12
        assert instance.inf_value == pytest.approx(0.0, abs=1e-24)
        assert instance.start == EuclideanPoint.of(0, 0)
        assert instance.space == EuclideanSpace(2)

    def test_median(self, make_config):
        instance = build_instance(
            make_config(
                """
                [experiment]
                problem = median
                iterations = 10
                seeds = 1

                [data]
                points = 0; 1; 10
                """
            )
        )
        assert instance.reference == EuclideanPoint.of(1)
        assert instance.inf_value == pytest.approx(10.0 / 3.0)

    def test_spider_mean(self, make_config):
        instance = build_instance(
            make_config(
                """
                [experiment]
                problem = spider-mean
                iterations = 10
                seeds = 1
                start = 3:2

                [space]
                legs = 3

                [data]
                spider_points = 1:3; 2:1
                weights = 1, 1
                """
            )
        )
        assert instance.reference == SpiderPoint(1, 1.0)
        assert instance.weights == (0.5, 0.5)
        assert instance.start == SpiderPoint(3, 2.0)
        assert instance.space == SpiderSpace(3)

    def test_spider_start_defaults_to_origin(self, shipped_config):
        assert build_instance(shipped_config("spider_median.ini")).start == SPIDER_ORIGIN

    def test_singular_system(self, make_config):
        config = make_config(IDENTITY.replace("matrix = 1,0; 0,1", "matrix = 1,1; 2,2"))
        with pytest.raises(InstanceBuildError):
            build_instance(config)

    def test_degenerate_median(self, make_config):
        config = make_config(
            "[experiment]\nproblem = median\niterations = 1\nseeds = 1\n[data]\npoints = 0; 1\n"
        )
        with pytest.raises(InstanceBuildError):
            build_instance(config)

    def test_degenerate_spider_median(self, make_config):
        config = make_config(
            "[experiment]\nproblem = spider-median\niterations = 1\nseeds = 1\n"
            "[data]\nspider_points = 1:1; 2:1\n"
        )
        with pytest.raises(InstanceBuildError):
            build_instance(config)

    def test_abs_regression_has_no_reference(self, shipped_config):
        instance = build_instance(shipped_config("abs_regression.ini"))
        assert not instance.has_reference
        assert instance.inf_value is None
        assert len(instance.marginals) == 30

    def test_generated_least_squares(self, shipped_config):
        instance = build_instance(shipped_config("least_squares.ini"))
        assert instance.space == EuclideanSpace(5)
        assert len(instance.marginals) == 20
        assert instance.inf_value > 0.0

    def test_bad_start(self, make_config):
        with pytest.raises(InstanceBuildError):
            build_instance(make_config(IDENTITY.replace("seeds = 1, 2, 3", "seeds = 1\nstart = 1, 2, 3")))

    def test_ridge_solution_shrinks(self):
        plain = solve_normal_equations([[1, 0], [0, 1]], [1, 2], [0.5, 0.5])
        ridge = solve_normal_equations([[1, 0], [0, 1]], [1, 2], [0.5, 0.5], mu=0.25)
        # (0.5 + 0.5) x = 0.5 b
        assert distance(ridge, EuclideanPoint.of(0.5, 1.0)) <= 1e-12
        assert distance(plain, EuclideanPoint.of(1, 2)) <= 1e-12
