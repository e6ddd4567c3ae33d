"""
Full-length runs of the shipped configs. Deselected by default; run with

    pytest -m slow
"""

import os
import time

import pytest

from src.data.config_loader import load_config
from src.experiments.runner import run_experiment, run_seed

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")

pytestmark = pytest.mark.slow

# config -> final-distance tolerance
TOLERANCES = {
    "least_squares.ini": 1e-2,
    "median_1d.ini": 5e-2,
    "spider_mean.ini": 1e-2,
    "spider_median.ini": 5e-2,
}


@pytest.fixture(scope="module")
def summaries(tmp_path_factory):
    cache = {}

    def _run(name):
        if name not in cache:
            config = load_config(os.path.join(CONFIG_DIR, name))
            out = tmp_path_factory.mktemp(name.replace(".ini", ""))
            cache[name] = run_experiment(config.with_overrides(output_dir=str(out)), workers=4)
        return cache[name]

    return _run


def test_least_squares_median_distance(summaries):
    result = summaries("least_squares.ini")
    assert len(result.rows) == 10
    assert result.median_final_distance <= 1e-2


def test_least_squares_seeds_run_in_time():
    config = load_config(os.path.join(CONFIG_DIR, "least_squares.ini"))
    began = time.perf_counter()
    for seed in config.seeds:
        run_seed(config, seed)
    assert time.perf_counter() - began < 10.0


def test_median_1d(summaries):
    assert summaries("median_1d.ini").median_final_distance <= 5e-2


def test_spider_mean(summaries):
    result = summaries("spider_mean.ini")
    assert result.count_within(1e-2) >= 9
    assert result.median_final_distance <= 1e-2


def test_spider_median(summaries):
    assert summaries("spider_median.ini").count_within(5e-2) >= 9


@pytest.mark.parametrize("name", sorted(TOLERANCES))
def test_step_residuals_nonnegative(summaries, name):
    assert all(row.min_step_residual >= -1e-9 for row in summaries(name).rows)


@pytest.mark.parametrize("name", sorted(TOLERANCES))
def test_running_minimum_gap(summaries, name):
    gaps = [row.best_objective_gap for row in summaries(name).rows]
    assert max(gaps) <= 10 * TOLERANCES[name]


def test_least_squares_rerun_is_byte_identical(tmp_path):
    config = load_config(os.path.join(CONFIG_DIR, "least_squares.ini"))
    outputs = []
    for attempt in ("first", "second"):
        result = run_experiment(config.with_overrides(output_dir=str(tmp_path / attempt), seeds=[1, 2]), workers=2)
        blobs = []
        for path in result.trace_paths + [result.summary_path]:
            with open(path, "rb") as f:
                blobs.append(f.read())
        outputs.append(blobs)
    assert outputs[0] == outputs[1]
