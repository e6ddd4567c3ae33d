"""
Seed-Batch Experiment Runner

Runs SPPA once per seed of a config and writes one trace CSV per seed plus
one summary CSV. Seeds may run in a process pool; every worker rebuilds the
instance from the config and writes only its own trace file, and the
summary is written once after all runs have joined.
"""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from src.data.instance_builder import build_instance
from src.experiments.trace_io import ensure_directory, write_frame
from src.solvers.sppa import run
from src.spaces.geometry import distance
from src.utils.settings import get_settings

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "seed",
    "final_distance",
    "final_objective",
    "final_objective_gap",
    "best_objective",
    "best_objective_gap",
    "min_step_residual",
    "iterations",
    "wall_time_s",
]

_instances = {}


def cached_instance(config):
    """Build the instance once per process and config"""
    key = config.config_hash()
    if key not in _instances:
        _instances[key] = build_instance(config)
    return _instances[key]


def trace_filename(seed):
    return f"trace_seed_{seed}.csv"


@dataclass(frozen=True)
class SummaryRow:
    """Outcome of one seed"""
    seed: int
    final_distance: float
    final_objective: float
    final_objective_gap: float
    best_objective: float
    best_objective_gap: float
    min_step_residual: float
    iterations: int
    wall_time_s: float = math.nan


@dataclass
class ExperimentResult:
    """Summary rows and the files a run produced"""
    config: object
    rows: list
    trace_paths: list = field(default_factory=list)
    summary_path: str = None

    def frame(self):
        return summary_frame(self.rows)

    @property
    def final_distances(self):
        return np.array([r.final_distance for r in self.rows])

    @property
    def median_final_distance(self):
        return float(np.median(self.final_distances))

    def count_within(self, tolerance):
        """Number of seeds that ended within tolerance of the reference"""
        return int(np.sum(self.final_distances <= tolerance))


def _gap(value, inf_value):
    if inf_value is None or not math.isfinite(value):
        return math.nan
    return max(0.0, value - inf_value)


def summarize(trace, instance, iterations, wall_time=math.nan):
    """
    Collapse a trace into its summary row

    Args:
        trace (RunTrace): A finished run
        instance (ProblemInstance): Instance the run solved
        iterations (int): Iteration budget of the run
        wall_time (float): Seconds spent, NaN when not recorded

    Returns:
        SummaryRow: Final distance and objective gaps (gaps clamped at 0)
    """
    final = trace.final_point
    final_distance = distance(final, instance.reference) if instance.has_reference else math.nan
    final_objective = float(trace.objectives[-1])
    best = trace.best_objective
    return SummaryRow(
        seed=trace.seed,
        final_distance=final_distance,
        final_objective=final_objective,
        final_objective_gap=_gap(final_objective, instance.inf_value),
        best_objective=best,
        best_objective_gap=_gap(best, instance.inf_value),
        min_step_residual=trace.min_step_residual,
        iterations=iterations,
        wall_time_s=wall_time,
    )


def summary_frame(rows):
    return pd.DataFrame([asdict(r) for r in rows], columns=SUMMARY_COLUMNS)


def run_seed(config, seed, output_dir=None):
    """
    Run SPPA for one seed and write its trace

    Args:
        config (ExperimentConfig): The experiment
        seed (int): Sampler seed
        output_dir (str): Where to write the trace, nothing is written if None

    Returns:
        tuple: (SummaryRow, trace path or None, RunTrace)
    """
    instance = cached_instance(config)
    sampler = instance.sampler(seed)
    logger.info(f"Running {config.problem.value} seed {seed} for {config.iterations} iterations")
    began = time.perf_counter()
    trace = run(
        instance.start,
        sampler,
        config.schedule_obj,
        config.iterations,
        reference=instance.reference,
    )
    elapsed = time.perf_counter() - began
    row = summarize(
        trace,
        instance,
        config.iterations,
        wall_time=elapsed if config.record_wall_time else math.nan,
    )
    path = None
    if output_dir is not None:
        path = write_frame(trace.to_frame(), os.path.join(output_dir, trace_filename(seed)), config)
    logger.info(f"Seed {seed} done: final distance {row.final_distance:.6g}, objective {row.final_objective:.6g}")
    return row, path, trace


def _seed_job(args):
    config, seed, output_dir = args
    row, path, _ = run_seed(config, seed, output_dir)
    return row, path


def map_seeds(job, config, seeds, output_dir, workers):
    """Apply a per-seed job sequentially or in a process pool, keeping seed order"""
    jobs = [(config, seed, output_dir) for seed in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(job, jobs))
    return [job(args) for args in jobs]


def resolve_workers(config, workers=None):
    if workers is not None:
        return int(workers)
    if config.workers is not None:
        return config.workers
    return get_settings().max_workers


def run_experiment(config, workers=None):
    """
    Run every seed of a config and write traces plus summary

    Args:
        config (ExperimentConfig): Validated config
        workers (int): Process count, from the config or SPPA_MAX_WORKERS if None

    Returns:
        ExperimentResult: Summary rows and written paths
    """
    output_dir = ensure_directory(config.output_dir)
    instance = cached_instance(config)
    workers = resolve_workers(config, workers)
    logger.info(
        f"Experiment {config.config_hash()[:12]}: {len(config.seeds)} seed(s), "
        f"{config.iterations} iterations, {workers} worker(s), reference {instance.reference!r}"
    )
    results = map_seeds(_seed_job, config, config.seeds, output_dir, workers)
    rows = [row for row, _ in results]
    trace_paths = [path for _, path in results]
    summary_path = write_frame(summary_frame(rows), os.path.join(output_dir, "summary.csv"), config)
    logger.info(f"Wrote {len(trace_paths)} trace file(s) and {summary_path}")
    return ExperimentResult(config=config, rows=rows, trace_paths=trace_paths, summary_path=summary_path)
