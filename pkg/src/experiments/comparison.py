"""
SPPA versus the Stochastic Subgradient Method

Both methods run on the same instance, schedule and seeded draw stream, so
iteration i of either method uses the same marginal and the same step.
"""

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.experiments.runner import cached_instance, map_seeds, resolve_workers
from src.experiments.trace_io import ensure_directory, write_frame
from src.solvers.baselines import DIVERGENCE_RADIUS, StochasticSubgradient
from src.solvers.sppa import StochasticProximalPoint
from src.spaces.geometry import distance
from src.spaces.points import EuclideanPoint
from src.utils.exceptions import UnsupportedSpaceError

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = [
    "seed",
    "iter",
    "lambda",
    "marginal_index",
    "sppa_dist_to_reference",
    "subgradient_dist_to_reference",
    "sppa_objective",
    "subgradient_objective",
    "sppa_diverged",
    "subgradient_diverged",
]

COMPARISON_SUMMARY_COLUMNS = [
    "seed",
    "method",
    "final_distance",
    "final_objective",
    "best_objective",
    "diverged",
    "diverged_at",
]


def _diverged_flags(distances):
    # NaN (no reference) never counts as divergence
    with np.errstate(invalid="ignore"):
        return ((distances > DIVERGENCE_RADIUS) | np.isinf(distances)).astype(np.int64)


def _method_row(seed, trace, reference):
    distances = trace.distances
    flagged = _diverged_flags(distances)
    diverged = trace.diverged or bool(flagged.any())
    if trace.diverged:
        final_distance = math.inf
        diverged_at = trace.diverged_at
    else:
        final_distance = distance(trace.final_point, reference) if reference is not None else math.nan
        diverged_at = int(np.argmax(flagged)) + 1 if flagged.any() else None
    return {
        "seed": seed,
        "method": trace.method,
        "final_distance": final_distance,
        "final_objective": float(trace.objectives[-1]),
        "best_objective": trace.best_objective,
        "diverged": int(diverged),
        "diverged_at": diverged_at,
    }


def compare_seed(config, seed):
    """
    Run both methods for one seed

    Returns:
        tuple: (per-iteration DataFrame, [sppa summary dict, subgradient summary dict])
    """
    instance = cached_instance(config)
    sampler = instance.sampler(seed)
    schedule = config.schedule_obj
    objective = sampler.objective
    sppa = StochasticProximalPoint(sampler, schedule).run(
        instance.start, config.iterations, reference=instance.reference, objective=objective, seed=seed
    )
    subgradient = StochasticSubgradient(sampler, schedule).run(
        instance.start, config.iterations, reference=instance.reference, objective=objective, seed=seed
    )
    base = sppa.to_frame()
    other = subgradient.to_frame()
    frame = pd.DataFrame(
        {
            "seed": np.full(len(base), seed, dtype=np.uint64),
            "iter": base["iter"],
            "lambda": base["lambda"],
            "marginal_index": base["marginal_index"],
            "sppa_dist_to_reference": base["dist_to_reference"],
            "subgradient_dist_to_reference": other["dist_to_reference"],
            "sppa_objective": base["objective"],
            "subgradient_objective": other["objective"],
            "sppa_diverged": _diverged_flags(base["dist_to_reference"].to_numpy()),
            "subgradient_diverged": _diverged_flags(other["dist_to_reference"].to_numpy()),
        },
        columns=COMPARISON_COLUMNS,
    )
    if subgradient.diverged:
        frame.loc[frame["iter"] >= subgradient.diverged_at, "subgradient_diverged"] = 1
    rows = [_method_row(seed, sppa, instance.reference), _method_row(seed, subgradient, instance.reference)]
    logger.info(
        f"Seed {seed}: sppa final distance {rows[0]['final_distance']:.6g}, "
        f"subgradient final distance {rows[1]['final_distance']:.6g}"
    )
    return frame, rows


def _compare_job(args):
    config, seed, _ = args
    return compare_seed(config, seed)


@dataclass
class ComparisonResult:
    """Per-iteration comparison, per-seed summary and the files written"""
    config: object
    iterations: pd.DataFrame
    summary: pd.DataFrame
    paths: list = field(default_factory=list)

    def method_summary(self, method):
        return self.summary[self.summary["method"] == method].reset_index(drop=True)

    def subgradient_worse_count(self):
        """Seeds where the subgradient method diverged or ended farther away than SPPA"""
        sppa = self.method_summary("sppa")
        subgradient = self.method_summary("subgradient")
        worse = (subgradient["diverged"] == 1) | (
            subgradient["final_distance"] > sppa["final_distance"]
        )
        return int(worse.sum())


def compare_methods(config, workers=None):
    """
    Run SPPA and the subgradient baseline on identical draw streams

    Args:
        config (ExperimentConfig): Euclidean experiment
        workers (int): Process count, from the config or SPPA_MAX_WORKERS if None

    Returns:
        ComparisonResult: Frames plus the paths of comparison.csv and
        comparison_summary.csv

    Raises:
        UnsupportedSpaceError: For spider problems
    """
    instance = cached_instance(config)
    if not isinstance(instance.start, EuclideanPoint):
        logger.error(f"Cannot compare methods on {config.problem.value}: no subgradients on a spider")
        raise UnsupportedSpaceError(
            f"{config.problem.value} lives on a spider; the subgradient method needs linear structure"
        )
    output_dir = ensure_directory(config.output_dir)
    workers = resolve_workers(config, workers)
    results = map_seeds(_compare_job, config, config.seeds, output_dir, workers)
    iterations = pd.concat([frame for frame, _ in results], ignore_index=True)
    summary = pd.DataFrame(
        [row for _, rows in results for row in rows], columns=COMPARISON_SUMMARY_COLUMNS
    )
    summary["diverged_at"] = summary["diverged_at"].astype("Int64")
    paths = [
        write_frame(iterations, os.path.join(output_dir, "comparison.csv"), config),
        write_frame(summary, os.path.join(output_dir, "comparison_summary.csv"), config),
    ]
    result = ComparisonResult(config=config, iterations=iterations, summary=summary, paths=paths)
    logger.info(
        f"Subgradient method diverged or did worse than SPPA in "
        f"{result.subgradient_worse_count()}/{len(config.seeds)} seed(s)"
    )
    return result
