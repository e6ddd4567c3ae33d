"""
Experiment Config Schema

Validated form of an INI experiment file. Every output file carries the
SHA-256 of this model's canonical JSON (output directory excluded), so a
result can always be traced back to the config that produced it.
"""

import hashlib
import json
from collections import Counter
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.solvers.schedules import StepSchedule
from src.utils.rng import MASK64


class ProblemKind(str, Enum):
    MEDIAN = "median"
    ABS_REGRESSION = "abs-regression"
    LEAST_SQUARES = "least-squares"
    REG_LEAST_SQUARES = "reg-least-squares"
    SPIDER_MEAN = "spider-mean"
    SPIDER_MEDIAN = "spider-median"

    @property
    def is_spider(self):
        return self in (ProblemKind.SPIDER_MEAN, ProblemKind.SPIDER_MEDIAN)


class ScheduleSpec(BaseModel):
    """Step schedule lambda_i = c / (i + i0 - 1)^p"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    c: float = 1.0
    p: float = 1.0
    i0: int = 1

    @model_validator(mode="after")
    def check_series(self):
        # ScheduleError is a ValueError, so pydantic reports it as a validation error
        self.build()
        return self

    def build(self):
        return StepSchedule(self.c, self.p, self.i0)


class DataSpec(BaseModel):
    """Inline problem data"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    points: Optional[List[List[float]]] = None
    spider_points: Optional[List[Tuple[int, float]]] = None
    matrix: Optional[List[List[float]]] = None
    rhs: Optional[List[float]] = None
    weights: Optional[List[float]] = None

    @field_validator("matrix")
    @classmethod
    def rectangular(cls, rows):
        if rows is not None and len({len(r) for r in rows}) > 1:
            raise ValueError("matrix rows must all have the same length")
        return rows

    @field_validator("points")
    @classmethod
    def same_dimension(cls, points):
        if points is not None and len({len(p) for p in points}) > 1:
            raise ValueError("points must all have the same dimension")
        return points

    @field_validator("spider_points")
    @classmethod
    def valid_spider_points(cls, points):
        for leg, radius in points or []:
            if leg < 1 or radius <= 0.0:
                raise ValueError(f"spider point {leg}:{radius} needs leg >= 1 and radius > 0")
        return points

    @field_validator("weights")
    @classmethod
    def positive_weights(cls, weights):
        if weights is not None and any(w <= 0.0 for w in weights):
            raise ValueError("weights must be strictly positive")
        return weights

    @property
    def size(self):
        for values in (self.points, self.spider_points, self.matrix):
            if values is not None:
                return len(values)
        return 0


class GeneratorSpec(BaseModel):
    """Seeded synthetic data: count items with coordinates in [low, high)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    count: int = Field(ge=1)
    seed: int = Field(ge=0, le=MASK64)
    low: float = -1.0
    high: float = 1.0
    noise: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def ordered_range(self):
        if not self.low < self.high:
            raise ValueError(f"generator range needs low < high, got [{self.low}, {self.high})")
        return self


class ExperimentConfig(BaseModel):
    """One experiment: problem, data, schedule, budget and seeds"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    problem: ProblemKind
    iterations: int = Field(ge=1)
    seeds: List[int] = Field(min_length=1)
    dimension: Optional[int] = Field(default=None, ge=1)
    legs: Optional[int] = Field(default=None, ge=3)
    mu: Optional[float] = Field(default=None, gt=0.0)
    start: Optional[str] = None
    record_wall_time: bool = False
    workers: Optional[int] = Field(default=None, ge=1)
    data: Optional[DataSpec] = None
    generator: Optional[GeneratorSpec] = None
    schedule: ScheduleSpec = Field(default_factory=ScheduleSpec)
    output_dir: str = "results"

    @field_validator("seeds")
    @classmethod
    def unsigned_64bit(cls, seeds):
        for seed in seeds:
            if seed < 0 or seed > MASK64:
                raise ValueError(f"seed {seed} is outside the unsigned 64-bit range")
        repeated = sorted(seed for seed, count in Counter(seeds).items() if count > 1)
        if repeated:
            raise ValueError(f"duplicate seeds: {repeated}")
        return seeds

    @model_validator(mode="after")
    def problem_fields_present(self):
        if (self.data is None) == (self.generator is None):
            raise ValueError("exactly one of [data] and [generator] must be given")
        if self.problem is ProblemKind.REG_LEAST_SQUARES and self.mu is None:
            raise ValueError("reg-least-squares needs mu > 0")
        if self.problem is not ProblemKind.REG_LEAST_SQUARES and self.mu is not None:
            raise ValueError(f"mu only applies to reg-least-squares, not {self.problem.value}")

        if self.problem.is_spider:
            if self.dimension is not None:
                raise ValueError("spider problems take legs, not dimension")
            if self.generator is not None and self.legs is None:
                raise ValueError("generated spider samples need legs")
            if self.data is not None:
                self._check_spider_data()
        else:
            if self.legs is not None:
                raise ValueError("Euclidean problems take dimension, not legs")
            if self.generator is not None and self.dimension is None:
                raise ValueError("generated Euclidean data needs dimension")
            if self.data is not None:
                self._check_euclidean_data()

        if self.data is not None and self.data.weights is not None:
            if len(self.data.weights) != self.data.size:
                raise ValueError(f"{len(self.data.weights)} weights for {self.data.size} data items")
        return self

    def _check_spider_data(self):
        if not self.data.spider_points:
            raise ValueError(f"{self.problem.value} needs spider points")
        top = max(leg for leg, _ in self.data.spider_points)
        if self.legs is not None and top > self.legs:
            raise ValueError(f"spider point on leg {top} but the spider has {self.legs} legs")

    def _check_euclidean_data(self):
        if self.problem is ProblemKind.MEDIAN:
            if not self.data.points:
                raise ValueError("median needs points")
            dim = len(self.data.points[0])
        else:
            if not self.data.matrix or self.data.rhs is None:
                raise ValueError(f"{self.problem.value} needs matrix and rhs")
            if len(self.data.rhs) != len(self.data.matrix):
                raise ValueError(f"{len(self.data.matrix)} matrix rows but {len(self.data.rhs)} rhs entries")
            dim = len(self.data.matrix[0])
        if self.dimension is not None and self.dimension != dim:
            raise ValueError(f"dimension {self.dimension} does not match data dimension {dim}")

    @property
    def schedule_obj(self):
        return self.schedule.build()

    def canonical_json(self):
        """Sorted, compact JSON of everything that affects results"""
        payload = self.model_dump(mode="json", exclude={"output_dir"})
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def with_overrides(self, seeds=None, iterations=None, output_dir=None):
        """
        Copy of the config with command-line overrides applied and revalidated

        Args:
            seeds (list): Replacement seed list
            iterations (int): Replacement iteration budget
            output_dir (str): Replacement output directory

        Returns:
            ExperimentConfig: The overridden config
        """
        payload = self.model_dump()
        if seeds is not None:
            payload["seeds"] = list(seeds)
        if iterations is not None:
            payload["iterations"] = iterations
        if output_dir is not None:
            payload["output_dir"] = output_dir
        return ExperimentConfig.model_validate(payload)
