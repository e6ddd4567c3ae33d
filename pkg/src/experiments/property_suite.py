"""
Counted Property Suite

Randomized checks of the geometry axioms, the resolvent closed forms and
the run-level invariants. Each suite takes a trial count and a numpy
Generator and returns a PropertyResult; `run_property_suite` runs them all
with independent seeded streams. The same functions back the `check`
subcommand and the test suite.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from src.solvers.baselines import cyclic_ppa_run
from src.solvers.diagnostics import conditional_descent, growth_probe, step_residual
from src.solvers.marginals import AbsAffine, NormDist, PowerDist, RegSqAffine, SqAffine
from src.solvers.resolvents import ProxRequest, lemma_residual, probe_oracle, prox, prox_objective
from src.solvers.sampler import Sampler
from src.solvers.schedules import StepSchedule
from src.solvers.sppa import run
from src.spaces import space_for
from src.spaces.euclidean import EuclideanSpace
from src.spaces.frechet import (
    WeightedSample,
    frechet_mean_oracle,
    frechet_median_oracle,
    grid_search_oracle,
)
from src.spaces.geometry import (
    CAT0_ABS_TOL,
    batch_distance,
    cat0_residual,
    distance,
    geodesic_point,
    geodesic_speed_residual,
)
from src.spaces.points import EuclideanPoint, SpiderPoint, SPIDER_ORIGIN
from src.spaces.spider import SpiderSpace
from src.utils.exceptions import DegenerateMedianError, ScheduleError

logger = logging.getLogger(__name__)

EUCLIDEAN_DIMS = (1, 2, 5)
SPIDER_LEGS = (3, 5)
PROX_VARIANTS = (
    "norm-dist",
    "abs-affine",
    "abs-affine-zero",
    "sq-affine",
    "reg-sq-affine",
    "power-dist-q1",
    "power-dist-q2",
    "power-dist-euclidean",
)
LEMMA_TOL = 1e-9
PROBE_TOL = 1e-9
GRID_STEP = 1e-3


@dataclass(frozen=True)
class PropertyResult:
    """Outcome of one counted property"""
    name: str
    passed: bool
    trials: int
    worst: float
    tolerance: float
    detail: str = ""
    elapsed_s: float = field(default=math.nan, compare=False)

    def as_row(self):
        return [self.name, "PASS" if self.passed else "FAIL", self.trials, self.worst, self.tolerance, self.detail]


def _spaces():
    return [EuclideanSpace(d) for d in EUCLIDEAN_DIMS] + [SpiderSpace(k) for k in SPIDER_LEGS]


def _point(space, rng, scale=3.0):
    # Spider draws hit the origin now and then so the cone point is exercised
    if isinstance(space, SpiderSpace) and rng.uniform() < 0.1:
        return SPIDER_ORIGIN
    return space.random_point(rng, scale)


def random_request(variant, rng):
    """
    Random resolvent request of one marginal class

    Returns:
        tuple: (ProxRequest, space of the request)
    """
    lam = float(10.0 ** rng.uniform(-2.0, 1.0))
    if variant in ("power-dist-q1", "power-dist-q2"):
        space = SpiderSpace(int(rng.choice([3, 4, 5])))
        q = 1 if variant == "power-dist-q1" else 2
        marginal = PowerDist(_point(space, rng), q)
        return ProxRequest(_point(space, rng), lam, marginal), space

    space = EuclideanSpace(int(rng.choice(EUCLIDEAN_DIMS)))
    d = space.dim
    x = space.random_point(rng, 3.0)
    if variant == "norm-dist":
        marginal = NormDist(space.random_point(rng, 3.0))
    elif variant == "abs-affine":
        marginal = AbsAffine(rng.uniform(-2.0, 2.0, d), rng.uniform(-3.0, 3.0))
    elif variant == "abs-affine-zero":
        marginal = AbsAffine(np.zeros(d), rng.uniform(-3.0, 3.0))
    elif variant == "sq-affine":
        marginal = SqAffine(rng.uniform(-2.0, 2.0, d), rng.uniform(-3.0, 3.0))
    elif variant == "reg-sq-affine":
        marginal = RegSqAffine(rng.uniform(-2.0, 2.0, d), rng.uniform(-3.0, 3.0), float(10.0 ** rng.uniform(-2.0, 1.0)))
    elif variant == "power-dist-euclidean":
        marginal = PowerDist(space.random_point(rng, 3.0), int(rng.choice([1, 2])))
    else:
        raise ValueError(f"Unknown variant {variant}")
    return ProxRequest(x, lam, marginal), space


def _companion(req, space, rng):
    """Another point of the request's space, spider legs beyond the target included"""
    if isinstance(space, SpiderSpace):
        covering = space_for(req.x, req.marginal.anchor(req.x), spare_legs=1)
        space = SpiderSpace(max(space.legs, covering.legs))
    return _point(space, rng)


# Geometry


def cat0_inequality(trials, rng):
    worst = math.inf
    for space in _spaces():
        for _ in range(trials):
            z, x, y = _point(space, rng), _point(space, rng), _point(space, rng)
            worst = min(worst, cat0_residual(z, x, y, rng.uniform()))
    return PropertyResult("cat0_inequality", worst >= -CAT0_ABS_TOL, trials * len(_spaces()), worst, -CAT0_ABS_TOL,
                          "min of RHS - LHS")


def geodesic_speed(trials, rng):
    worst = 0.0
    for space in _spaces():
        for _ in range(trials):
            x, y = _point(space, rng), _point(space, rng)
            error = geodesic_speed_residual(x, y, rng.uniform(), rng.uniform())
            worst = max(worst, error / (1.0 + distance(x, y)))
    return PropertyResult("geodesic_speed", worst <= 1e-10, trials * len(_spaces()), worst, 1e-10,
                          "max |d(g(s),g(t)) - |s-t| d| / (1 + d)")


def geodesic_endpoints(trials, rng):
    worst = 0.0
    for space in _spaces():
        for _ in range(trials):
            x, y = _point(space, rng), _point(space, rng)
            t = rng.uniform()
            p = geodesic_point(x, y, t)
            total = distance(x, y)
            error = max(abs(distance(x, p) - t * total), abs(distance(p, y) - (1.0 - t) * total))
            worst = max(worst, error / max(1.0, total))
            if geodesic_point(x, y, 0.0) != x or geodesic_point(x, y, 1.0) != y:
                worst = math.inf
    return PropertyResult("geodesic_endpoints", worst <= 1e-12, trials * len(_spaces()), worst, 1e-12,
                          "relative error of d(x,p) and d(p,y)")


def metric_axioms(trials, rng):
    worst = 0.0
    for space in _spaces():
        for _ in range(trials):
            x, y, z = _point(space, rng), _point(space, rng), _point(space, rng)
            asymmetry = abs(distance(x, y) - distance(y, x))
            excess = distance(x, z) - distance(x, y) - distance(y, z)
            worst = max(worst, asymmetry, excess, 0.0 if distance(x, x) == 0.0 else math.inf)
    return PropertyResult("metric_axioms", worst <= 1e-12, trials * len(_spaces()), worst, 1e-12,
                          "symmetry and triangle inequality")


def spider_canonical(trials, rng):
    failures = 0
    checks = 0
    for k in range(3, 3 + max(1, min(trials, 20))):
        for leg in range(0, k + 1):
            checks += 1
            if SpiderPoint(leg, 0.0) != SPIDER_ORIGIN:
                failures += 1
        r = float(rng.uniform(0.1, 3.0))
        checks += 1
        if geodesic_point(SpiderPoint(1, r), SpiderPoint(k, r), 0.5) != SPIDER_ORIGIN:
            failures += 1
    return PropertyResult("spider_canonical_origin", failures == 0, checks, float(failures), 0.0,
                          "radius 0 on any leg equals the origin")


# Resolvents


def prox_certification(trials, rng, probes=None):
    requests = max(1, trials // 100)
    probes = probes or trials
    worst = -math.inf
    for variant in PROX_VARIANTS:
        for _ in range(requests):
            req, _ = random_request(variant, rng)
            closed = prox_objective(req, prox(req))
            probed = prox_objective(req, probe_oracle(req, probes, rng))
            worst = max(worst, closed - probed)
    return PropertyResult("prox_certification", worst <= PROBE_TOL, requests * len(PROX_VARIANTS), worst, PROBE_TOL,
                          f"closed form minus best of {probes} probes")


def resolvent_inequality(trials, rng):
    worst = math.inf
    for variant in PROX_VARIANTS:
        for _ in range(trials):
            req, space = random_request(variant, rng)
            worst = min(worst, lemma_residual(req, _companion(req, space, rng)))
    return PropertyResult("resolvent_inequality", worst >= -LEMMA_TOL, trials * len(PROX_VARIANTS), worst, -LEMMA_TOL,
                          "min of lemma residual")


def nonexpansive(trials, rng):
    worst = -math.inf
    count = 0
    for variant in PROX_VARIANTS:
        for _ in range(trials):
            req, space = random_request(variant, rng)
            other = ProxRequest(_companion(req, space, rng), req.lam, req.marginal)
            gap = distance(req.x, other.x)
            if gap == 0.0:
                continue
            count += 1
            excess = distance(prox(req), prox(other)) - gap * (1.0 + 1e-12)
            worst = max(worst, excess)
    return PropertyResult("nonexpansive", worst <= 1e-12, count, worst, 1e-12,
                          "max d(Jx,Jx') - d(x,x')(1 + 1e-12)")


def descent(trials, rng):
    worst = -math.inf
    for variant in PROX_VARIANTS:
        for _ in range(trials):
            req, _ = random_request(variant, rng)
            value = req.marginal.value(req.x)
            excess = prox_objective(req, prox(req)) - value
            worst = max(worst, excess / max(1.0, abs(value)))
    return PropertyResult("descent", worst <= 1e-12, trials * len(PROX_VARIANTS), worst, 1e-12,
                          "max [f(Jx) + d(x,Jx)^2/(2 lam) - f(x)] / max(1, |f(x)|)")


def small_step_limit(trials, rng):
    worst = 0.0
    for variant in PROX_VARIANTS:
        for _ in range(trials):
            req, _ = random_request(variant, rng)
            tiny = ProxRequest(req.x, 1e-8, req.marginal)
            moved = distance(prox(tiny), req.x)
            worst = max(worst, moved / (1e-4 * (1.0 + abs(req.marginal.value(req.x)))))
    return PropertyResult("small_step_limit", worst <= 1.0, trials * len(PROX_VARIANTS), worst, 1.0,
                          "d(J_1e-8 x, x) / [1e-4 (1 + |f(x)|)]")


def step_inequality(trials, rng):
    worst = math.inf
    for variant in PROX_VARIANTS:
        for _ in range(trials):
            req, space = random_request(variant, rng)
            y = _companion(req, space, rng)
            worst = min(worst, step_residual(req.x, prox(req), req.marginal, req.lam, y))
    return PropertyResult("step_inequality", worst >= -LEMMA_TOL, trials * len(PROX_VARIANTS), worst, -LEMMA_TOL,
                          "min of per-step residual")


# Spider oracles


def _random_sample(rng, legs, size):
    points = [SpiderPoint(int(rng.integers(1, legs + 1)), float(rng.uniform(0.05, 2.0))) for _ in range(size)]
    weights = rng.dirichlet(np.ones(size))
    weights = weights / weights.sum()
    return WeightedSample(points, weights)


def _oracle_vs_grid(trials, rng, q):
    samples = max(1, trials // 50)
    worst = 0.0
    done = 0
    while done < samples:
        legs = int(rng.choice([3, 4, 5]))
        sample = _random_sample(rng, legs, int(rng.integers(1, 9)))
        try:
            exact = frechet_mean_oracle(sample) if q == 2 else frechet_median_oracle(sample)
        except DegenerateMedianError:
            continue
        grid = grid_search_oracle(sample, q, GRID_STEP, SpiderSpace(legs))
        worst = max(worst, distance(exact, grid))
        done += 1
    name = "frechet_mean_vs_grid" if q == 2 else "frechet_median_vs_grid"
    return PropertyResult(name, worst <= 2 * GRID_STEP, samples, worst, 2 * GRID_STEP,
                          f"max distance to grid argmin, step {GRID_STEP}")


def frechet_mean_vs_grid(trials, rng):
    return _oracle_vs_grid(trials, rng, 2)


def frechet_median_vs_grid(trials, rng):
    return _oracle_vs_grid(trials, rng, 1)


def oracle_optimality(trials, rng):
    samples = max(1, trials // 50)
    worst = -math.inf
    done = 0
    while done < samples:
        legs = int(rng.choice([3, 4, 5]))
        sample = _random_sample(rng, legs, int(rng.integers(1, 9)))
        space = SpiderSpace(legs)
        candidates = space.sample_ball(rng, SPIDER_ORIGIN, 2.5, 1000)
        for q, oracle in ((2, frechet_mean_oracle), (1, frechet_median_oracle)):
            try:
                best = oracle(sample)
            except DegenerateMedianError:
                continue
            at_best = sum(w * distance(best, t) ** q for t, w in zip(sample.points, sample.weights))
            values = sum(w * batch_distance(candidates, t) ** q for t, w in zip(sample.points, sample.weights))
            worst = max(worst, at_best - float(values.min()))
        done += 1
    return PropertyResult("frechet_oracle_optimality", worst <= 1e-12, samples, worst, 1e-12,
                          "oracle objective minus best of 1000 random points")


# Engine


def growth_bounds(trials, rng):
    worst = -math.inf
    for _ in range(3):
        d = int(rng.choice([1, 2, 5]))
        centers = [NormDist(rng.uniform(-3.0, 3.0, d)) for _ in range(5)]
        estimate = growth_probe(Sampler(centers), EuclideanPoint(rng.uniform(-3.0, 3.0, d)), trials, rng)
        worst = max(worst, estimate.max_constant - 1.0)

        rows = [AbsAffine(rng.uniform(-2.0, 2.0, d), rng.uniform(-3.0, 3.0)) for _ in range(5)]
        rows.append(AbsAffine(np.zeros(d), 0.0))
        estimate = growth_probe(Sampler(rows), EuclideanPoint(rng.uniform(-3.0, 3.0, d)), trials, rng)
        bounds = np.array([math.sqrt(m.a_norm_sq) for m in rows])
        worst = max(worst, float(np.max(estimate.constants - bounds)))
        if estimate.constants[-1] != 0.0:
            worst = math.inf
    return PropertyResult("growth_probe_bounds", worst <= 1e-9, 6 * trials, worst, 1e-9,
                          "max L-hat minus the Lipschitz constant")


def schedule_validity(trials, rng):
    failures = []
    for p in (0.51, 0.75, 1.0):
        try:
            StepSchedule(1.0, p, 1)
        except ScheduleError:
            failures.append(f"p={p} rejected")
    for p, condition in ((0.5, "square_summable"), (1.1, "divergent_sum"), (0.25, "square_summable")):
        try:
            StepSchedule(1.0, p, 1)
            failures.append(f"p={p} accepted")
        except ScheduleError as e:
            if e.condition != condition:
                failures.append(f"p={p} reported {e.condition}")
    return PropertyResult("schedule_validity", not failures, 6, float(len(failures)), 0.0,
                          "; ".join(failures) or "p in (1/2, 1] only")


def _random_least_squares(rng, d=3, rows=6):
    marginals = [SqAffine(rng.uniform(-2.0, 2.0, d), rng.uniform(-3.0, 3.0)) for _ in range(rows)]
    return marginals, EuclideanPoint(rng.uniform(-3.0, 3.0, d))


def run_determinism(trials, rng):
    iterations = max(10, trials // 10)
    marginals, start = _random_least_squares(rng)
    seed = int(rng.integers(0, 2 ** 63))
    first = run(start, Sampler(marginals, seed=seed), StepSchedule(), iterations)
    second = run(start, Sampler(marginals, seed=seed), StepSchedule(), iterations)
    same = first.to_frame().equals(second.to_frame()) and first.points == second.points
    return PropertyResult("run_determinism", same, iterations, 0.0 if same else 1.0, 0.0,
                          "identical traces for identical inputs")


def point_mass_reduction(trials, rng):
    iterations = max(10, trials // 100)
    mismatches = 0
    for variant in PROX_VARIANTS:
        req, _ = random_request(variant, rng)
        schedule = StepSchedule(float(rng.uniform(0.1, 3.0)), 1.0, 1)
        sppa = run(req.x, Sampler([req.marginal], seed=int(rng.integers(0, 2 ** 63))), schedule, iterations)
        cyclic = cyclic_ppa_run(req.x, [req.marginal], schedule, iterations)
        if sppa.points != cyclic.points:
            mismatches += 1
    return PropertyResult("point_mass_reduction", mismatches == 0, len(PROX_VARIANTS), float(mismatches), 0.0,
                          "one-marginal SPPA equals cyclic PPA")


def conditional_expectation(trials, rng):
    worst = math.inf
    count = max(1, trials // 100)
    for _ in range(count):
        marginals, x = _random_least_squares(rng)
        sampler = Sampler(marginals)
        y = EuclideanPoint(rng.uniform(-3.0, 3.0, x.dim))
        lam = float(10.0 ** rng.uniform(-2.0, 1.0))
        worst = min(worst, conditional_descent(x, sampler, lam, y).slack)

        space = SpiderSpace(4)
        targets = [PowerDist(_point(space, rng), int(rng.choice([1, 2]))) for _ in range(4)]
        result = conditional_descent(_point(space, rng), Sampler(targets), lam, _point(space, rng))
        worst = min(worst, result.slack)
    return PropertyResult("conditional_descent", worst >= -LEMMA_TOL, 2 * count, worst, -LEMMA_TOL,
                          "min of bound - E[d(x+, y)^2]")


SUITES = {
    "cat0_inequality": cat0_inequality,
    "geodesic_speed": geodesic_speed,
    "geodesic_endpoints": geodesic_endpoints,
    "metric_axioms": metric_axioms,
    "spider_canonical_origin": spider_canonical,
    "frechet_mean_vs_grid": frechet_mean_vs_grid,
    "frechet_median_vs_grid": frechet_median_vs_grid,
    "frechet_oracle_optimality": oracle_optimality,
    "prox_certification": prox_certification,
    "resolvent_inequality": resolvent_inequality,
    "nonexpansive": nonexpansive,
    "descent": descent,
    "small_step_limit": small_step_limit,
    "step_inequality": step_inequality,
    "growth_probe_bounds": growth_bounds,
    "schedule_validity": schedule_validity,
    "run_determinism": run_determinism,
    "point_mass_reduction": point_mass_reduction,
    "conditional_descent": conditional_expectation,
}


def run_property_suite(trials=10000, seed=0, names=None):
    """
    Run the counted property suites

    Args:
        trials (int): Base trial count; fixed-size suites scale from it
        seed (int): Seed of the per-suite numpy streams
        names (list): Subset of SUITES to run, all if None

    Returns:
        list: PropertyResult per suite, in registry order
    """
    results = []
    for index, (name, suite) in enumerate(SUITES.items()):
        if names is not None and name not in names:
            continue
        rng = np.random.default_rng([seed, index])
        began = time.perf_counter()
        result = replace(suite(trials, rng), elapsed_s=time.perf_counter() - began)
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"{name}: {'PASS' if result.passed else 'FAIL'} (worst {result.worst:.3e}, {result.trials} trials, {result.elapsed_s:.1f} s)")
        results.append(result)
    return results
