"""Parallel multi-strain pandemics over a shared recovered/dead ledger.

Each strain is an independent search thread with its own random stream and
patient zero; all strains share one SharedLedger so a genotype killed or
recovered by any strain throttles every other strain too. Patient zeros can
be drawn independently or spread apart by a greedy farthest-point pass so
the strains start in distant regions of the search space.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from random import Random
from typing import Any

from .codec import Codec, EvaluatedIndividual, EvaluationError
from .engine import IterationRecord, Objective, SharedLedger, StrainResult, Termination, run_strain
from .params import EpidemicParameters, validate_parameters

STRAIN_SEED_STRIDE = 1_000_003


class PzStrategy(Enum):
    RANDOM = "random"
    MAX_HAMMING_SPREAD = "max_hamming_spread"


@dataclass(frozen=True)
class MultiStrainConfig:
    parameters: tuple[EpidemicParameters, ...]
    pz_strategy: PzStrategy = PzStrategy.RANDOM

    def __post_init__(self) -> None:
        if not self.parameters:
            raise ValueError("at least one strain required")
        seeds = [p.seed for p in self.parameters]
        if len(set(seeds)) != len(seeds):
            raise ValueError(f"strain seeds must be pairwise distinct, got {seeds}")

    @classmethod
    def uniform(
        cls,
        params: EpidemicParameters,
        strains: int | None = None,
        pz_strategy: PzStrategy = PzStrategy.MAX_HAMMING_SPREAD,
    ) -> "MultiStrainConfig":
        """Same parameters for every strain, seeds fanned out from params.seed."""
        validate_parameters(params)
        n = params.strains if strains is None else strains
        per_strain = tuple(
            replace(params, seed=params.seed + j * STRAIN_SEED_STRIDE) for j in range(n)
        )
        return cls(parameters=per_strain, pz_strategy=pz_strategy)


@dataclass
class PandemicResult:
    best: EvaluatedIndividual | None
    strains: list[StrainResult]
    history: list[IterationRecord]
    initial_best: float | None
    evaluations_total: int
    dead_total: int
    recovered_total: int
    termination: Termination | None


def seed_patient_zeros(n: int, codec: Codec, strategy: PzStrategy, rng: Random) -> list:
    """n starting genotypes; MAX_HAMMING_SPREAD greedily maximizes the
    minimum pairwise codec distance over a pool of 50*n random draws."""
    if n < 1:
        raise ValueError(f"need at least one patient zero, got {n}")
    if n > codec.search_space_size():
        raise ValueError(f"{n} patient zeros exceed search space size")
    if strategy is PzStrategy.RANDOM or n == 1:
        return [codec.generate_patient_zero(rng) for _ in range(n)]
    pool = [codec.generate_patient_zero(rng) for _ in range(50 * n)]
    chosen = [pool[rng.randrange(len(pool))]]
    while len(chosen) < n:
        best_candidate = None
        best_distance = -1
        for candidate in pool:
            d = min(codec.distance(candidate, picked) for picked in chosen)
            if d > best_distance:
                best_candidate = candidate
                best_distance = d
        chosen.append(best_candidate)
    return chosen


def _merge_histories(
    per_strain: list[list[IterationRecord]], objective: Objective
) -> list[IterationRecord]:
    """Pandemic-level trace: infected counts summed, cumulative counters and
    the best fitness carried monotonically across strains."""
    depth = max((len(h) for h in per_strain), default=0)
    merged: list[IterationRecord] = []
    prev_best: float | None = None
    prev_deaths = 0
    prev_recovered = 0
    prev_evaluations = 0
    for i in range(depth):
        rows = [h[i] for h in per_strain if len(h) > i]
        infected = sum(r.infected_count for r in rows)
        deaths = max([r.deaths_total for r in rows] + [prev_deaths])
        recovered = max([r.recovered_total for r in rows] + [prev_recovered])
        evaluations = max([r.evaluations_total for r in rows] + [prev_evaluations])
        fitness = rows[0].best_fitness
        for r in rows[1:]:
            if objective.better(r.best_fitness, fitness):
                fitness = r.best_fitness
        if prev_best is not None and objective.better(prev_best, fitness):
            fitness = prev_best
        merged.append(
            IterationRecord(
                iteration=i + 1,
                deaths_total=deaths,
                recovered_total=recovered,
                infected_count=infected,
                best_fitness=fitness,
                evaluations_total=evaluations,
            )
        )
        prev_best = fitness
        prev_deaths = deaths
        prev_recovered = recovered
        prev_evaluations = evaluations
    return merged


def run_pandemic(
    config: MultiStrainConfig,
    codec: Codec,
    *,
    stop_fitness: float | None = None,
) -> PandemicResult:
    """Run all strains concurrently against one shared ledger.

    The global best is merged after all strains join. An evaluation error in
    any strain cancels the others; the raised error carries a PandemicResult
    with whatever partial histories were produced.
    """
    for params in config.parameters:
        validate_parameters(params)
    strains = len(config.parameters)
    base = config.parameters[0]
    objective = base.objective
    shared = SharedLedger()
    pandemic_rng = Random(base.seed)

    if strains == 1:
        # degenerate case: hand the seeding rng straight to the strain so the
        # result matches a standalone run_strain with the same seed; peek at
        # the upcoming patient zero without disturbing the stream
        state = pandemic_rng.getstate()
        preview = codec.generate_patient_zero(pandemic_rng)
        pandemic_rng.setstate(state)
        pzs: list = [None]
        strain_rngs = [pandemic_rng]
        initial_pzs = [preview]
    else:
        pzs = seed_patient_zeros(strains, codec, config.pz_strategy, pandemic_rng)
        strain_rngs = [Random(p.seed) for p in config.parameters]
        initial_pzs = pzs

    initial_best: float | None = None
    try:
        for pz in initial_pzs:
            fitness = shared.evaluate(codec, pz)
            if initial_best is None or objective.better(fitness, initial_best):
                initial_best = fitness
    except EvaluationError as exc:
        exc.partial = PandemicResult(
            best=None,
            strains=[],
            history=[],
            initial_best=initial_best,
            evaluations_total=shared.evaluations_total(),
            dead_total=0,
            recovered_total=0,
            termination=None,
        )
        raise

    stop_event = threading.Event()
    goal_event = threading.Event()
    results: list[StrainResult | None] = [None] * strains
    first_error: list[EvaluationError | None] = [None]

    def work(index: int) -> None:
        try:
            results[index] = run_strain(
                config.parameters[index],
                codec,
                strain_rngs[index],
                shared,
                patient_zero=pzs[index],
                stop_event=stop_event,
                goal_event=goal_event,
                stop_fitness=stop_fitness,
            )
        except EvaluationError as exc:
            if first_error[0] is None:
                first_error[0] = exc
            stop_event.set()
            if isinstance(exc.partial, StrainResult):
                results[index] = exc.partial

    if strains == 1:
        work(0)
    else:
        with ThreadPoolExecutor(max_workers=strains) as pool:
            for future in [pool.submit(work, j) for j in range(strains)]:
                future.result()

    completed = [r for r in results if r is not None]
    bests = [r.best for r in completed if r.best is not None]
    best: EvaluatedIndividual | None = bests[0] if bests else None
    for candidate in bests[1:]:
        if objective.better(candidate.fitness, best.fitness):
            best = candidate

    dead_total, recovered_total = shared.counts()
    if any(r.termination is None for r in completed) or len(completed) < strains:
        termination: Termination | None = None
    elif all(r.termination is Termination.EXTINCTION for r in completed):
        termination = Termination.EXTINCTION
    else:
        termination = Termination.DURATION_REACHED

    result = PandemicResult(
        best=best,
        strains=[r for r in results if r is not None],
        history=_merge_histories([r.history for r in completed], objective),
        initial_best=initial_best,
        evaluations_total=shared.evaluations_total(),
        dead_total=dead_total,
        recovered_total=recovered_total,
        termination=termination,
    )
    error = first_error[0]
    if error is not None:
        error.partial = result
        raise error
    return result
