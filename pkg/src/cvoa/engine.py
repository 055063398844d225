"""Single-strain epidemic search loop.

One strain starts from a patient zero and iterates: the dying are removed
from the infected set and buried, every surviving spreader produces
candidate infections through the codec's replicate operator, candidates are
routed through isolation / reinfection bookkeeping, the newly evaluated
individuals update the best-so-far, survivors recover, and the new
infections become the next generation. The run ends when the infected set
empties (extinction) or the configured duration elapses.

All population iteration happens in sorted genotype order, so a fixed seed
reproduces a run exactly.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from random import Random
from typing import Any, Iterable

from .codec import Codec, EvaluatedIndividual, EvaluationError
from .params import DistanceMode, EpidemicParameters, Objective


class Disposition(Enum):
    ADDED_TO_NEW_INFECTED = "added_to_new_infected"
    ISOLATED = "isolated"
    REINFECTED = "reinfected"
    IGNORED = "ignored"


class Termination(Enum):
    EXTINCTION = "extinction"
    DURATION_REACHED = "duration_reached"


class SharedLedger:
    """Recovered/dead membership plus the fitness memo, shareable by strains.

    A single lock guards every compound transition, so the disjointness of
    dead and recovered and the remove-then-add step of reinfection are
    atomic even when several strains work against the same ledger.
    """

    def __init__(self) -> None:
        self.recovered: set = set()
        self.dead: set = set()
        self.fitness_cache: dict[Any, float] = {}
        self.lock = threading.RLock()

    def bury(self, genotype: Any) -> None:
        with self.lock:
            self.dead.add(genotype)
            self.recovered.discard(genotype)

    def recover(self, genotype: Any) -> None:
        with self.lock:
            if genotype not in self.dead:
                self.recovered.add(genotype)

    def counts(self) -> tuple[int, int]:
        with self.lock:
            return len(self.dead), len(self.recovered)

    def evaluations_total(self) -> int:
        with self.lock:
            return len(self.fitness_cache)

    def evaluate(self, codec: Codec, genotype: Any) -> float:
        """Memoized fitness; a non-finite result is an error, never cached."""
        with self.lock:
            if genotype in self.fitness_cache:
                return self.fitness_cache[genotype]
        value = codec.fitness(genotype)
        if not math.isfinite(value):
            raise EvaluationError(f"non-finite fitness {value!r} for {genotype!r}")
        with self.lock:
            return self.fitness_cache.setdefault(genotype, value)


@dataclass
class PopulationLedger:
    """One strain's populations: its own infected sets plus the shared half."""

    shared: SharedLedger
    infected: set = field(default_factory=set)
    new_infected: set = field(default_factory=set)
    isolated_now: set = field(default_factory=set)

    @property
    def recovered(self) -> set:
        return self.shared.recovered

    @property
    def dead(self) -> set:
        return self.shared.dead


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    deaths_total: int
    recovered_total: int
    infected_count: int
    best_fitness: float
    evaluations_total: int


@dataclass
class StrainResult:
    best: EvaluatedIndividual | None
    history: list[IterationRecord]
    termination: Termination | None
    cancelled: bool = False


def die(infected: Iterable[Any], params: EpidemicParameters, rng: Random) -> set:
    """Select each infected individual for death independently with p_die."""
    return {g for g in sorted(infected) if rng.random() < params.p_die}


def new_infection(
    candidate: Any,
    ledger: PopulationLedger,
    params: EpidemicParameters,
    rng: Random,
) -> Disposition:
    """Route one candidate: ignore the dead, isolate or admit the fresh,
    and give recovered candidates their reinfection chance."""
    shared = ledger.shared
    with shared.lock:
        if candidate in shared.dead:
            return Disposition.IGNORED
        if candidate not in shared.recovered:
            if rng.random() > params.p_isolation:
                ledger.new_infected.add(candidate)
                return Disposition.ADDED_TO_NEW_INFECTED
            shared.recovered.add(candidate)
            ledger.isolated_now.add(candidate)
            return Disposition.ISOLATED
        if rng.random() < params.p_reinfection:
            shared.recovered.remove(candidate)
            ledger.new_infected.add(candidate)
            return Disposition.REINFECTED
        return Disposition.IGNORED


def infect(
    individual: Any,
    ledger: PopulationLedger,
    params: EpidemicParameters,
    codec: Codec,
    rng: Random,
) -> set:
    """Spread from one individual: one travel draw and one super-spreader
    draw decide the move distance and the candidate count for the whole
    brood; each candidate is routed through new_infection."""
    traveling = rng.random() < params.p_travel
    super_spreading = rng.random() < params.p_superspreader
    lo, hi = (
        params.superspreader_spread_range if super_spreading else params.ordinary_spread_range
    )
    count = rng.randint(lo, hi)
    mode = DistanceMode.TRAVELER if traveling else DistanceMode.ORDINARY
    added: set = set()
    for _ in range(count):
        candidate = codec.replicate(individual, mode, params.traveler_rate, rng)
        disposition = new_infection(candidate, ledger, params, rng)
        if disposition in (Disposition.ADDED_TO_NEW_INFECTED, Disposition.REINFECTED):
            added.add(candidate)
    return added


def select_best(
    population: Iterable[EvaluatedIndividual], objective: Objective
) -> EvaluatedIndividual:
    """Optimal individual under the objective; ties go to the smallest
    genotype in its natural order, so repeated runs agree."""
    ordered = sorted(population, key=lambda e: e.genotype)
    if not ordered:
        raise ValueError("select_best on empty population")
    if objective is Objective.MINIMIZE:
        return min(ordered, key=lambda e: e.fitness)
    return max(ordered, key=lambda e: e.fitness)


def run_strain(
    params: EpidemicParameters,
    codec: Codec,
    rng: Random,
    shared_ledger: SharedLedger | None = None,
    *,
    patient_zero: Any = None,
    stop_event: threading.Event | None = None,
    goal_event: threading.Event | None = None,
    stop_fitness: float | None = None,
) -> StrainResult:
    """Run one strain to extinction or for pandemic_duration iterations.

    A shared ledger makes the strain participate in a multi-strain pandemic;
    without one the strain owns a private ledger. `stop_event` lets a
    coordinator cancel the strain between iterations (error path), while
    `goal_event` plus `stop_fitness` implement cooperative early exit once
    any strain's best is at least that good (benchmark sweeps that only
    measure time-to-optimum use this).
    """
    shared = shared_ledger if shared_ledger is not None else SharedLedger()
    ledger = PopulationLedger(shared=shared)
    objective = params.objective
    pz = patient_zero if patient_zero is not None else codec.generate_patient_zero(rng)
    history: list[IterationRecord] = []

    def reached_goal(fitness: float) -> bool:
        if stop_fitness is None:
            return False
        return not objective.better(stop_fitness, fitness)

    try:
        best = EvaluatedIndividual(pz, shared.evaluate(codec, pz))
    except EvaluationError as exc:
        exc.partial = StrainResult(best=None, history=history, termination=None)
        raise
    ledger.infected = {pz}
    if reached_goal(best.fitness) and goal_event is not None:
        goal_event.set()

    iteration = 0
    cancelled = False
    while iteration < params.pandemic_duration and ledger.infected:
        if stop_event is not None and stop_event.is_set():
            cancelled = True
            break
        if goal_event is not None and goal_event.is_set():
            break
        iteration += 1

        dying = die(ledger.infected, params, rng)
        ledger.infected -= dying
        for genotype in sorted(dying):
            shared.bury(genotype)

        ledger.new_infected = set()
        ledger.isolated_now = set()
        for spreader in sorted(ledger.infected):
            infect(spreader, ledger, params, codec, rng)

        fresh = sorted(ledger.new_infected) + sorted(ledger.isolated_now - ledger.new_infected)
        newly_evaluated: list[EvaluatedIndividual] = []
        for genotype in fresh:
            try:
                fitness = shared.evaluate(codec, genotype)
            except EvaluationError as exc:
                exc.partial = StrainResult(best=best, history=history, termination=None)
                raise
            newly_evaluated.append(EvaluatedIndividual(genotype, fitness))
        if newly_evaluated:
            challenger = select_best(newly_evaluated, objective)
            if objective.better(challenger.fitness, best.fitness):
                best = challenger

        for genotype in sorted(ledger.infected):
            shared.recover(genotype)
        ledger.infected = ledger.new_infected
        ledger.new_infected = set()

        deaths_total, recovered_total = shared.counts()
        history.append(
            IterationRecord(
                iteration=iteration,
                deaths_total=deaths_total,
                recovered_total=recovered_total,
                infected_count=len(ledger.infected),
                best_fitness=best.fitness,
                evaluations_total=shared.evaluations_total(),
            )
        )
        if reached_goal(best.fitness):
            if goal_event is not None:
                goal_event.set()
            break

    if cancelled:
        termination = None
    elif not ledger.infected:
        termination = Termination.EXTINCTION
    else:
        termination = Termination.DURATION_REACHED
    return StrainResult(best=best, history=history, termination=termination, cancelled=cancelled)
