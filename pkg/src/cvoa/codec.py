"""Codec contract shared by all solution codifications.

A codec owns the genotype representation: how patient zeros are drawn, how
an infected individual replicates into a mutated child, and how fitness is
computed. Genotypes must be immutable, hashable, equality-comparable and
totally ordered (the engine iterates populations in sorted order so that
seeded runs are reproducible).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random
from typing import Any, Protocol, runtime_checkable

from .params import DistanceMode


class EvaluationError(RuntimeError):
    """A fitness evaluation failed (crash, malformed reply, non-finite value).

    Carries whatever partial results the caller attached before aborting.
    """

    def __init__(self, message: str, *, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class EvaluatedIndividual:
    """A genotype paired with its (finite) fitness."""

    genotype: Any
    fitness: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.fitness):
            raise EvaluationError(f"non-finite fitness {self.fitness!r} for {self.genotype!r}")


@runtime_checkable
class Codec(Protocol):
    def generate_patient_zero(self, rng: Random) -> Any:
        ...

    def replicate(self, parent: Any, mode: DistanceMode, traveler_rate: int, rng: Random) -> Any:
        ...

    def fitness(self, genotype: Any) -> float:
        ...

    def distance(self, a: Any, b: Any) -> int:
        """Hamming-style distance used to spread patient zeros apart."""
        ...

    def search_space_size(self) -> int:
        """Cardinality of the genotype space (for evaluated-fraction stats)."""
        ...

    def text(self, genotype: Any) -> str:
        """Human-readable genotype form used in logs and result files."""
        ...
