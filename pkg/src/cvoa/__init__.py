"""Epidemic-propagation metaheuristic with pluggable solution codecs.

The search mimics a disease outbreak: infected individuals replicate into
mutated candidates, some die, some isolate, some recover and may be
reinfected, and the best individual ever evaluated is the answer. Several
strains can run concurrently against a shared ledger of dead and recovered
genotypes.
"""

from .binary import (
    BinaryCodec,
    BitGenotype,
    quadratic_fitness,
    random_patient_zero,
    replicate_bits,
    traveler_flip_count,
)
from .codec import Codec, EvaluatedIndividual, EvaluationError
from .engine import (
    Disposition,
    IterationRecord,
    PopulationLedger,
    SharedLedger,
    StrainResult,
    Termination,
    die,
    infect,
    new_infection,
    run_strain,
    select_best,
)
from .multistrain import (
    MultiStrainConfig,
    PandemicResult,
    PzStrategy,
    run_pandemic,
    seed_patient_zeros,
)
from .nn import (
    ArchitectureSpec,
    ExternalEvaluator,
    NetCodec,
    NetGenotype,
    mutate_position,
    parse_net_text,
    replicate_net,
    resize_layers,
    surrogate_fitness,
)
from .params import (
    DistanceMode,
    EpidemicParameters,
    Objective,
    ParameterError,
    validate_parameters,
)

__version__ = "1.0.0"

__all__ = [
    "ArchitectureSpec",
    "BinaryCodec",
    "BitGenotype",
    "Codec",
    "DistanceMode",
    "Disposition",
    "EpidemicParameters",
    "EvaluatedIndividual",
    "EvaluationError",
    "ExternalEvaluator",
    "IterationRecord",
    "MultiStrainConfig",
    "NetCodec",
    "NetGenotype",
    "Objective",
    "PandemicResult",
    "ParameterError",
    "PopulationLedger",
    "PzStrategy",
    "SharedLedger",
    "StrainResult",
    "Termination",
    "die",
    "infect",
    "mutate_position",
    "new_infection",
    "parse_net_text",
    "quadratic_fitness",
    "random_patient_zero",
    "replicate_bits",
    "replicate_net",
    "resize_layers",
    "run_pandemic",
    "run_strain",
    "seed_patient_zeros",
    "select_best",
    "surrogate_fitness",
    "traveler_flip_count",
    "validate_parameters",
    "__version__",
]
