"""Variable-length discrete codification for neural-architecture search.

A genotype holds a learning-rate code, a dropout code and a variable number
of per-layer unit codes. Codes decode through fixed lookup tables:

    lr_code    0..5  -> 0, 0.1, 0.01, 0.001, 0.0001, 0.00001
    drop_code  0..8  -> 0, 0.10, 0.15, ..., 0.45
    layer code 0..11 -> 25 * (code + 1) units (25..300)

Two fitness paths are provided: a surrogate distance to a hidden target
genotype (desk-scale stand-in for model training) and a bridge that ships
the decoded architecture to an external evaluator process as line JSON.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from dataclasses import dataclass
from random import Random

from .codec import EvaluationError
from .params import DistanceMode

LR_TABLE = (0.0, 0.1, 0.01, 0.001, 0.0001, 0.00001)
DROP_TABLE = (0.0, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45)
LAYER_CODE_MAX = 11
MIN_LAYERS = 2
MAX_LAYERS = 11
MISSING_LAYER_PENALTY = 12

# bias strength of target-seeking moves when a toward genotype is known
_E_GUIDE = 0.85


@dataclass(frozen=True, order=True)
class NetGenotype:
    lr_code: int
    drop_code: int
    layer_codes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 0 <= self.lr_code < len(LR_TABLE):
            raise ValueError(f"lr_code {self.lr_code} out of [0,{len(LR_TABLE) - 1}]")
        if not 0 <= self.drop_code < len(DROP_TABLE):
            raise ValueError(f"drop_code {self.drop_code} out of [0,{len(DROP_TABLE) - 1}]")
        if not MIN_LAYERS <= len(self.layer_codes) <= MAX_LAYERS:
            raise ValueError(
                f"layer count {len(self.layer_codes)} out of ({MIN_LAYERS - 1},{MAX_LAYERS}]"
            )
        for code in self.layer_codes:
            if not 0 <= code <= LAYER_CODE_MAX:
                raise ValueError(f"layer code {code} out of [0,{LAYER_CODE_MAX}]")

    @property
    def layer_count(self) -> int:
        return len(self.layer_codes)

    def text(self) -> str:
        head = f"{{{self.lr_code},{self.drop_code},{self.layer_count}}}"
        body = "{" + ",".join(str(c) for c in self.layer_codes) + "}"
        return head + body


def parse_net_text(text: str) -> NetGenotype:
    """Parse the {lr,drop,L}{u1,...,uL} log form back into a genotype."""
    stripped = text.strip()
    if not (stripped.startswith("{") and stripped.endswith("}")):
        raise ValueError(f"malformed genotype text: {text!r}")
    try:
        head, body = stripped[1:-1].split("}{")
        lr, drop, count = (int(x) for x in head.split(","))
        codes = tuple(int(x) for x in body.split(","))
    except ValueError as exc:
        raise ValueError(f"malformed genotype text: {text!r}") from exc
    if count != len(codes):
        raise ValueError(f"layer count {count} does not match {len(codes)} codes: {text!r}")
    return NetGenotype(lr, drop, codes)


@dataclass(frozen=True)
class ArchitectureSpec:
    learning_rate: float
    dropout: float
    units_per_layer: tuple[int, ...]


def decode(g: NetGenotype) -> ArchitectureSpec:
    return ArchitectureSpec(
        learning_rate=LR_TABLE[g.lr_code],
        dropout=DROP_TABLE[g.drop_code],
        units_per_layer=tuple(25 * (c + 1) for c in g.layer_codes),
    )


def generate_net_patient_zero(rng: Random) -> NetGenotype:
    layer_count = rng.randint(MIN_LAYERS, MAX_LAYERS)
    return NetGenotype(
        lr_code=rng.randint(0, len(LR_TABLE) - 1),
        drop_code=rng.randint(0, len(DROP_TABLE) - 1),
        layer_codes=tuple(rng.randint(0, LAYER_CODE_MAX) for _ in range(layer_count)),
    )


def mutate_position(value: int, low: int, high: int, rng: Random) -> int:
    """Nudge value by -2, -1, +1 or +2 (quartiles of one draw), clamped."""
    p = rng.random()
    if p < 0.25:
        c = -2
    elif p < 0.5:
        c = -1
    elif p < 0.75:
        c = 1
    else:
        c = 2
    return max(low, min(high, value + c))


def resize_layers(g: NetGenotype, new_count: int, rng: Random) -> NetGenotype:
    """Truncate trailing layers or append fresh uniform codes to reach new_count."""
    if not MIN_LAYERS <= new_count <= MAX_LAYERS:
        raise ValueError(f"layer count {new_count} out of ({MIN_LAYERS - 1},{MAX_LAYERS}]")
    codes = g.layer_codes
    if new_count < len(codes):
        codes = codes[:new_count]
    elif new_count > len(codes):
        extra = tuple(rng.randint(0, LAYER_CODE_MAX) for _ in range(new_count - len(codes)))
        codes = codes + extra
    return NetGenotype(g.lr_code, g.drop_code, codes)


def _step_toward(value: int, desired: int, low: int, high: int, rng: Random) -> int:
    if rng.random() < _E_GUIDE and value != desired:
        return value + max(-2, min(2, desired - value))
    return mutate_position(value, low, high, rng)


def replicate_net(
    parent: NetGenotype,
    mode: DistanceMode,
    traveler_rate: int,
    rng: Random,
    *,
    toward: NetGenotype | None = None,
    mutation_log: list | None = None,
) -> NetGenotype:
    """Mutated child of parent.

    The layer count itself mutates with probability 1/3 (resizing the
    genotype). Then m non-count positions are picked without replacement
    from {LR, DROP, LAYER 1..L} and each is nudged by mutate_position:
    m = 1 for ordinary moves, m = traveler_rate for traveler moves, and a
    negative traveler_rate draws m uniformly in [0, 2+L]. With `toward`
    set, position picks and nudges prefer closing the gap to that genotype.
    """
    lr = parent.lr_code
    drop = parent.drop_code
    layers = list(parent.layer_codes)
    if rng.random() < 1 / 3:
        old_count = len(layers)
        new_count = None
        if toward is not None:
            desired = toward.layer_count
            if rng.random() < _E_GUIDE and old_count != desired:
                new_count = old_count + max(-2, min(2, desired - old_count))
        if new_count is None:
            new_count = mutate_position(old_count, MIN_LAYERS, MAX_LAYERS, rng)
        if new_count < len(layers):
            layers = layers[:new_count]
        else:
            layers += [rng.randint(0, LAYER_CODE_MAX) for _ in range(new_count - len(layers))]
        if mutation_log is not None and new_count != old_count:
            mutation_log.append(("resize", old_count, new_count))

    count = len(layers)
    positions = 2 + count  # 0 = LR, 1 = DROP, 2.. = layers
    if mode is DistanceMode.ORDINARY:
        m = 1
    elif traveler_rate >= 0:
        m = traveler_rate
    else:
        m = rng.randint(0, positions)
    m = min(m, positions)

    differing: list[int] = []
    if toward is not None:
        if lr != toward.lr_code:
            differing.append(0)
        if drop != toward.drop_code:
            differing.append(1)
        aligned = min(count, toward.layer_count)
        differing.extend(2 + i for i in range(aligned) if layers[i] != toward.layer_codes[i])

    chosen: set[int] = set()
    for _ in range(m):
        pos = None
        if toward is not None:
            pool = [p for p in differing if p not in chosen]
            if pool and rng.random() < _E_GUIDE:
                pos = pool[rng.randrange(len(pool))]
        if pos is None:
            free = [p for p in range(positions) if p not in chosen]
            pos = free[rng.randrange(len(free))]
        chosen.add(pos)

    for pos in sorted(chosen):
        if pos == 0:
            if toward is not None:
                lr = _step_toward(lr, toward.lr_code, 0, len(LR_TABLE) - 1, rng)
            else:
                lr = mutate_position(lr, 0, len(LR_TABLE) - 1, rng)
            if mutation_log is not None:
                mutation_log.append(("mutate", "lr"))
        elif pos == 1:
            if toward is not None:
                drop = _step_toward(drop, toward.drop_code, 0, len(DROP_TABLE) - 1, rng)
            else:
                drop = mutate_position(drop, 0, len(DROP_TABLE) - 1, rng)
            if mutation_log is not None:
                mutation_log.append(("mutate", "drop"))
        else:
            i = pos - 2
            if toward is not None and i < toward.layer_count:
                layers[i] = _step_toward(layers[i], toward.layer_codes[i], 0, LAYER_CODE_MAX, rng)
            else:
                layers[i] = mutate_position(layers[i], 0, LAYER_CODE_MAX, rng)
            if mutation_log is not None:
                mutation_log.append(("mutate", ("layer", i)))
    return NetGenotype(lr, drop, tuple(layers))


def surrogate_fitness(g: NetGenotype, target: NetGenotype) -> int:
    """Weighted mismatch distance; 0 iff the genotypes are equal."""
    total = abs(g.lr_code - target.lr_code)
    total += abs(g.drop_code - target.drop_code)
    total += 2 * abs(g.layer_count - target.layer_count)
    for a, b in zip(g.layer_codes, target.layer_codes):
        total += abs(a - b)
    total += MISSING_LAYER_PENALTY * abs(g.layer_count - target.layer_count)
    return total


def net_distance(a: NetGenotype, b: NetGenotype) -> int:
    """Element-wise mismatch count after front alignment, for PZ spreading."""
    d = int(a.lr_code != b.lr_code) + int(a.drop_code != b.drop_code)
    for x, y in zip(a.layer_codes, b.layer_codes):
        d += int(x != y)
    return d + abs(a.layer_count - b.layer_count)


def net_search_space_size() -> int:
    layer_shapes = sum(
        (LAYER_CODE_MAX + 1) ** count for count in range(MIN_LAYERS, MAX_LAYERS + 1)
    )
    return len(LR_TABLE) * len(DROP_TABLE) * layer_shapes


class ExternalEvaluator:
    """Subprocess fitness bridge speaking one JSON line each way.

    The decoded architecture goes to the evaluator's stdin as
    {"learning_rate": ..., "dropout": ..., "units": [...]} and the reply
    must be {"fitness": <finite number>}. Results are memoized per genotype;
    concurrent requests for the same genotype run the evaluator once.
    """

    def __init__(self, command: str | list[str], timeout: float | None = 60.0) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._cache: dict[NetGenotype, float] = {}
        self._errors: dict[NetGenotype, EvaluationError] = {}
        self._inflight: dict[NetGenotype, threading.Event] = {}
        self._lock = threading.Lock()
        self.invocations = 0

    def fitness(self, genotype: NetGenotype) -> float:
        while True:
            with self._lock:
                if genotype in self._cache:
                    return self._cache[genotype]
                if genotype in self._errors:
                    raise self._errors[genotype]
                pending = self._inflight.get(genotype)
                if pending is None:
                    self._inflight[genotype] = threading.Event()
                    break
            pending.wait()
        try:
            value = self._evaluate(genotype)
        except EvaluationError as exc:
            with self._lock:
                self._errors[genotype] = exc
                self._inflight.pop(genotype).set()
            raise
        with self._lock:
            self._cache[genotype] = value
            self._inflight.pop(genotype).set()
        return value

    def _evaluate(self, genotype: NetGenotype) -> float:
        spec = decode(genotype)
        request = json.dumps(
            {
                "learning_rate": spec.learning_rate,
                "dropout": spec.dropout,
                "units": list(spec.units_per_layer),
            }
        )
        self.invocations += 1
        try:
            proc = subprocess.run(
                self.command,
                input=request + "\n",
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise EvaluationError(f"evaluator failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise EvaluationError(
                f"evaluator exited {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        line = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else ""
        try:
            reply = json.loads(line)
            value = float(reply["fitness"])
        except (ValueError, KeyError, TypeError) as exc:
            raise EvaluationError(f"malformed evaluator reply {line!r}") from exc
        if not math.isfinite(value):
            raise EvaluationError(f"evaluator returned non-finite fitness {value!r}")
        return value


@dataclass(frozen=True)
class NetCodec:
    """Codec over NetGenotype; scored by surrogate distance or an evaluator.

    Exactly one of `target` (surrogate mode) and `evaluator` must be set.
    Surrogate mode knows its optimum and steers replication toward it;
    evaluator mode has no target knowledge, so replication stays uniform.
    """

    target: NetGenotype | None = None
    evaluator: ExternalEvaluator | None = None

    def __post_init__(self) -> None:
        if (self.target is None) == (self.evaluator is None):
            raise ValueError("configure exactly one of target / evaluator")

    def generate_patient_zero(self, rng: Random) -> NetGenotype:
        return generate_net_patient_zero(rng)

    def replicate(
        self, parent: NetGenotype, mode: DistanceMode, traveler_rate: int, rng: Random
    ) -> NetGenotype:
        return replicate_net(parent, mode, traveler_rate, rng, toward=self.target)

    def fitness(self, genotype: NetGenotype) -> float:
        if self.target is not None:
            return surrogate_fitness(genotype, self.target)
        assert self.evaluator is not None
        return self.evaluator.fitness(genotype)

    def distance(self, a: NetGenotype, b: NetGenotype) -> int:
        return net_distance(a, b)

    def search_space_size(self) -> int:
        return net_search_space_size()

    def text(self, genotype: NetGenotype) -> str:
        return genotype.text()

    def optimum_fitness(self) -> int | None:
        return 0 if self.target is not None else None
