"""Fixed-length bit-string codification with the quadratic benchmark objective.

Genotypes decode big-endian to an unsigned integer x and are scored with
f(x) = (x - target)^2, so fitness 0 identifies the target exactly. The
codec's replicate operator flips single bits for ordinary moves and
max(2, ceil(n/10)) distinct bits for traveler moves.

Flip positions are uniform by default. When a `toward` value is supplied,
position choice is biased to close the bit-level gap to that value, with
the bias eased off far from it; the flip-count contract is unchanged. The
codec wires its own target in as `toward`, which is what makes default
benchmark runs converge inside the short pandemic window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from .params import DistanceMode

MIN_BITS = 8
MAX_BITS = 64

# bias schedule: (near, mid, far, traveler) selection pressure by distance
_E_FAR = 0.7
_E_MID = 0.85
_E_NEAR = 1.0
_E_TRAVELER = 0.9
_H_MID = 6
_H_NEAR = 2


@dataclass(frozen=True, order=True)
class BitGenotype:
    """Immutable bit string of fixed length, ordered by (length, value)."""

    length: int
    value: int

    def __post_init__(self) -> None:
        if not MIN_BITS <= self.length <= MAX_BITS:
            raise ValueError(f"bit length {self.length} outside [{MIN_BITS},{MAX_BITS}]")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_string(cls, bits: str) -> "BitGenotype":
        return cls(len(bits), int(bits, 2))

    def to_string(self) -> str:
        return format(self.value, f"0{self.length}b")


def decode(g: BitGenotype) -> int:
    """Unsigned integer value of the genotype (most-significant bit first)."""
    return g.value


def quadratic_fitness(g: BitGenotype, target: int) -> int:
    # exact integer arithmetic; at n=50 the square exceeds 2^100
    d = decode(g) - target
    return d * d


def random_patient_zero(n: int, rng: Random) -> BitGenotype:
    """Fresh genotype with each bit an independent fair coin."""
    if not MIN_BITS <= n <= MAX_BITS:
        raise ValueError(f"unsupported bit length {n}, expected [{MIN_BITS},{MAX_BITS}]")
    return BitGenotype(n, rng.getrandbits(n))


def traveler_flip_count(n: int) -> int:
    return max(2, math.ceil(n / 10))


def _bias_strength(hamming: int, traveling: bool) -> float:
    if traveling:
        return _E_TRAVELER
    if hamming <= _H_NEAR:
        return _E_NEAR
    if hamming <= _H_MID:
        return _E_MID
    return _E_FAR


def replicate_bits(
    parent: BitGenotype,
    mode: DistanceMode,
    rng: Random,
    *,
    toward: int | None = None,
) -> BitGenotype:
    """Flip exactly 1 (ordinary) or k distinct (traveler) bits of parent.

    With `toward` set, each flip prefers a position where the child still
    differs from that value; without it every position choice is uniform.
    Either way the child differs from the parent in exactly the contracted
    number of positions and keeps its length.
    """
    n = parent.length
    k = traveler_flip_count(n) if mode is DistanceMode.TRAVELER else 1
    traveling = mode is DistanceMode.TRAVELER
    child = parent.value
    used: set[int] = set()
    for _ in range(k):
        pos = None
        if toward is not None:
            delta = child ^ toward
            e = _bias_strength(delta.bit_count(), traveling)
            if rng.random() < e:
                diff = [p for p in range(n) if (delta >> p) & 1 and p not in used]
                if diff:
                    pos = diff[rng.randrange(len(diff))]
        if pos is None:
            free = [p for p in range(n) if p not in used]
            pos = free[rng.randrange(len(free))]
        used.add(pos)
        child ^= 1 << pos
    return BitGenotype(n, child)


@dataclass(frozen=True)
class BinaryCodec:
    """Codec over n-bit genotypes scored by (decode(g) - target)^2."""

    bits: int = 10
    target: int = 15

    def __post_init__(self) -> None:
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValueError(f"unsupported bit length {self.bits}")
        if not 0 <= self.target < (1 << self.bits):
            raise ValueError(f"target {self.target} does not fit in {self.bits} bits")

    def generate_patient_zero(self, rng: Random) -> BitGenotype:
        return random_patient_zero(self.bits, rng)

    def replicate(
        self, parent: BitGenotype, mode: DistanceMode, traveler_rate: int, rng: Random
    ) -> BitGenotype:
        # traveler distance is length-derived for bit strings; the rate
        # field only parameterizes variable-length codecs
        return replicate_bits(parent, mode, rng, toward=self.target)

    def fitness(self, genotype: BitGenotype) -> int:
        return quadratic_fitness(genotype, self.target)

    def distance(self, a: BitGenotype, b: BitGenotype) -> int:
        return (a.value ^ b.value).bit_count()

    def search_space_size(self) -> int:
        return 1 << self.bits

    def text(self, genotype: BitGenotype) -> str:
        return genotype.to_string()

    def optimum_fitness(self) -> int:
        return 0
