"""Path encoding and the work partition over all 2^N paths.

A path through an N-step tree is a word of N Bernoulli outcomes, stored
as the integer whose binary expansion, read from the most significant of
the N used bits, is the outcome sequence.  Step 1 is the most significant
bit and 1 means an up move, so

    code = sum_t bits[t] * 2^(N - 1 - t)      (t = 0..N-1)

and consecutive codes sharing a prefix describe paths sharing their first
steps.  That makes a prefix block a contiguous code range, which is what
the partition below hands to each worker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from .errors import InvalidInput, InvalidWorkerCount, LengthMismatch, RankOutOfRange

if TYPE_CHECKING:
    from .model import TreeParams

# Extra prefix bits used when the worker count is not a power of two, so
# the round-robin deal hands each rank many small blocks instead of a few
# lumpy ones.
OVERSUB_BITS = 4


@dataclass(frozen=True)
class BernoulliPath:
    """One path: an integer code plus the number of steps it encodes."""

    code: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= 62:
            raise InvalidInput(f"path length must be between 1 and 62, got {self.n}")
        if not 0 <= self.code < (1 << self.n):
            raise InvalidInput(
                f"code {self.code} is outside [0, 2^{self.n}) for an {self.n}-step path"
            )

    def bits(self) -> tuple:
        """Outcome sequence, step 1 first.  1 is an up move."""
        return tuple((self.code >> (self.n - 1 - t)) & 1 for t in range(self.n))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BernoulliPath":
        n = len(bits)
        code = 0
        for b in bits:
            if b not in (0, 1):
                raise InvalidInput(f"path bits must be 0 or 1, got {b!r}")
            code = (code << 1) | b
        return cls(code=code, n=n)


def path_probability(params: "TreeParams", path: BernoulliPath) -> float:
    """Product over steps of p_t for an up move, 1 - p_t for a down move."""
    if path.n != params.n_steps:
        raise LengthMismatch(f"path has {path.n} steps, tree has {params.n_steps}")
    prob = 1.0
    for t, b in enumerate(path.bits()):
        p = float(params.up_probs[t])
        prob *= p if b else 1.0 - p
    return prob


def _prefix_probability(params: "TreeParams", value: int, width: int) -> float:
    prob = 1.0
    for t in range(width):
        bit = (value >> (width - 1 - t)) & 1
        p = float(params.up_probs[t])
        prob *= p if bit else 1.0 - p
    return prob


@dataclass(frozen=True)
class PathPartition:
    """Assignment of every N-step path code to one of m ranks.

    prefix_width is the number k of leading bits used to form blocks;
    blocks[rank] lists the k-bit prefix values that rank owns, in
    ascending order.  Each prefix value v covers the contiguous code
    range [v * 2^(N-k), (v+1) * 2^(N-k)).
    """

    n: int
    m: int
    prefix_width: int
    blocks: tuple

    @property
    def suffix_width(self) -> int:
        return self.n - self.prefix_width


def make_partition(n: int, m: int) -> PathPartition:
    """Split the 2^n path codes across m ranks.

    A power-of-two m uses exactly r = log2(m) prefix bits and rank i owns
    the single prefix i, one contiguous range per rank.  Any other m uses
    k = min(n, ceil(log2 m) + OVERSUB_BITS) prefix bits and deals the 2^k
    blocks round-robin, block b to rank b mod m.
    """
    if not 1 <= n <= 62:
        raise InvalidInput(f"n must be between 1 and 62, got {n}")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise InvalidWorkerCount(f"worker count must be a positive integer, got {m!r}")
    if m > (1 << n):
        raise InvalidWorkerCount(
            f"worker count {m} exceeds the {1 << n} paths of an {n}-step tree"
        )

    if m & (m - 1) == 0:
        width = m.bit_length() - 1
        blocks = tuple((i,) for i in range(m))
        return PathPartition(n=n, m=m, prefix_width=width, blocks=blocks)

    width = min(n, (m - 1).bit_length() + OVERSUB_BITS)
    owned = [[] for _ in range(m)]
    for b in range(1 << width):
        owned[b % m].append(b)
    return PathPartition(
        n=n, m=m, prefix_width=width, blocks=tuple(tuple(o) for o in owned)
    )


def _check_rank(partition: PathPartition, rank: int) -> None:
    if not 0 <= rank < partition.m:
        raise RankOutOfRange(
            f"rank {rank} is outside [0, {partition.m}) for this partition"
        )


def block_code_ranges(partition: PathPartition, rank: int) -> list:
    """Contiguous [lo, hi) code ranges owned by one rank, ascending."""
    _check_rank(partition, rank)
    span = 1 << partition.suffix_width
    return [(v * span, (v + 1) * span) for v in partition.blocks[rank]]


def iter_block(partition: PathPartition, rank: int) -> Iterator[BernoulliPath]:
    """Yield the rank's paths in ascending code order, O(1) memory."""
    for lo, hi in block_code_ranges(partition, rank):
        for code in range(lo, hi):
            yield BernoulliPath(code=code, n=partition.n)


def block_probability(params: "TreeParams", partition: PathPartition, rank: int) -> float:
    """Total probability mass of the rank's paths.

    Suffix bits always sum out to one, so the mass is the sum of the
    owned prefix probabilities regardless of suffix width.
    """
    _check_rank(partition, rank)
    if partition.n != params.n_steps:
        raise LengthMismatch(
            f"partition is over {partition.n}-step paths, tree has {params.n_steps}"
        )
    width = partition.prefix_width
    return sum(_prefix_probability(params, v, width) for v in partition.blocks[rank])


def codes_to_bits(codes: np.ndarray, n: int) -> np.ndarray:
    """Expand integer path codes to a (len(codes), n) boolean bit matrix."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    return (codes[:, None] >> shifts) & np.uint64(1) != 0
