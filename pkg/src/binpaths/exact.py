"""Exact expected value over all 2^N paths, serial and partitioned.

The value is e^{-qT} * sum over every path of p(path) * payoff(path).
Workers own disjoint code ranges from a PathPartition, accumulate their
local sums with Kahan compensation, apply the discount locally, and the
partial values are reduced in ascending rank order.  A worker count of
one therefore reproduces the serial engine bit for bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .errors import (
    EnumerationGuard,
    InvalidWorkerCount,
    LengthMismatch,
    NonConstantProbs,
    PathDependentPayoff,
)
from .model import MarketInputs, TreeParams, leaf_prices
from .paths import PathPartition, block_code_ranges, codes_to_bits, make_partition
from .payoffs import PayoffLike, is_path_dependent, payoff_batch, terminal_payoff

# Above this depth, enumeration of 2^N paths needs an explicit opt-in.
LARGE_DEPTH = 28

# Paths evaluated per vectorized batch inside a worker.
CHUNK = 1 << 15


@dataclass(frozen=True)
class ValuationRequest:
    """One valuation: inputs, derived tree, payoff, and worker count."""

    inputs: MarketInputs
    params: TreeParams
    kind: PayoffLike
    workers: int = 1
    force_large: bool = False

    def __post_init__(self):
        if not isinstance(self.workers, int) or isinstance(self.workers, bool) or self.workers < 1:
            raise InvalidWorkerCount(
                f"workers must be a positive integer, got {self.workers!r}"
            )
        if self.params.n_steps != self.inputs.N:
            raise LengthMismatch(
                f"tree has {self.params.n_steps} steps but inputs say N={self.inputs.N}"
            )


class _Kahan:
    """Compensated accumulator for a stream of float addends."""

    __slots__ = ("total", "_c")

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def _check_enumerable(req: ValuationRequest) -> None:
    if req.inputs.N > LARGE_DEPTH and not req.force_large:
        raise EnumerationGuard(
            f"N={req.inputs.N} means 2^{req.inputs.N} paths; pass the force-large "
            f"override to enumerate beyond N={LARGE_DEPTH}"
        )


def _rank_value(req: ValuationRequest, partition: PathPartition, rank: int):
    """Discounted local sum over one rank's paths, plus its path count."""
    params = req.params
    n = partition.n
    p_row = params.up_probs[None, :]
    acc = _Kahan()
    visited = 0
    for lo, hi in block_code_ranges(partition, rank):
        for start in range(lo, hi, CHUNK):
            stop = min(start + CHUNK, hi)
            codes = np.arange(start, stop, dtype=np.uint64)
            bits = codes_to_bits(codes, n)
            weights = np.where(bits, p_row, 1.0 - p_row).prod(axis=1)
            values = payoff_batch(req.kind, params, req.inputs.S0, req.inputs.K, bits)
            acc.add(float(np.sum(weights * values)))
            visited += stop - start
    disc = math.exp(-req.inputs.q * req.inputs.T)
    return disc * acc.total, visited


def value_exact_serial(req: ValuationRequest) -> float:
    """Full enumeration as a single worker; ignores req.workers."""
    _check_enumerable(req)
    partition = make_partition(req.inputs.N, 1)
    value, visited = _rank_value(req, partition, 0)
    assert visited == 1 << req.inputs.N, "path accounting mismatch"
    return value


def value_exact_parallel(req: ValuationRequest) -> float:
    """Partitioned enumeration over req.workers ranks.

    Rank results are reduced in ascending order, so the output depends
    on the worker count M but not on thread scheduling.  M=1 matches
    value_exact_serial bit for bit.
    """
    _check_enumerable(req)
    m = req.workers
    partition = make_partition(req.inputs.N, m)
    if m == 1:
        results = [_rank_value(req, partition, 0)]
    else:
        pool_size = min(m, os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=pool_size) as pool:
            results = list(pool.map(lambda r: _rank_value(req, partition, r), range(m)))
    visited = sum(v for _, v in results)
    assert visited == 1 << req.inputs.N, "path accounting mismatch"
    total = 0.0
    for value, _ in results:
        total += value
    return total


def value_leaf_formula(req: ValuationRequest) -> float:
    """Closed-form value from the N+1 leaves, for constant-p European kinds.

    The weight of leaf j is the binomial pmf C(N,j) p^j (1-p)^(N-j),
    evaluated through scipy's log-space pmf so large N stays finite.
    """
    if is_path_dependent(req.kind):
        raise PathDependentPayoff(
            f"{req.kind} depends on the whole path; the leaf formula only "
            "covers terminal-price payoffs"
        )
    p = req.params.constant_up_prob()
    if p is None:
        raise NonConstantProbs(
            "leaf formula needs one constant up probability across steps"
        )
    n = req.inputs.N
    weights = binom.pmf(np.arange(n + 1), n, p)
    leaves = leaf_prices(req.params, req.inputs.S0)
    values = terminal_payoff(req.kind, leaves, req.inputs.K)
    disc = math.exp(-req.inputs.q * req.inputs.T)
    return disc * float(np.dot(weights, values))
