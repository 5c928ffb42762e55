"""Independent checks for the closed forms: exact products and Monte Carlo.

Simulation is reproducible by construction. Trials are grouped into fixed-size
blocks, and block ``b`` draws from a Philox stream keyed by ``(seed, b)``. The
block size depends only on the draws per trial, so results do not depend on
``workers`` or on scheduling order.
"""

from __future__ import annotations

import enum
import math
import os
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import collision
from .numerics import DomainError, Probability

__all__ = [
    "CellAssignment",
    "Census",
    "Metric",
    "SimEstimate",
    "WorkBudgetError",
    "analytic_value",
    "assignment_census",
    "exact_population_match_small",
    "max_draws_budget",
    "simulate",
]

DEFAULT_MAX_DRAWS = 10**9
MAX_DRAWS_ENV = "BIOCOLLIDE_MAX_DRAWS"
_BLOCK_CELLS = 1 << 22
_MAX_BLOCK_ROWS = 1 << 16


class Metric(str, enum.Enum):
    EXACT_MATCH = "exact"
    PAIR_MATCH = "pair"
    POPULATION_MATCH = "population"


class WorkBudgetError(RuntimeError):
    """A simulation would exceed the configured number of random draws."""


@dataclass(frozen=True)
class SimEstimate:
    metric: Metric
    m: int
    n: int
    estimate: float
    trials: int
    successes: int
    std_error: float
    seed: int

    def z_score(self, expected: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.estimate == expected else math.inf
        return (self.estimate - expected) / self.std_error

    def agrees_with(self, expected: float, sigmas: float = 4.0) -> bool:
        return abs(self.z_score(expected)) <= sigmas


@dataclass(frozen=True)
class CellAssignment:
    """Cell index for each individual ``0..n-1`` over cells ``0..m-1``."""

    cells: tuple[int, ...]
    m: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.m < 1:
            raise DomainError(f"cell count must be >= 1, got {self.m}")
        for i, c in enumerate(self.cells):
            if not 0 <= c < self.m:
                raise DomainError(f"individual {i} assigned to cell {c}, outside 0..{self.m - 1}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int], m: int | None = None) -> CellAssignment:
        n = len(mapping)
        if sorted(mapping) != list(range(n)):
            raise DomainError("individuals must be indexed 0..n-1")
        cells = [mapping[i] for i in range(n)]
        return cls(tuple(cells), m if m is not None else max(cells, default=0) + 1)


@dataclass(frozen=True)
class Census:
    max_count: int
    colliding_cells: int

    @property
    def collision(self) -> bool:
        return self.max_count > 1


def assignment_census(assignment: CellAssignment | Mapping[int, int] | Sequence[int]) -> Census:
    """Occupancy summary: largest cell count and number of cells holding 2+."""
    if isinstance(assignment, CellAssignment):
        cells = assignment.cells
    elif isinstance(assignment, Mapping):
        cells = CellAssignment.from_mapping(assignment).cells
    else:
        cells = assignment
    if len(cells) == 0:
        return Census(0, 0)
    _, counts = np.unique(np.asarray(cells), return_counts=True)
    return Census(int(counts.max()), int(np.count_nonzero(counts > 1)))


def exact_population_match_small(m: int, n: int) -> Probability:
    """``1 - prod_{i=1}^{n-1} (1 - i/m)`` summed term by term in log space."""
    if not 1 <= m <= 10**9:
        raise DomainError(f"oracle supports 1 <= m <= 1e9, got {m}")
    if not 1 <= n <= m + 1:
        raise DomainError(f"oracle supports 1 <= n <= m + 1, got n={n} for m={m}")
    if n == m + 1:
        return Probability.one()
    if n <= 10**6:
        log_none = math.fsum(math.log1p(-i / m) for i in range(1, n))
    else:
        parts = []
        for start in range(1, n, 1 << 20):
            i = np.arange(start, min(n, start + (1 << 20)), dtype=np.float64)
            parts.append(math.fsum(np.log1p(-i / m).tolist()))
        log_none = math.fsum(parts)
    return Probability.from_log_q(log_none)


def analytic_value(metric: Metric | str, m: int, n: int) -> Probability:
    """Closed-form counterpart of :func:`simulate` for the same metric."""
    metric = Metric(metric)
    log_m = math.log(m)
    if metric is Metric.PAIR_MATCH:
        return collision.pair_match_prob(log_m)
    if metric is Metric.EXACT_MATCH:
        return collision.exact_match_prob(log_m, n).value
    return collision.population_match_prob(log_m, n).value


def max_draws_budget() -> int:
    raw = os.environ.get(MAX_DRAWS_ENV)
    if not raw:
        return DEFAULT_MAX_DRAWS
    try:
        value = int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError:
        raise ValueError(f"{MAX_DRAWS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{MAX_DRAWS_ENV} must be >= 1, got {value}")
    return value


def _draws_per_trial(metric: Metric, n: int) -> int:
    return 2 if metric is Metric.PAIR_MATCH else n


def _block_successes(metric: Metric, m: int, n: int, rows: int, seed: int, block: int) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    if metric is Metric.PAIR_MATCH:
        draws = rng.integers(0, m, size=(rows, 2), dtype=np.int64)
        return int(np.count_nonzero(draws[:, 0] == draws[:, 1]))
    if metric is Metric.EXACT_MATCH:
        target = rng.integers(0, m, size=rows, dtype=np.int64)
        peers = rng.integers(0, m, size=(rows, n - 1), dtype=np.int64)
        return int(np.count_nonzero((peers == target[:, None]).any(axis=1)))
    if n > m:
        return rows
    draws = rng.integers(0, m, size=(rows, n), dtype=np.int64)
    draws.sort(axis=1)
    return int(np.count_nonzero((draws[:, 1:] == draws[:, :-1]).any(axis=1)))


def simulate(
    metric: Metric | str,
    m: int,
    n: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    max_draws: int | None = None,
) -> SimEstimate:
    """Monte Carlo estimate of a collision metric.

    EXACT_MATCH draws a target and ``n - 1`` peers per trial; PAIR_MATCH draws
    two individuals; POPULATION_MATCH draws ``n`` and looks for any duplicate.
    Raises :class:`WorkBudgetError` when ``trials * draws`` exceeds the budget
    (``max_draws``, else ``$BIOCOLLIDE_MAX_DRAWS``, else 1e9).
    """
    metric = Metric(metric)
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    least_n = 1 if metric is Metric.POPULATION_MATCH else 2
    if n < least_n:
        raise DomainError(f"{metric.value} simulation needs n >= {least_n}, got {n}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    per_trial = _draws_per_trial(metric, n)
    budget = max_draws if max_draws is not None else max_draws_budget()
    if trials * per_trial > budget:
        raise WorkBudgetError(
            f"{trials} trials x {per_trial} draws exceeds the budget of {budget} draws "
            f"(raise it with {MAX_DRAWS_ENV})"
        )

    rows = max(1, min(_MAX_BLOCK_ROWS, _BLOCK_CELLS // per_trial))
    blocks = [(b, min(rows, trials - b * rows)) for b in range(math.ceil(trials / rows))]

    def run(block: tuple[int, int]) -> int:
        b, size = block
        return _block_successes(metric, m, n, size, seed, b)

    if workers == 1 or len(blocks) == 1:
        successes = sum(map(run, blocks))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(run, blocks))

    est = successes / trials
    return SimEstimate(
        metric=metric,
        m=m,
        n=n,
        estimate=est,
        trials=trials,
        successes=successes,
        std_error=math.sqrt(est * (1 - est) / trials),
        seed=seed,
    )
