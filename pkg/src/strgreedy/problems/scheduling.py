"""Multi-stage task scheduling.

``N`` agents, ``K`` stages; agent ``i`` placed at stage ``k`` succeeds with
probability ``p[i, k]``. A string of agents (no repeats) is scored by the
probability that at least one stage succeeds, with the ``k``-th agent in the
string working at stage ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (StringObjective, UniformNoRepeatConstraint,
                    as_string)
from ..errors import InvalidDimensions, InvalidSymbol, StageOverflow

# Agents M1..M5 (rows) by stages 1..3 (columns).
TABLE1 = (
    (0.20, 0.16, 0.14),
    (0.18, 0.16, 0.14),
    (0.16, 0.14, 0.14),
    (0.14, 0.12, 0.10),
    (0.12, 0.10, 0.08),
)


@dataclass(frozen=True, eq=False)
class SuccessMatrix:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 2 or p.size == 0:
            raise InvalidDimensions("success matrix must be a non-empty N x K table")
        if not np.all((p >= 0.0) & (p <= 1.0)):
            raise ValueError("success probabilities must lie in [0, 1]")
        if p.shape[0] < p.shape[1]:
            raise InvalidDimensions(
                f"need at least as many agents as stages, got N={p.shape[0]}, K={p.shape[1]}")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    @property
    def N(self) -> int:
        return self.p.shape[0]

    @property
    def K(self) -> int:
        return self.p.shape[1]

    def __eq__(self, other):
        return isinstance(other, SuccessMatrix) and np.array_equal(self.p, other.p)

    def tolist(self):
        return self.p.tolist()


def table1_matrix() -> SuccessMatrix:
    return SuccessMatrix(TABLE1)


class SchedulingObjective(StringObjective):
    """``f(S) = 1 - prod_k (1 - p[S[k], k])``."""

    def __init__(self, matrix: SuccessMatrix):
        self.matrix = matrix
        self.ground_size = matrix.N
        self.horizon = matrix.K
        self._p = matrix.p

    def _miss(self, s):
        miss = 1.0
        for k, i in enumerate(s):
            miss *= 1.0 - self._p[i, k]
        return miss

    def _evaluate(self, s):
        return 1.0 - self._miss(s)

    def extension_values(self, prefix, candidates):
        prefix = as_string(prefix)
        cands = np.asarray(candidates, dtype=np.int64)
        self.validate(prefix)
        if len(prefix) >= self.horizon:
            raise StageOverflow(f"cannot extend a string of length {len(prefix)}")
        if cands.size and (cands.min() < 0 or cands.max() >= self.ground_size):
            raise InvalidSymbol("candidate outside the agent pool")
        # same multiplication order as _evaluate, so values agree bit for bit
        return 1.0 - self._miss(prefix) * (1.0 - self._p[cands, len(prefix)])


def scheduling_objective(matrix: SuccessMatrix) -> SchedulingObjective:
    return SchedulingObjective(matrix)


def scheduling_constraint(matrix: SuccessMatrix) -> UniformNoRepeatConstraint:
    return UniformNoRepeatConstraint(matrix.N, matrix.K)


def random_scheduling_instance(seed, N: int, K: int, value_range=(0.05, 0.95),
                               stage_decreasing: bool = False) -> SuccessMatrix:
    """Uniform random success matrix, reproducible from ``seed``.

    With ``stage_decreasing`` each agent's probabilities are sorted so they
    never increase from one stage to the next.
    """
    if not N >= K >= 1:
        raise InvalidDimensions(f"need N >= K >= 1, got N={N}, K={K}")
    lo, hi = value_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"value_range {value_range} must lie within [0, 1]")
    rng = np.random.default_rng(seed)
    p = rng.uniform(lo, hi, size=(N, K))
    if stage_decreasing:
        p = -np.sort(-p, axis=1)
    return SuccessMatrix(p)
