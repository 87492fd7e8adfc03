"""Strings, prefix-closed constraints, objectives, greedy solver and oracle.

A string is an ordered tuple of integer symbols drawn from a ground set
``{0, ..., ground_size - 1}``. Objectives are defined on every string of
length at most the horizon ``K``; constraints describe the feasible region
by listing, for a feasible prefix, which symbols may follow it.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (EmptyCandidateSet, EnumerationTooLarge, InvalidDimensions,
                     InvalidSymbol, StageOverflow)

DEFAULT_ORACLE_CAP = 10**7


class ActionString(tuple):
    """Immutable ordered sequence of symbol ids."""

    __slots__ = ()

    def __new__(cls, symbols: Iterable[int] = ()):
        return super().__new__(cls, (int(s) for s in symbols))

    def prefix(self, k: int) -> "ActionString":
        if not 0 <= k <= len(self):
            raise IndexError(f"prefix length {k} out of range for length {len(self)}")
        return ActionString(tuple.__getitem__(self, slice(0, k)))

    def extend(self, symbol: int) -> "ActionString":
        return ActionString(tuple(self) + (int(symbol),))

    def prefixes(self) -> Iterator["ActionString"]:
        """All prefixes from the empty string up to ``self`` inclusive."""
        for k in range(len(self) + 1):
            yield self.prefix(k)

    def __getitem__(self, item):
        out = tuple.__getitem__(self, item)
        return ActionString(out) if isinstance(item, slice) else out

    def __add__(self, other):
        return ActionString(tuple(self) + tuple(other))

    def __repr__(self):
        return f"ActionString({' '.join(map(str, self))})"


def as_string(s) -> ActionString:
    return s if isinstance(s, ActionString) else ActionString(s)


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

class StringObjective(abc.ABC):
    """Real-valued function on strings of length <= ``horizon``.

    Subclasses implement :meth:`_evaluate` and must satisfy ``f(()) == 0``.
    The batched helpers may be overridden when a faster path exists; the
    defaults simply loop over :meth:`evaluate`.
    """

    horizon: int
    ground_size: int

    def evaluate(self, s) -> float:
        s = as_string(s)
        self.validate(s)
        if not s:
            return 0.0
        return float(self._evaluate(s))

    __call__ = evaluate

    @abc.abstractmethod
    def _evaluate(self, s: ActionString) -> float:
        ...

    def validate(self, s: ActionString) -> None:
        if len(s) > self.horizon:
            raise StageOverflow(
                f"string of length {len(s)} exceeds horizon {self.horizon}")
        for sym in s:
            if not 0 <= sym < self.ground_size:
                raise InvalidSymbol(
                    f"symbol {sym} outside ground set of size {self.ground_size}")

    def extension_values(self, prefix, candidates) -> np.ndarray:
        """Values ``f(prefix + (c,))`` for each candidate ``c``."""
        prefix = as_string(prefix)
        return np.array([self.evaluate(prefix.extend(c)) for c in candidates],
                        dtype=np.float64)

    def singleton_values(self, candidates) -> np.ndarray:
        return self.extension_values(ActionString(), candidates)


class TableObjective(StringObjective):
    """Objective given by an explicit lookup table.

    Strings missing from ``values`` evaluate to ``default``; with
    ``default=None`` a missing string raises ``KeyError``.
    """

    def __init__(self, values: Mapping[Sequence[int], float], ground_size: int,
                 horizon: int, default: float | None = None):
        self.ground_size = int(ground_size)
        self.horizon = int(horizon)
        self.default = default
        self.values = {ActionString(k): float(v) for k, v in values.items()}
        if self.values.get(ActionString(), 0.0) != 0.0:
            raise ValueError("f(empty string) must be 0")

    def _evaluate(self, s):
        if s in self.values:
            return self.values[s]
        if self.default is None:
            raise KeyError(s)
        return self.default


class FunctionObjective(StringObjective):
    """Wrap a plain callable ``fn(ActionString) -> float``."""

    def __init__(self, fn: Callable[[ActionString], float], ground_size: int,
                 horizon: int):
        self.fn = fn
        self.ground_size = int(ground_size)
        self.horizon = int(horizon)

    def _evaluate(self, s):
        return self.fn(s)


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

class PrefixClosedConstraint(abc.ABC):
    """Feasible region described through one-symbol extensions.

    ``extensions(S)`` returns the sorted symbols ``s`` with ``S + s``
    feasible; it must be empty once ``len(S) == horizon``. Feasible strings
    are exactly those reachable from the empty string by repeated extension,
    which makes the region prefix-closed by construction.
    """

    horizon: int
    ground_size: int

    @abc.abstractmethod
    def extensions(self, s) -> tuple[int, ...]:
        ...

    def is_feasible(self, s) -> bool:
        s = as_string(s)
        if len(s) > self.horizon:
            return False
        for k in range(len(s)):
            if s[k] not in self.extensions(s.prefix(k)):
                return False
        return True


class UniformNoRepeatConstraint(PrefixClosedConstraint):
    """Strings of distinct symbols with length at most ``horizon``."""

    def __init__(self, ground_size: int, horizon: int):
        if horizon < 1:
            raise InvalidDimensions(f"horizon must be >= 1, got {horizon}")
        if horizon > ground_size:
            raise InvalidDimensions(
                f"horizon {horizon} exceeds ground set size {ground_size}")
        self.ground_size = int(ground_size)
        self.horizon = int(horizon)

    def extensions(self, s):
        s = as_string(s)
        if len(s) >= self.horizon:
            return ()
        used = set(s)
        return tuple(i for i in range(self.ground_size) if i not in used)

    def __repr__(self):
        return f"UniformNoRepeatConstraint(ground_size={self.ground_size}, horizon={self.horizon})"


def uniform_no_repeat_constraint(ground_size: int, horizon: int) -> UniformNoRepeatConstraint:
    return UniformNoRepeatConstraint(ground_size, horizon)


class UniformConstraint(PrefixClosedConstraint):
    """The uniform string matroid: every string of length <= horizon, repeats allowed."""

    def __init__(self, ground_size: int, horizon: int):
        if horizon < 1 or ground_size < 1:
            raise InvalidDimensions("ground_size and horizon must be >= 1")
        self.ground_size = int(ground_size)
        self.horizon = int(horizon)

    def extensions(self, s):
        if len(s) >= self.horizon:
            return ()
        return tuple(range(self.ground_size))


class ExplicitConstraint(PrefixClosedConstraint):
    """Prefix closure of an explicit list of strings.

    The horizon defaults to the longest listed string.
    """

    def __init__(self, strings: Iterable[Sequence[int]], ground_size: int,
                 horizon: int | None = None):
        self.ground_size = int(ground_size)
        children: dict[ActionString, set[int]] = {}
        longest = 0
        for raw in strings:
            s = ActionString(raw)
            longest = max(longest, len(s))
            for k in range(len(s)):
                if not 0 <= s[k] < self.ground_size:
                    raise InvalidSymbol(f"symbol {s[k]} outside ground set")
                children.setdefault(s.prefix(k), set()).add(s[k])
        self.horizon = int(horizon if horizon is not None else longest)
        if longest > self.horizon:
            raise InvalidDimensions("listed string longer than horizon")
        self._children = {k: tuple(sorted(v)) for k, v in children.items()}

    def extensions(self, s):
        return self._children.get(as_string(s), ())


# ---------------------------------------------------------------------------
# Greedy
# ---------------------------------------------------------------------------

def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class StepRecord:
    """Every candidate considered at one greedy step, in ascending symbol order."""

    k: int
    symbols: np.ndarray
    singleton: np.ndarray
    extension: np.ndarray
    increment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "symbols", _frozen(self.symbols, np.int64))
        for name in ("singleton", "extension", "increment"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.float64))

    def __len__(self):
        return len(self.symbols)

    def rows(self):
        """Yield ``(symbol, f(s), f(G_{k-1}s), increment)`` tuples."""
        for i in range(len(self.symbols)):
            yield (int(self.symbols[i]), float(self.singleton[i]),
                   float(self.extension[i]), float(self.increment[i]))

    def __eq__(self, other):
        if not isinstance(other, StepRecord):
            return NotImplemented
        return (self.k == other.k
                and np.array_equal(self.symbols, other.symbols)
                and np.array_equal(self.singleton, other.singleton)
                and np.array_equal(self.extension, other.extension)
                and np.array_equal(self.increment, other.increment))

    def to_dict(self):
        return {"k": self.k,
                "symbols": self.symbols.tolist(),
                "singleton": self.singleton.tolist(),
                "extension": self.extension.tolist(),
                "increment": self.increment.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["k"]), d["symbols"], d["singleton"], d["extension"],
                   d["increment"])


@dataclass(frozen=True)
class GreedyTrace:
    chosen: ActionString
    values: tuple[float, ...]
    increments: tuple[float, ...]
    steps: tuple[StepRecord, ...]

    @property
    def K(self) -> int:
        return len(self.chosen)

    @property
    def greedy_value(self) -> float:
        return self.values[-1]

    def step(self, k: int) -> StepRecord:
        """Candidate record of greedy step ``k`` (1-based)."""
        return self.steps[k - 1]

    def to_dict(self):
        return {"chosen": list(self.chosen),
                "values": list(self.values),
                "increments": list(self.increments),
                "steps": [st.to_dict() for st in self.steps]}

    @classmethod
    def from_dict(cls, d):
        return cls(ActionString(d["chosen"]),
                   tuple(float(v) for v in d["values"]),
                   tuple(float(v) for v in d["increments"]),
                   tuple(StepRecord.from_dict(st) for st in d["steps"]))


def _check_compatible(objective, constraint):
    if objective.horizon != constraint.horizon:
        raise InvalidDimensions(
            f"objective horizon {objective.horizon} != constraint horizon "
            f"{constraint.horizon}")
    if objective.ground_size != constraint.ground_size:
        raise InvalidDimensions(
            f"objective ground size {objective.ground_size} != constraint ground "
            f"size {constraint.ground_size}")
    if constraint.horizon < 1:
        raise InvalidDimensions("horizon must be >= 1")


def _build_trace(chosen, values, steps):
    incs = tuple(values[k] - values[k - 1] for k in range(1, len(values)))
    return GreedyTrace(ActionString(chosen), tuple(values), incs, tuple(steps))


def greedy_solve(objective: StringObjective,
                 constraint: PrefixClosedConstraint) -> GreedyTrace:
    """Run the greedy scheme for ``K = constraint.horizon`` steps.

    At each step every feasible extension is evaluated; the symbol with the
    largest extended value wins, ties going to the smallest symbol id.
    Singleton values are evaluated once per symbol and reused across steps.
    """
    _check_compatible(objective, constraint)
    chosen = ActionString()
    values = [0.0]
    steps: list[StepRecord] = []
    singles: dict[int, float] = {}

    for k in range(1, constraint.horizon + 1):
        cands = np.unique(np.asarray(constraint.extensions(chosen), dtype=np.int64))
        if cands.size == 0:
            raise EmptyCandidateSet(k, _build_trace(chosen, values, steps))
        ext = np.asarray(objective.extension_values(chosen, cands), dtype=np.float64)
        missing = [int(c) for c in cands if int(c) not in singles]
        if missing:
            sv = objective.singleton_values(missing)
            singles.update(zip(missing, map(float, sv)))
        single = np.array([singles[int(c)] for c in cands], dtype=np.float64)
        # np.argmax returns the first maximum: smallest id among ties
        best = int(np.argmax(ext))
        steps.append(StepRecord(k, cands, single, ext, ext - values[-1]))
        chosen = chosen.extend(cands[best])
        values.append(float(ext[best]))

    return _build_trace(chosen, values, steps)


def increments(objective: StringObjective, s) -> tuple[float, ...]:
    """Increments ``f(S_k) - f(S_{k-1})`` for ``k = 1..len(s)``."""
    s = as_string(s)
    if not s:
        raise ValueError("increments needs a non-empty string")
    vals = [objective.evaluate(p) for p in s.prefixes()]
    return tuple(vals[k] - vals[k - 1] for k in range(1, len(vals)))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def enumeration_estimate(constraint: PrefixClosedConstraint) -> int:
    """Upper estimate of the feasible-string count: sum_L b^L, b = |extensions(())|."""
    b = len(constraint.extensions(ActionString()))
    return sum(b**L for L in range(1, constraint.horizon + 1))


def iter_feasible(objective: StringObjective, constraint: PrefixClosedConstraint,
                  cap: int = DEFAULT_ORACLE_CAP):
    """Yield ``(string, value)`` for every non-empty feasible string.

    Strings come out in lexicographic order of symbol ids (depth-first,
    children ascending), so a prefix always precedes its extensions.
    """
    _check_compatible(objective, constraint)
    est = enumeration_estimate(constraint)
    if est > cap:
        raise EnumerationTooLarge(est, cap)

    def walk(prefix):
        cands = sorted(set(constraint.extensions(prefix)))
        if not cands:
            return
        vals = objective.extension_values(prefix, cands)
        for c, v in zip(cands, vals):
            child = prefix.extend(c)
            yield child, float(v)
            yield from walk(child)

    yield from walk(ActionString())


@dataclass(frozen=True)
class OptimumReport:
    best_string: ActionString
    best_value: float
    n_enumerated: int
    per_length_best: tuple[float | None, ...]
    per_length_argmax: tuple[ActionString | None, ...]
    maximizers: tuple[ActionString, ...] = field(default=())

    @property
    def best_full_length(self) -> ActionString | None:
        """Best string among those of maximal length ``K``."""
        return self.per_length_argmax[-1]

    def to_dict(self):
        return {"best_string": list(self.best_string),
                "best_value": self.best_value,
                "n_enumerated": self.n_enumerated,
                "per_length_best": list(self.per_length_best),
                "per_length_argmax": [None if s is None else list(s)
                                      for s in self.per_length_argmax],
                "maximizers": [list(s) for s in self.maximizers]}


def brute_force_optimum(objective: StringObjective,
                        constraint: PrefixClosedConstraint,
                        cap: int = DEFAULT_ORACLE_CAP,
                        tie_tol: float = 0.0) -> OptimumReport:
    """Exhaustive maximum of the objective over all feasible strings.

    Among maximizers (values within ``tie_tol`` of the best) the
    lexicographically smallest is reported; all of them are listed in
    ``maximizers``.
    """
    K = constraint.horizon
    best_v = -np.inf
    per_len = [None] * K
    per_arg = [None] * K
    maximizers: list[tuple[ActionString, float]] = []
    n = 0
    for s, v in iter_feasible(objective, constraint, cap):
        n += 1
        L = len(s) - 1
        if per_len[L] is None or v > per_len[L]:
            per_len[L], per_arg[L] = v, s
        if v > best_v:
            best_v = v
            maximizers = [(m, mv) for m, mv in maximizers if mv >= v - tie_tol]
        if v >= best_v - tie_tol:
            maximizers.append((s, v))
    if not maximizers:
        raise EmptyCandidateSet(1)
    # enumeration order is lexicographic, so the first maximizer is the smallest
    return OptimumReport(maximizers[0][0], float(best_v), n, tuple(per_len),
                         tuple(per_arg), tuple(m for m, _ in maximizers))
