"""Discrete sensor coverage on lattice points.

Sensors and events live on the same finite point set. A sensor at ``s``
detects an event at ``x`` with probability ``exp(-lam * |x - s|)``; sensors
act independently, and the objective is the event-mass-weighted detection
probability

    H(s) = sum_x R(x) * (1 - prod_i (1 - exp(-lam * |x - s_i|))).
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from threading import Lock

import numpy as np

from .. import _kernels
from ..core import StringObjective, UniformNoRepeatConstraint, as_string
from ..errors import InvalidDimensions, InvalidSymbol, StageOverflow

MASS_KINDS = ("uniform", "linear")


@dataclass(frozen=True, eq=False)
class MissionGrid:
    points: np.ndarray          # (n, 2) integer lattice coordinates
    mass: np.ndarray            # (n,) event mass R(x) >= 0
    decay: float                # lambda > 0
    width: int | None = None
    height: int | None = None
    mass_kind: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.int64).reshape(-1, 2)
        mass = np.array(self.mass, dtype=np.float64).reshape(-1)
        if pts.shape[0] == 0:
            raise InvalidDimensions("mission grid has no feasible points")
        if mass.shape[0] != pts.shape[0]:
            raise InvalidDimensions("need one event mass per feasible point")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValueError("event mass must be finite and nonnegative")
        if not self.decay > 0:
            raise ValueError(f"decay rate must be positive, got {self.decay}")
        if len({tuple(p) for p in pts.tolist()}) != pts.shape[0]:
            raise ValueError("feasible points must be distinct")
        pts.flags.writeable = False
        mass.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "decay", float(self.decay))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def index_of(self, x: int, y: int) -> int:
        hit = np.flatnonzero((self.points[:, 0] == x) & (self.points[:, 1] == y))
        if hit.size == 0:
            raise KeyError((x, y))
        return int(hit[0])

    def total_mass(self) -> float:
        return float(self.mass.sum())


def rectangular_grid(width: int, height: int, lam: float,
                     mass_kind: str = "uniform") -> MissionGrid:
    """All integer points ``1 <= x <= width``, ``1 <= y <= height``.

    ``mass_kind="linear"`` gives ``R(x, y) = (x + y) / (width + height)``,
    heaviest at the far corner; ``"uniform"`` gives ``R = 1``.
    Points are ordered x-major: index ``(x - 1) * height + (y - 1)``.
    """
    if width < 1 or height < 1:
        raise InvalidDimensions(f"grid must be at least 1x1, got {width}x{height}")
    if mass_kind not in MASS_KINDS:
        raise ValueError(f"mass_kind must be one of {MASS_KINDS}, got {mass_kind!r}")
    xs, ys = np.meshgrid(np.arange(1, width + 1), np.arange(1, height + 1),
                         indexing="ij")
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    if mass_kind == "linear":
        mass = (pts[:, 0] + pts[:, 1]) / float(width + height)
    else:
        mass = np.ones(pts.shape[0])
    return MissionGrid(pts, mass, lam, width, height, mass_kind)


def point_grid(points, mass, lam: float) -> MissionGrid:
    """Mission grid from an explicit point list."""
    return MissionGrid(points, mass, lam)


class CoverageObjective(StringObjective):
    """Detection objective ``H`` as a string function over grid-point indices.

    Residual miss products are cached per prefix so one greedy step costs a
    single fused pass over ``candidates x points``.
    """

    _CACHE_SIZE = 64

    def __init__(self, grid: MissionGrid, horizon: int):
        if not 1 <= horizon <= grid.n:
            raise InvalidDimensions(
                f"horizon {horizon} must be between 1 and the point count {grid.n}")
        self.grid = grid
        self.horizon = int(horizon)
        self.ground_size = grid.n
        self._xy = grid.points.astype(np.float64)
        self._cache: OrderedDict = OrderedDict()
        self._lock = Lock()

    def residual(self, s) -> np.ndarray:
        """Per-point miss probability after placing sensors ``s``."""
        s = as_string(s)
        with self._lock:
            hit = self._cache.get(s)
            if hit is not None:
                self._cache.move_to_end(s)
                return hit
        res = _kernels.coverage_residual(self._xy[list(s)], self._xy,
                                         self.grid.decay)
        res.flags.writeable = False
        with self._lock:
            self._cache[s] = res
            while len(self._cache) > self._CACHE_SIZE:
                self._cache.popitem(last=False)
        return res

    def _evaluate(self, s):
        return float(self.grid.mass @ (1.0 - self.residual(s)))

    def extension_values(self, prefix, candidates):
        prefix = as_string(prefix)
        self.validate(prefix)
        if len(prefix) >= self.horizon:
            raise StageOverflow(f"cannot extend a placement of size {len(prefix)}")
        cands = np.asarray(candidates, dtype=np.int64)
        if cands.size and (cands.min() < 0 or cands.max() >= self.ground_size):
            raise InvalidSymbol("sensor index has no grid point")
        res = self.residual(prefix)
        base = float(self.grid.mass @ (1.0 - res)) if prefix else 0.0
        gains = _kernels.coverage_gains(self._xy[cands], self._xy,
                                        self.grid.mass * res, self.grid.decay)
        return base + gains


def coverage_objective(grid: MissionGrid, horizon: int) -> CoverageObjective:
    return CoverageObjective(grid, horizon)


def coverage_constraint(grid: MissionGrid, horizon: int) -> UniformNoRepeatConstraint:
    return UniformNoRepeatConstraint(grid.n, horizon)
