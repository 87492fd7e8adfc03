"""Greedy curvature, performance bounds and assumption checks.

Everything here is computed from a :class:`~strgreedy.core.GreedyTrace`,
i.e. from quantities along the greedy trajectory plus singleton values.
The brute-force oracle only enters through :func:`check_A1`,
:func:`check_A2` on the optimum, and :func:`certify`.

Assumptions, checked with tolerance ``tol``:

* A1 - each optimal symbol ``o_k`` is a feasible extension of ``G_{k-1}``;
* A2 - along the optimal string, ``f(O_k) - f(O_{k-1}) <= f(o_k)``;
* A3 - every feasible candidate at every greedy step has a positive increment.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_ORACLE_CAP, ActionString, GreedyTrace, OptimumReport,
                   as_string, iter_feasible)
from .errors import (InvalidCurvature, NoPositiveIncrement, ZeroDenominator)

DEFAULT_TOL = 1e-12
CERTIFY_TOL = 1e-9


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureReport:
    alpha_G: float
    alpha_k: tuple[float, ...]          # steps 2..K
    alpha_G_at: tuple[int, int]         # (k, symbol)
    alpha_k_at: tuple[tuple[int, int], ...]
    excluded_candidates: int

    def alpha(self, k: int) -> float:
        """Per-step curvature for step ``k`` (2 <= k <= K)."""
        return self.alpha_k[k - 2]

    def to_dict(self):
        return {"alpha_G": self.alpha_G,
                "alpha_k": list(self.alpha_k),
                "alpha_G_at": list(self.alpha_G_at),
                "alpha_k_at": [list(p) for p in self.alpha_k_at],
                "excluded_candidates": self.excluded_candidates}


def greedy_curvature(trace: GreedyTrace) -> CurvatureReport:
    """Largest ratio ``f(s) / increment`` over steps ``k >= 2``.

    Only candidates with a strictly positive increment enter the maxima;
    the rest are counted in ``excluded_candidates``.
    """
    if trace.K < 2:
        raise ValueError("greedy curvature needs a trace with K >= 2")
    alphas, where = [], []
    excluded = 0
    for step in trace.steps[1:]:
        pos = step.increment > 0.0
        excluded += int(np.count_nonzero(~pos))
        if not pos.any():
            raise NoPositiveIncrement(step.k)
        ratios = np.full(len(step), -np.inf)
        ratios[pos] = step.singleton[pos] / step.increment[pos]
        i = int(np.argmax(ratios))
        alphas.append(float(ratios[i]))
        where.append((step.k, int(step.symbols[i])))
    j = int(np.argmax(alphas))
    return CurvatureReport(alphas[j], tuple(alphas), where[j], tuple(where),
                           excluded)


# ---------------------------------------------------------------------------
# Bound formulas
# ---------------------------------------------------------------------------

def bound_beta1(alpha_G: float, K: int, strict: bool = True) -> float:
    """Curvature bound ``1/K + (1/alpha_G) (K-1)/K``.

    With ``strict=False`` the value is returned even for ``0 < alpha_G < 1``;
    callers are then responsible for flagging it. A zero curvature always
    raises, the bound being unbounded there.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not alpha_G > 0.0 or (strict and not alpha_G >= 1.0):
        raise InvalidCurvature(alpha_G)
    return 1.0 / K + (K - 1) / (K * alpha_G)


def beta2_denominator(trace: GreedyTrace) -> float:
    """Sum over greedy steps of the best singleton value among that step's candidates."""
    total = 0.0
    for step in trace.steps:
        if len(step) == 0:
            raise ValueError(f"empty candidate record at step {step.k}")
        total += float(step.singleton.max())
    return total


def bound_beta2(trace: GreedyTrace) -> float:
    den = beta2_denominator(trace)
    if den == 0.0:
        raise ZeroDenominator("every candidate singleton value is 0")
    return trace.greedy_value / den


def bound_stepwise(trace: GreedyTrace, curvatures: CurvatureReport) -> float:
    """Bound from the per-step upper estimate ``f(g1) + sum_k alpha_k * increment_k``."""
    if len(curvatures.alpha_k) != trace.K - 1:
        raise ValueError("curvature report does not match trace length")
    den = trace.values[1] + sum(a * d for a, d in zip(curvatures.alpha_k,
                                                      trace.increments[1:]))
    if den == 0.0:
        raise ZeroDenominator("stepwise upper estimate is 0")
    return trace.greedy_value / den


def bound_constants(K: int) -> tuple[float, float]:
    """``(1 - 1/e, 1 - ((K-1)/K)^K)``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return 1.0 - math.exp(-1.0), 1.0 - ((K - 1) / K) ** K


@dataclass(frozen=True)
class BoundsReport:
    K: int
    greedy_value: float
    beta0: float
    beta_nemhauser: float
    beta1: float | None
    beta2: float | None
    beta_stepwise: float | None
    beta2_denominator: float
    alpha_G: float | None
    curvature: CurvatureReport | None = None
    warnings: tuple[str, ...] = ()

    def to_dict(self):
        d = {k: getattr(self, k) for k in (
            "K", "greedy_value", "beta0", "beta_nemhauser", "beta1", "beta2",
            "beta_stepwise", "beta2_denominator", "alpha_G")}
        d["curvature"] = None if self.curvature is None else self.curvature.to_dict()
        d["warnings"] = list(self.warnings)
        return d


def compute_bounds(trace: GreedyTrace) -> BoundsReport:
    """All trajectory-computable bounds for one greedy run.

    Never raises on degenerate traces: undefined bounds come back as
    ``None`` and the reason is listed in ``warnings``. For ``K = 1`` the
    curvature is undefined and beta1 = beta_stepwise = 1.
    """
    K = trace.K
    beta0, beta_nem = bound_constants(K)
    warnings = []
    den = beta2_denominator(trace)
    beta2 = trace.greedy_value / den if den > 0.0 else None
    if beta2 is None:
        warnings.append("beta2: zero denominator")

    curv = None
    alpha_G = beta1 = beta_step = None
    if K == 1:
        beta1 = 1.0
        beta_step = 1.0 if trace.greedy_value > 0.0 else None
    else:
        try:
            curv = greedy_curvature(trace)
        except NoPositiveIncrement as exc:
            warnings.append(f"curvature undefined: no positive increment at step {exc.k}")
        if curv is not None:
            alpha_G = curv.alpha_G
            if alpha_G < 1.0:
                warnings.append(f"alpha_G = {alpha_G!r} < 1; beta1 not certifiable")
            if alpha_G > 0.0:
                beta1 = bound_beta1(alpha_G, K, strict=False)
            else:
                warnings.append("beta1 undefined: alpha_G = 0")
            try:
                beta_step = bound_stepwise(trace, curv)
            except ZeroDenominator:
                warnings.append("beta_stepwise: zero denominator")
        if curv is not None and curv.excluded_candidates:
            warnings.append(
                f"{curv.excluded_candidates} candidate(s) with non-positive increment "
                "excluded from curvature")
    return BoundsReport(K, trace.greedy_value, beta0, beta_nem, beta1, beta2,
                        beta_step, den, alpha_G, curv, tuple(warnings))


# ---------------------------------------------------------------------------
# Assumption checks
# ---------------------------------------------------------------------------

class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_CHECKABLE = "not-checkable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    verdict: Verdict
    witness: dict | None = None
    tolerance: float = DEFAULT_TOL

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self):
        return {"verdict": self.verdict.value, "witness": self.witness,
                "tolerance": self.tolerance}


def check_A1(trace: GreedyTrace, optimal, constraint) -> AssumptionCheck:
    optimal = as_string(optimal)
    K = trace.K
    if len(optimal) != K:
        return AssumptionCheck("A1", Verdict.NOT_CHECKABLE,
                               {"reason": f"optimal length {len(optimal)} != K = {K}"})
    for k in range(1, K + 1):
        o_k = optimal[k - 1]
        if o_k not in constraint.extensions(trace.chosen.prefix(k - 1)):
            return AssumptionCheck("A1", Verdict.FAILS, {"k": k, "symbol": o_k})
    return AssumptionCheck("A1", Verdict.HOLDS)


def check_A2(objective, s, tol: float = DEFAULT_TOL) -> AssumptionCheck:
    s = as_string(s)
    if not s:
        raise ValueError("check_A2 needs a non-empty string")
    prev = 0.0
    for k in range(1, len(s) + 1):
        cur = objective.evaluate(s.prefix(k))
        single = objective.evaluate((s[k - 1],))
        if cur - prev > single + tol:
            return AssumptionCheck("A2", Verdict.FAILS,
                                   {"k": k, "symbol": s[k - 1],
                                    "increment": cur - prev, "singleton": single},
                                   tol)
        prev = cur
    return AssumptionCheck("A2", Verdict.HOLDS, tolerance=tol)


def check_A3(trace: GreedyTrace, tol: float = DEFAULT_TOL) -> AssumptionCheck:
    for step in trace.steps:
        bad = np.flatnonzero(step.increment <= tol)
        if bad.size:
            i = int(bad[0])
            return AssumptionCheck("A3", Verdict.FAILS,
                                   {"k": step.k, "symbol": int(step.symbols[i]),
                                    "increment": float(step.increment[i])}, tol)
    return AssumptionCheck("A3", Verdict.HOLDS, tolerance=tol)


@dataclass(frozen=True)
class AssumptionReport:
    a1: AssumptionCheck
    a2: AssumptionCheck
    a3: AssumptionCheck
    tolerance: float = DEFAULT_TOL
    # "all" / "some" / "none", filled only when checked against every maximizer
    optima_scope: dict = field(default_factory=dict)

    @property
    def verdicts(self) -> tuple[Verdict, Verdict, Verdict]:
        return self.a1.verdict, self.a2.verdict, self.a3.verdict

    def to_dict(self):
        return {"a1": self.a1.to_dict(), "a2": self.a2.to_dict(),
                "a3": self.a3.to_dict(), "tolerance": self.tolerance,
                "optima_scope": dict(self.optima_scope)}


def _scope(flags):
    if all(flags):
        return "all"
    return "some" if any(flags) else "none"


def check_assumptions(trace: GreedyTrace, objective, constraint,
                      optimum: OptimumReport | None = None,
                      tol: float = DEFAULT_TOL,
                      all_optima: bool = False) -> AssumptionReport:
    """Run A1-A3; A1 and A2 need the oracle optimum and are otherwise not checkable."""
    a3 = check_A3(trace, tol)
    if optimum is None:
        nc = {"reason": "no oracle optimum"}
        return AssumptionReport(AssumptionCheck("A1", Verdict.NOT_CHECKABLE, nc, tol),
                                AssumptionCheck("A2", Verdict.NOT_CHECKABLE, nc, tol),
                                a3, tol)
    a1 = check_A1(trace, optimum.best_string, constraint)
    a2 = check_A2(objective, optimum.best_string, tol)
    scope = {}
    if all_optima and optimum.maximizers:
        scope["A1"] = _scope([check_A1(trace, o, constraint).holds
                              for o in optimum.maximizers])
        scope["A2"] = _scope([check_A2(objective, o, tol).holds
                              for o in optimum.maximizers])
    return AssumptionReport(a1, a2, a3, tol, scope)


# ---------------------------------------------------------------------------
# String submodularity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubmodularityVerdict:
    holds: bool
    n_checked: int
    condition: str | None = None        # "monotone" or "diminishing"
    A: ActionString | None = None
    B: ActionString | None = None
    j: int | None = None
    lhs: float | None = None
    rhs: float | None = None

    def __bool__(self):
        return self.holds

    @property
    def witness(self):
        if self.holds:
            return None
        return (self.A, self.B, self.j)


def check_string_submodular(objective, constraint, tol: float = DEFAULT_TOL,
                            cap: int = DEFAULT_ORACLE_CAP) -> SubmodularityVerdict:
    """Exhaustively test monotonicity and diminishing returns on all prefix pairs.

    For every feasible ``B``, every proper prefix ``A`` of ``B`` and every
    symbol ``j`` with both ``Aj`` and ``Bj`` feasible, require
    ``f(A) <= f(B) + tol`` and ``f(Aj) - f(A) >= f(Bj) - f(B) - tol``.
    The first violation in lexicographic order of ``B`` is returned.
    """
    values = {ActionString(): 0.0}
    values.update(iter_feasible(objective, constraint, cap))
    ext = {s: frozenset(constraint.extensions(s)) for s in values}
    n = 0
    for B, fB in values.items():
        for k in range(len(B)):
            A = B.prefix(k)
            fA = values[A]
            n += 1
            if fA > fB + tol:
                return SubmodularityVerdict(False, n, "monotone", A, B, None, fA, fB)
            for j in sorted(ext[A] & ext[B]):
                n += 1
                gain_A = values[A.extend(j)] - fA
                gain_B = values[B.extend(j)] - fB
                if gain_A < gain_B - tol:
                    return SubmodularityVerdict(False, n, "diminishing", A, B, j,
                                                gain_A, gain_B)
    return SubmodularityVerdict(True, n)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float | None
    supported: bool
    certified: bool | None      # None when the bound's assumptions are not verified
    margin: float | None


@dataclass(frozen=True)
class Certification:
    ratio: float
    greedy_value: float
    optimum_value: float
    checks: tuple[BoundCheck, ...]

    @property
    def violations(self) -> tuple[BoundCheck, ...]:
        return tuple(c for c in self.checks if c.certified is False)

    @property
    def ok(self) -> bool:
        return not self.violations

    def get(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"ratio": self.ratio, "greedy_value": self.greedy_value,
                "optimum_value": self.optimum_value, "ok": self.ok,
                "checks": [c.__dict__ for c in self.checks]}


def certify(trace: GreedyTrace, optimum: OptimumReport, bounds: BoundsReport,
            assumptions: AssumptionReport,
            tol: float = CERTIFY_TOL) -> Certification:
    """Compare the true ratio ``f(G_K) / f(O)`` against every bound.

    A bound is *supported* when the assumptions its guarantee rests on were
    verified: beta2 needs A1 and A2; beta1 and beta_stepwise additionally
    need A3 (and beta1 a curvature of at least 1). The constant bounds
    beta0 and beta_nemhauser are reported for comparison only. Unsupported
    bounds carry ``certified=None``.
    """
    fO = optimum.best_value
    fG = trace.greedy_value
    ratio = fG / fO if fO > 0.0 else 1.0
    a1, a2, a3 = (assumptions.a1.holds, assumptions.a2.holds, assumptions.a3.holds)
    alpha_ok = bounds.alpha_G is None or bounds.alpha_G >= 1.0

    support = {
        "beta0": False,
        "beta_nemhauser": False,
        "beta1": a1 and a2 and a3 and alpha_ok,
        "beta2": a1 and a2,
        "beta_stepwise": a1 and a2 and a3,
    }
    checks = []
    for name, ok in support.items():
        value = getattr(bounds, name)
        supported = ok and value is not None
        margin = None if value is None else ratio - value
        certified = (margin >= -tol) if supported else None
        checks.append(BoundCheck(name, value, supported, certified, margin))
    return Certification(ratio, fG, fO, tuple(checks))
