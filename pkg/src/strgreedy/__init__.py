"""Greedy string optimization with trajectory-computable performance bounds."""
from ._kernels import BACKEND
from .bounds import (AssumptionCheck, AssumptionReport, BoundsReport,
                     Certification, CurvatureReport, SubmodularityVerdict,
                     Verdict, bound_beta1, bound_beta2, bound_constants,
                     bound_stepwise, certify, check_A1, check_A2, check_A3,
                     check_assumptions, check_string_submodular,
                     compute_bounds, greedy_curvature)
from .core import (ActionString, ExplicitConstraint, FunctionObjective,
                   GreedyTrace, OptimumReport, PrefixClosedConstraint,
                   StepRecord, StringObjective, TableObjective,
                   UniformConstraint, UniformNoRepeatConstraint,
                   brute_force_optimum, greedy_solve, increments,
                   iter_feasible, uniform_no_repeat_constraint)
from .errors import (ConfigError, EmptyCandidateSet, EnumerationTooLarge,
                     InvalidCurvature, InvalidDimensions, InvalidSymbol,
                     NoPositiveIncrement, StageOverflow, StrGreedyError,
                     ZeroDenominator)

__version__ = "0.1.0"
