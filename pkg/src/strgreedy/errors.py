"""Exception types raised by strgreedy."""


class StrGreedyError(Exception):
    """Base class for all library errors."""


class InvalidDimensions(StrGreedyError, ValueError):
    pass


class InvalidSymbol(StrGreedyError, ValueError):
    pass


class StageOverflow(StrGreedyError, ValueError):
    pass


class EmptyCandidateSet(StrGreedyError):
    """No feasible extension exists at greedy step ``k``.

    ``partial`` holds the trace built up to step ``k - 1``.
    """

    def __init__(self, k, partial=None):
        self.k = k
        self.partial = partial
        super().__init__(f"no feasible candidate at greedy step {k}")


class EnumerationTooLarge(StrGreedyError):
    def __init__(self, estimate, cap):
        self.estimate = estimate
        self.cap = cap
        super().__init__(
            f"estimated enumeration size {estimate} exceeds cap {cap}")


class NoPositiveIncrement(StrGreedyError):
    """Curvature undefined at step ``k``: no candidate has a positive increment."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"no candidate with positive increment at step {k}")


class InvalidCurvature(StrGreedyError, ValueError):
    def __init__(self, alpha_G):
        self.alpha_G = alpha_G
        super().__init__(f"greedy curvature {alpha_G!r} is below 1")


class ZeroDenominator(StrGreedyError, ZeroDivisionError):
    pass


class ConfigError(StrGreedyError, ValueError):
    """Bad experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
