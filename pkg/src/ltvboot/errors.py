"""Exception hierarchy shared by every ltvboot module."""


class LtvBootError(Exception):
    """Base class for all library errors."""


class NonPositiveResponse(LtvBootError, ValueError):
    """A daily response is zero or negative, so it has no logarithm."""


class DegenerateDesign(LtvBootError, ValueError):
    """The regression is unidentifiable (too few points or a singular design)."""


class DegenerateResample(DegenerateDesign):
    """A refit on bootstrap pseudo-data turned out unidentifiable."""


class MissingCovariate(LtvBootError, ValueError):
    """A weekday-aware fit was asked for a prediction without a weekday."""


class HorizonTooShort(LtvBootError, ValueError):
    """The lifetime horizon ends before the last observed day."""


class LengthMismatch(LtvBootError, ValueError):
    """Two bootstrap distributions with different replicate counts."""


class ZeroVariance(LtvBootError, ValueError):
    """Both samples are constant; the t statistic is undefined."""


class InvalidSeries(LtvBootError, ValueError):
    """Structural problem in a daily series (ordering, lengths, labels)."""


class ParseError(LtvBootError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateDay(ParseError):
    """The same (group, day) pair appears twice in an input file."""


class ScenarioError(LtvBootError, ValueError):
    """Invalid simulation scenario."""
