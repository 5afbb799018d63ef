"""Exception taxonomy shared across the toolkit.

Two broad families matter to callers: input/data problems (``SchemaError``
and friends) and backend/provider problems (``ProviderError``,
``AllParsesFailed``).  The CLI maps the first family to exit code 2 and the
second to exit code 3.
"""


class VidevalError(Exception):
    """Base class for all toolkit errors."""


# --- dataset / config / rule files -----------------------------------------

class SchemaError(VidevalError):
    """Input record, config, or rule file violates its schema."""


class DuplicateId(SchemaError):
    """Two records in one dataset share an id."""


class MalformedRule(SchemaError):
    """Discretization rule with overlapping, gapped, or invalid bins."""


class OutOfRangeRating(SchemaError):
    """Rating outside the scale the input format declares."""


class UnresolvedId(SchemaError):
    """A preference pair references a video id missing from the dataset."""


# --- frame pipeline ----------------------------------------------------------

class UnreadableMedia(VidevalError):
    """The decoder hook could not produce frames for a record."""


class NoInterpolatorConfigured(VidevalError):
    """Source fps is below the target and no interpolation hook is set."""


class InvalidTarget(VidevalError):
    """Requested output fps is not reachable by downsampling."""


class TargetExceedsSource(VidevalError):
    """Crop target is larger than the source frames."""


class TooFewFrames(VidevalError):
    """Operation needs more frames than the sequence holds."""


# --- metrics / providers ------------------------------------------------------

class ShapeMismatch(VidevalError):
    """Two frames with different dimensions or channel counts."""


class ProviderError(VidevalError):
    """An external provider (embedding, IQA, scorer service) failed."""


# --- discretization -----------------------------------------------------------

class OutOfDomain(VidevalError):
    """Metric value outside the union of a rule's intervals."""


class RuleMismatch(VidevalError):
    """Rule applied to a value of a different metric or direction."""


# --- statistics ----------------------------------------------------------------

class DegenerateInput(VidevalError):
    """The statistic is undefined on this input (not zero: undefined)."""


class NonIntegerScore(VidevalError):
    """Histogramming requires integer-valued labels."""


# --- scorer ----------------------------------------------------------------------

class ParseError(VidevalError):
    """Base for scorer-output parsing failures."""

    def __init__(self, aspect: str, message: str):
        super().__init__(message)
        self.aspect = aspect


class MissingAspect(ParseError):
    def __init__(self, aspect: str):
        super().__init__(aspect, f"no score line found for aspect {aspect!r}")


class DuplicateAspect(ParseError):
    def __init__(self, aspect: str):
        super().__init__(aspect, f"aspect {aspect!r} scored more than once")


class OutOfRangeScore(ParseError):
    def __init__(self, aspect: str, value: float):
        super().__init__(aspect, f"aspect {aspect!r} scored {value!r}, outside the allowed range")
        self.value = value


class WrongArity(VidevalError):
    """Regression output with a number of values other than five."""


class UnmappedAspect(VidevalError):
    """Feature-composite backend has no metric configured for an aspect."""

    def __init__(self, aspect: str):
        super().__init__(f"no metric mapped for aspect {aspect!r}")
        self.aspect = aspect


# --- harness -------------------------------------------------------------------------

class TooFewPrompts(VidevalError):
    """Subsample size exceeds the number of unique prompts."""


class AllParsesFailed(VidevalError):
    """Every scored record failed to parse; no statistic can be computed."""


class EmptyModelGroup(VidevalError):
    """A leaderboard model group contains no scored videos."""
