"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`InflationError`.  Problems with the input data derive from
:class:`DataError`; problems with arguments or configuration derive from
:class:`ConfigError`.  The CLI maps the two families onto distinct exit codes.
"""


class InflationError(Exception):
    """Base class for all package errors."""


class DataError(InflationError, ValueError):
    """The input data cannot support the requested computation."""


class ConfigError(InflationError, ValueError):
    """An argument or configuration value is invalid."""


# --- panel ingestion -------------------------------------------------------

class MalformedRow(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCell(MalformedRow):
    pass


class NonPositivePrice(MalformedRow):
    pass


class NonContiguousMonths(DataError):
    pass


# --- panel access ----------------------------------------------------------

class UnknownCategory(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownTag(ConfigError):
    pass


class AllCategoriesExcluded(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class NoPredecessor(DataError):
    pass


class MissingCell(DataError):
    pass


class EmptyActiveSet(DataError):
    pass


# --- cross-section statistics ----------------------------------------------

class EmptyCrossSection(DataError):
    pass


class DegenerateTrim(DataError):
    pass


class PercentileOutOfRange(ConfigError):
    pass


# --- trends and statistics -------------------------------------------------

class WindowTooLarge(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class EmptyOverlap(DataError):
    pass


class ZeroVariance(DataError):
    pass


class LengthMismatch(ConfigError):
    pass


class ZeroMean(DataError):
    pass


class KTooLarge(ConfigError):
    pass
