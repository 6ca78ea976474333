"""Exception hierarchy shared by the whole toolkit.

Every error carries a short machine-readable ``code`` used by the CLI when
reporting to stderr, and maps onto one of three process exit codes:

* 2 -- configuration errors (bad flags, missing required values)
* 3 -- data errors (unreadable/inconsistent inputs, empty pools, ...)
* 4 -- internal invariant violations
"""


class WirekitError(Exception):
    code = "error"
    exit_code = 4


class ConfigError(WirekitError):
    code = "config"
    exit_code = 2


class DataError(WirekitError):
    code = "data"
    exit_code = 3


class ParseError(DataError):
    code = "parse"


class BoundsError(DataError):
    code = "bounds"


class FormatError(DataError):
    code = "format"


class DimMismatch(DataError):
    code = "dim-mismatch"


class ShapeMismatch(DataError):
    code = "shape-mismatch"


class EmptyDataset(DataError):
    code = "empty-dataset"


class EmptyInterval(DataError):
    code = "empty-interval"


class EmptyGT(DataError):
    code = "empty-gt"


class NoPlacement(DataError):
    code = "no-placement"


class FractionTooSmall(DataError):
    code = "fraction-too-small"


class AllMasked(DataError):
    code = "all-masked"


class DomainError(DataError):
    code = "domain"


class KinkDetected(DataError):
    code = "kink"


class MissingPair(DataError):
    code = "missing-pair"


class InternalError(WirekitError):
    code = "internal"
    exit_code = 4
