"""Exception taxonomy shared across the package.

Three families, chosen so the command-line tool can map failures to
distinct exit codes: configuration/input problems, numerical failures,
and I/O problems (plain OSError, not wrapped).
"""


class ValidationError(ValueError):
    """Bad configuration value, schema violation, or invalid input data."""


class ShapeError(ValidationError):
    """Array dimensions inconsistent with a kernel spec or dataset."""


class ParseError(ValidationError):
    """Malformed input file; the message names the offending row/column."""


class NumericalError(RuntimeError):
    """Linear algebra failed beyond what jitter escalation can recover."""


class StudyError(NumericalError):
    """Too many replicate failures to report an aggregate study result."""
