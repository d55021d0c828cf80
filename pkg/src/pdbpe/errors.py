"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: DataError -> 2, NumericError -> 3.
"""


class PdbpeError(Exception):
    """Base class for all pdbpe-specific failures."""


class DataError(PdbpeError):
    """Malformed or inconsistent input data, schemas, or configuration."""


class NumericError(PdbpeError):
    """Numeric failure such as a degenerate fit or a non-positive-definite matrix."""
