"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: data-format problems exit
with 2, shape or configuration problems with 3, oracle mismatches
with 4.
"""


class StasimError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(StasimError):
    """Serialized data is out of contract (bad magic, truncation, ...)."""


class BoundViolation(DataFormatError):
    """A block holds more non-zeros than its density bound allows."""

    def __init__(self, col: int, block_index: int, found_nnz: int, bound: int):
        self.col = int(col)
        self.block_index = int(block_index)
        self.found_nnz = int(found_nnz)
        self.bound = int(bound)
        super().__init__(
            f"density bound violated at column {self.col}, block "
            f"{self.block_index}: {self.found_nnz} non-zeros exceed bound {self.bound}"
        )


class ShapeError(StasimError):
    """Operand shapes do not fit each other or the array geometry."""


class ConfigError(StasimError):
    """An ArrayConfig or SparsityProfile violates its invariants."""


class OracleMismatch(StasimError):
    """Simulated result differs from the independent reference product."""
