"""Exception hierarchy shared by every module of the package."""


class ISBPLSError(Exception):
    """Base class for all errors raised by isbpls."""


class DimensionMismatch(ISBPLSError, ValueError):
    pass


class NonFinite(ISBPLSError, ValueError):
    pass


class InvalidHyper(ISBPLSError, ValueError):
    pass


class DegenerateColumn(ISBPLSError, ArithmeticError):
    """A column collapsed onto the span of its predecessors during orthogonalization."""

    def __init__(self, column: int, norm: float):
        super().__init__(f"column {column} has post-projection norm {norm:.3e}")
        self.column = column
        self.norm = norm


class NoConvergence(ISBPLSError, ArithmeticError):
    """An iteration hit its budget. ``last`` carries the final iterate."""

    def __init__(self, message: str, last=None, residual: float = float("nan")):
        super().__init__(message)
        self.last = last
        self.residual = residual


class AllZero(ISBPLSError, ArithmeticError):
    pass


class SingularScores(ISBPLSError, ArithmeticError):
    pass


class InvalidConfig(ISBPLSError, ValueError):
    pass


class ScheduleGap(ISBPLSError, ValueError):
    pass


class EmptyTruth(ISBPLSError, ValueError):
    pass


class MisalignedHorizons(ISBPLSError, ValueError):
    pass


class IllConditioned(ISBPLSError, ArithmeticError):
    pass


class DataError(ISBPLSError, ValueError):
    """Malformed input file."""


class ParseError(DataError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class NonPositivePrice(ParseError):
    pass


class RaggedRow(ParseError):
    pass
