class FunRegError(Exception): pass
class DimensionMismatchError(FunRegError): pass
class DomainError(FunRegError): pass
class ConfigError(FunRegError): pass
class DegenerateFitError(FunRegError): pass
class CoverageUndefinedError(FunRegError): pass


class ParseError(FunRegError):
    """Raised when an input file cannot be read as functional data

    :param message: What went wrong
    :param row: The 1-based data row where the problem was found, if known
    :param column: The column name where the problem was found, if known
    """

    def __init__(self, message: str, *, row: int = None, column: str = None):
        location = []
        if row is not None:
            location.append("row {}".format(row))
        if column is not None:
            location.append("column {}".format(column))
        if location:
            message = "{} ({})".format(message, ", ".join(location))
        super().__init__(message)
        self.row = row
        self.column = column


class TuningError(FunRegError):
    """Raised when every (K, lambda) pair of a tuning grid is degenerate

    :param message: What went wrong
    :param table: The tuning table that was evaluated
    """

    def __init__(self, message: str, table = None):
        super().__init__(message)
        self.table = table
