"""Exception hierarchy shared by all subml modules."""


class SubmlError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedOrder(SubmlError, ValueError):
    """Modulation order not covered by the square-QAM/PAM formulas."""


class CapExceeded(SubmlError):
    """Pair scan would exceed the configured work limit."""


class EmptyPairs(SubmlError, ValueError):
    pass


class EmptyInput(SubmlError, ValueError):
    pass


class DimensionMismatch(SubmlError, ValueError):
    pass


class SingularPoint(SubmlError, ValueError):
    """Objective evaluated at a pole (beta <= 0 or beta == some pair distance)."""


class Infeasible(SubmlError):
    """Target error probability cannot be reached on the requested branch."""

    def __init__(self, message, target_p=None, limit=None):
        super().__init__(message)
        self.target_p = target_p
        self.limit = limit


class NoConvergence(SubmlError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class SweepAborted(SubmlError):
    """A sweep point failed; carries the SNR at which it happened."""

    def __init__(self, snr_db, cause):
        super().__init__(f"sweep aborted at snr_db={snr_db:g}: {cause}")
        self.snr_db = snr_db
        self.cause = cause


class ConfigError(SubmlError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
