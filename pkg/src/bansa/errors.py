"""Exception hierarchy.

Every error raised on purpose by this package derives from :class:`BansaError`
so callers (and the CLI) can map failures onto exit codes without catching
unrelated exceptions.
"""


class BansaError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InvalidInput(BansaError, ValueError):
    exit_code = 1


class ShapeError(BansaError, ValueError):
    exit_code = 1


class DegenerateCorrelation(BansaError, ArithmeticError):
    """Pearson correlation is undefined because one side is constant."""

    exit_code = 1


class InsufficientPool(BansaError, ValueError):
    exit_code = 1


class ConfigError(BansaError, ValueError):
    """Run configuration failed validation.

    ``problems`` lists every violated field, not just the first one.
    """

    exit_code = 1

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class TensorFormatError(BansaError):
    exit_code = 2


class BadMagic(TensorFormatError):
    pass


class BadVersion(TensorFormatError):
    pass


class TruncatedPayload(TensorFormatError):
    pass


class DimOverflow(TensorFormatError):
    pass


class InvariantViolation(BansaError, AssertionError):
    exit_code = 3
