"""Exception hierarchy shared by all modules."""


class ElecShockError(Exception):
    """Base class for estimation and data errors."""


class MissingData(ElecShockError):
    pass


class OutOfRange(ElecShockError):
    pass


class OverlapError(ElecShockError):
    pass


class SchemaError(ElecShockError, ValueError):
    pass


class DegenerateQuote(ElecShockError, ValueError):
    pass


class NotYetPublished(ElecShockError, LookupError):
    pass


class RankDeficient(ElecShockError):
    """Design matrix is (numerically) rank deficient.

    ``columns`` names the columns judged linearly dependent on the rest.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class SingularBread(ElecShockError):
    pass


class InsufficientHistory(ElecShockError):
    pass


class UnknownOutcome(ElecShockError):
    pass


class DegenerateShock(ElecShockError):
    pass


class InsufficientSample(ElecShockError):
    pass


class InvalidConfig(ElecShockError, ValueError):
    pass
