"""Election-shock identification and local-projection impulse responses."""

__version__ = "0.1.0"

from .errors import (
    DegenerateQuote,
    DegenerateShock,
    ElecShockError,
    InsufficientHistory,
    InsufficientSample,
    InvalidConfig,
    MissingData,
    NotYetPublished,
    OutOfRange,
    OverlapError,
    RankDeficient,
    SchemaError,
    SingularBread,
    UnknownOutcome,
)

__all__ = [
    "DegenerateQuote", "DegenerateShock", "ElecShockError", "InsufficientHistory",
    "InsufficientSample", "InvalidConfig", "MissingData", "NotYetPublished", "OutOfRange",
    "OverlapError", "RankDeficient", "SchemaError", "SingularBread", "UnknownOutcome",
]
