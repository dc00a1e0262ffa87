"""Exact truncated q-series for depth-two mock theta identities, plus numeric completions."""

from .series import (
    Comparison,
    QSeries,
    SeriesUsageError,
    TruncationPolicy,
    UnsupportedSeriesError,
    add,
    mul,
    one_plus_monomial_inv,
    poch,
    poch_inv,
    qbinom,
    window_compare,
)
from .special import Monomial, SeriesId, build_series
from .identities import IdentityRecord, VerifyReport, lookup, registry, stability_check, verify, verify_all

__version__ = "0.1.0"

__all__ = [
    "Comparison",
    "IdentityRecord",
    "Monomial",
    "QSeries",
    "SeriesId",
    "SeriesUsageError",
    "TruncationPolicy",
    "UnsupportedSeriesError",
    "VerifyReport",
    "add",
    "build_series",
    "lookup",
    "mul",
    "one_plus_monomial_inv",
    "poch",
    "poch_inv",
    "qbinom",
    "registry",
    "stability_check",
    "verify",
    "verify_all",
    "window_compare",
]
