"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`AlphaLedgerError`
so callers (and the HTTP service) can map failures to responses without
catching bare ``Exception``.
"""

from __future__ import annotations


class AlphaLedgerError(Exception):
    """Base class for all package errors."""


class DomainError(AlphaLedgerError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateInputError(AlphaLedgerError, ValueError):
    """Input data cannot support a valid test (too small, zero variance, ...)."""


class SchemaError(AlphaLedgerError, ValueError):
    """Structurally mismatched inputs (bin labels, unknown columns, ...)."""


class ConfigError(AlphaLedgerError, ValueError):
    """Invalid ledger, policy or experiment configuration."""


class ExhaustionError(AlphaLedgerError, RuntimeError):
    """A budget was requested from an exhausted ledger."""


class MissingInputError(AlphaLedgerError, ValueError):
    """A policy required an input (e.g. support fraction) that was absent."""


class AccountingError(AlphaLedgerError, RuntimeError):
    """A wealth update would violate the ledger's non-negativity contract."""


class IngestionError(AlphaLedgerError, ValueError):
    """A dataset file could not be parsed."""


class NotFoundError(AlphaLedgerError, KeyError):
    """Unknown session, record or visualization id."""


class StateError(AlphaLedgerError, RuntimeError):
    """Operation not valid for the record's current state."""


class ReplayError(AlphaLedgerError, ValueError):
    """A workflow file does not match the dataset it is replayed against."""
