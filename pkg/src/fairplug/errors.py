"""Semantic exception hierarchy for the toolkit.

Every error raised deliberately by this package derives from
:class:`FairplugError`, so callers can distinguish toolkit failures from
programming errors.  The command-line layer maps these onto process exit
codes (see :mod:`fairplug.cli`):

* :class:`ValidationError` -- a caller violated an operation's contract
  (bad parameter range, wrong arity, inconsistent shapes).  Exit code 2.
* :class:`DataError` -- input data could not be ingested or is unusable
  (missing columns, unmappable values, empty files).  Exit code 3.
* :class:`DegenerateDataError` -- data was structurally fine but
  statistically degenerate (a class or group entirely absent), so a
  required empirical quantity is undefined.  Exit code 3.
* :class:`NumericError` -- a numeric procedure failed (non-finite
  objective, diverging iteration).  Exit code 4.
"""

from __future__ import annotations


class FairplugError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FairplugError, ValueError):
    """An argument or configuration violates an operation's contract."""


class DataError(FairplugError):
    """Input data could not be read or mapped as declared."""


class DegenerateDataError(DataError):
    """An empirical quantity is undefined on the given data.

    Raised when a label class, sensitive group, or (label, group) cell
    required by a conditional rate or prior is empty, or when an
    empirical prior hits 0 or 1 exactly -- situations the underlying
    theory excludes by assumption.
    """


class NumericError(FairplugError, ArithmeticError):
    """A numeric routine produced non-finite values or failed to proceed."""
