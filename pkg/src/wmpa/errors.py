"""Exception hierarchy for the wmpa package.

Errors are grouped so callers can tell bad inputs (:class:`ValidationError`
and subclasses) from physically degenerate situations discovered while
running (:class:`DegenerateStateError` and subclasses) and from estimation
failures on otherwise valid data. Everything derives from
:class:`WmpaError`, so ``except WmpaError`` catches any failure this
package raises deliberately.
"""

from __future__ import annotations

__all__ = [
    "WmpaError",
    "ValidationError",
    "ConfigError",
    "RailRangeError",
    "DegenerateStateError",
    "GlobalPhaseDegenerateError",
    "UndefinedPhaseError",
    "DivergentMagnificationError",
    "NoSolutionError",
    "InsufficientDataError",
    "UndefinedSensitivityError",
    "CalibrationBoundaryError",
]


class WmpaError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(WmpaError, ValueError):
    """An input value violates a documented precondition."""


class ConfigError(ValidationError):
    """A configuration file or flag set cannot be resolved into a valid run."""


class RailRangeError(ValidationError):
    """A beam-displacer step pushed amplitude outside the working rail range."""


class DegenerateStateError(WmpaError):
    """A state has (numerically) zero norm where a nonzero norm is required."""


class GlobalPhaseDegenerateError(DegenerateStateError):
    """Pre- and post-selection overlap vanishes, so the signal phase only
    multiplies the surviving pointer by a global phase and carries no
    extractable information."""


class UndefinedPhaseError(WmpaError):
    """The amplified-phase direction vector vanished; no phase is defined."""


class DivergentMagnificationError(WmpaError):
    """The magnification 1/(1 + r) is undefined at r = -1."""


class NoSolutionError(WmpaError, ValueError):
    """A measured amplified phase is inconsistent with the calibrated r."""


class InsufficientDataError(WmpaError):
    """Zero detected photons; no estimate can be formed."""


class UndefinedSensitivityError(WmpaError):
    """The analytic sensitivity formula is singular at this operating point."""


class CalibrationBoundaryError(ValidationError):
    """The measured post-selection probability sits on the boundary {0, 1}."""
