"""Exception types shared across the package.

Every error raised by the public API derives from :class:`SplitflowError`,
so callers can catch one base class at pipeline boundaries while tests
assert on the precise subclass.
"""


class SplitflowError(Exception):
    """Base class for all package-specific errors."""


# --- event / series construction ---

class EmptyDatapoint(SplitflowError):
    """A datapoint with zero events where at least one is required."""


# --- simulator ---

class InvalidExponent(SplitflowError):
    """Metaorder length exponent outside the supported range (alpha > 1)."""


class OutsideLmfRegime(SplitflowError):
    """A quantity was requested outside the regime where the order-splitting
    asymptotics apply (gamma in (0, 1), equivalently alpha in (1, 2))."""


# --- clustering ---

class EmptyTrader(SplitflowError):
    """A per-trader operation received zero events."""


# --- power-law tail fitting ---

class EmptySample(SplitflowError):
    """An empty sample where observations are required."""


class InsufficientData(SplitflowError):
    """Too few observations for a stable tail fit."""


class DegenerateSample(SplitflowError):
    """All observations identical; a tail exponent is undefined."""


# --- correlation / spectral analysis ---

class LagOutOfRange(SplitflowError):
    """Requested autocorrelation lag outside [1, n_eps - 1]."""


class SeriesTooShort(SplitflowError):
    """Series shorter than one spectral segment."""


class NoPowerLawRegion(SplitflowError):
    """No usable power-law decay region found in the correlation curve."""


class NonPositiveValue(SplitflowError):
    """A fit requiring strictly positive values received a non-positive one."""


class FitDiverged(SplitflowError):
    """Nonlinear fit failed to converge to a finite optimum."""


class NoLrcDetected(SplitflowError):
    """Spectral slope inconsistent with long-range correlation."""


class CellUnusable(SplitflowError):
    """A calibration-table cell had too many failed replicas to be trusted."""


class OutOfCalibration(SplitflowError):
    """Requested point outside the calibration table's validity range."""


# --- micro-parameter inference ---

class InvalidPrefactor(SplitflowError):
    """Correlation prefactor must be strictly positive."""


# --- ingestion / plotting ---

class ParseError(SplitflowError):
    """Malformed input row. Carries the 1-based line number when known."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class NothingToPlot(SplitflowError):
    """No unflagged rows available for plotting."""
