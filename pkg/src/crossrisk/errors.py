"""Exception taxonomy for the crossrisk engine.

Every error raised by the package derives from CrossRiskError so callers
can catch one base type at process boundaries (the CLI maps these onto
exit codes).
"""


class CrossRiskError(Exception):
    """Base class for all crossrisk errors."""


# --- store -----------------------------------------------------------------

class UnknownInstrument(CrossRiskError):
    """Referenced instrument was never registered."""


class ConflictingDuplicate(CrossRiskError):
    """A record at an existing (key, timestamp) carries a different value."""


class NonFiniteValue(CrossRiskError):
    """NaN or infinity where a finite real is required."""


class NonPositivePrice(CrossRiskError):
    """Price fields must be strictly positive."""


# --- ingestion --------------------------------------------------------------

class FileUnreadable(CrossRiskError):
    """Input file missing or not readable."""


class MalformedHeader(CrossRiskError):
    """CSV header does not match any known record format."""


class RejectRateExceeded(CrossRiskError):
    """More than 10% of a file's data lines failed to parse."""


# --- source fusion ----------------------------------------------------------

class EmptySourceSet(CrossRiskError):
    """At least one data source is required."""


class DuplicateKind(CrossRiskError):
    """Source kinds must be distinct when deriving prior weights."""


class NoObservations(CrossRiskError):
    """Fusion needs at least one reporting source."""


class UnknownSource(CrossRiskError):
    """Observation from a source that has no configured weight."""


class KeyMismatch(CrossRiskError):
    """Two keyed inputs must share exactly the same key set."""


class NonPositiveLearningRate(CrossRiskError):
    """Weight-update learning rate must be > 0."""


class InsufficientHistory(CrossRiskError):
    """Not enough points in the window for the requested statistic."""


# --- analytics --------------------------------------------------------------

class MisalignedWindows(CrossRiskError):
    """Per-instrument return windows must have equal length."""


class NotSymmetric(CrossRiskError):
    """Matrix argument must be symmetric."""


# --- text providers ---------------------------------------------------------

class ProviderError(CrossRiskError):
    """Base class for text-insight provider failures."""


class ProviderTimeout(ProviderError):
    """Remote provider did not answer within the deadline (after retries)."""


class ProviderUnparseable(ProviderError):
    """Remote provider response did not match the insight schema (after retries)."""


class CredentialMissing(ProviderError):
    """Remote provider requires a credential that is not set."""


# --- synthesis --------------------------------------------------------------

class NonPositiveVolatility(CrossRiskError):
    """Reliability scoring needs a strictly positive volatility estimate."""


# --- backtesting ------------------------------------------------------------

class InsufficientWarmup(CrossRiskError):
    """Scenario interval holds too few bars to warm up the rolling window."""


class EmptyEvaluation(CrossRiskError):
    """Metrics require at least one evaluated tick."""


class LengthMismatch(CrossRiskError):
    """Paired evaluation series must be the same length."""


class InvalidSpec(CrossRiskError):
    """Synthetic market specification is out of range or inconsistent."""


# --- configuration ----------------------------------------------------------

class ConfigError(CrossRiskError):
    """Configuration file is invalid; carries one message per violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
