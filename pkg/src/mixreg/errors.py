"""Exception hierarchy shared across the package."""


class MixregError(Exception):
    """Base class for all mixreg errors."""


class ConfigError(MixregError):
    """Invalid configuration value or unparseable config file."""


class InvalidCorrelation(ConfigError):
    """Mean correlation r outside the PSD range (-1/(k-1), 1]."""


class InvalidCorruption(ConfigError):
    """Corruption rate c outside [0, 1/(k-1))."""


class LabelOutOfRange(MixregError):
    """A class label is not in {0, ..., k-1}."""


class DimensionMismatch(MixregError):
    """Array shapes are incompatible."""


class EmptyTestSet(MixregError):
    """Error estimation requested on an empty test set."""


class DegenerateWeights(MixregError):
    """All classifier columns coincide; margins are undefined."""


class NonConvergence(MixregError):
    """An iterative routine exhausted its budget before converging."""


class DegenerateCorrelation(MixregError):
    """|omega| is too close to 1 for the bivariate quadrature."""


class NotPositiveDefinite(MixregError):
    """Cholesky factorization failed; the matrix is not SPD."""


class NegativeRadicand(MixregError):
    """The dual-field variance radicand went negative (infeasible point)."""


class CorrelationOutOfRange(MixregError):
    """Computed cross-class correlation left the open interval (-1, 1)."""


class SingularDelta(MixregError):
    """The ridge closed form hit a singular 2x2 system."""


class ZeroColumn(MixregError):
    """Boundary fraction requested for an all-zero weight column."""


class IoError(MixregError):
    """Failed to read or write an artifact file."""
