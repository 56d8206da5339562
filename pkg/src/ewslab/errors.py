"""Exception types shared across the package."""


class EwsLabError(Exception):
    """Base class for all ewslab errors."""


class TieError(EwsLabError):
    """Two observations share the same value; rank statistics are undefined."""


class DegenerateError(EwsLabError):
    """A variance or autocorrelation denominator is zero (constant data)."""


class LengthMismatch(EwsLabError):
    """Paired series have different lengths."""


class RangeError(EwsLabError):
    """A parameter is outside its documented domain."""


class NoStableBranch(EwsLabError):
    """The bifurcation parameter is not on the stable side of the branch."""


class EscapeLimit(EwsLabError):
    """Too many consecutive trajectory restarts; the configuration is pathological."""


class ConfigError(EwsLabError):
    """Invalid experiment or CLI configuration."""
