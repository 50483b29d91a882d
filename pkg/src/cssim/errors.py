"""Exception types shared across the simulator."""


class CssimError(Exception):
    """Base class for all domain errors raised by this package."""


class NotMaximumLength(CssimError):
    """LFSR period fell short of 2^m - 1 for the given feedback polynomial."""


class InvalidPair(CssimError):
    """Two m-sequences whose periodic cross-correlation is not three-valued."""


class LengthMismatch(CssimError):
    """Vector arguments that must share a length do not."""


class InvalidRatio(CssimError):
    """Subsampling ratio that yields no rows or is below one."""


class DimensionMismatch(CssimError):
    """Operator and signal dimensions disagree."""


class RankDeficient(CssimError):
    """Gram matrix of the operator rows is not positive definite."""


class SingularSubproblem(CssimError):
    """Selected dictionary columns are rank-deficient beyond tolerance."""


class SupportOutOfRange(CssimError):
    """Support index outside the dictionary column range."""


class RateMismatch(CssimError):
    """Sample-rate tag of a signal does not match the consuming stage."""


class ConfigError(CssimError):
    """Experiment configuration file could not be validated."""
