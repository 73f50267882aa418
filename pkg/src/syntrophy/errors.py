"""Exception types raised by the analysis routines."""


class SyntrophyError(Exception):
    """Base class for all package errors."""


class ConfigError(SyntrophyError, ValueError):
    """Malformed or out-of-range configuration input."""


class OutOfRegionError(SyntrophyError, ValueError):
    """A state lies outside the admissible region of the reduced system."""


class HypothesisError(SyntrophyError, ValueError):
    """The growth model violates the monotonicity hypotheses."""


class ResidualError(SyntrophyError, ValueError):
    """A candidate equilibrium does not satisfy its defining equations."""


class AtBifurcationError(SyntrophyError):
    """The dilution rate coincides with a threshold value.

    Parameters
    ----------
    name : str
        Threshold name, one of ``D1``, ``D2``, ``D3``, ``D4``.
    value : float
        The threshold value.
    """

    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"D is within tolerance of threshold {name}={value!r}")
