"""Exception types raised by the library."""


class LacunaryError(Exception):
    """Base class for all library errors."""


class TowerOverflow(LacunaryError):
    """A sequence term would exceed the configured bit-length cap.

    Switch to a reduced tower or to symbolic counting.
    """

    def __init__(self, k, bits, cap):
        self.k = k
        self.bits = bits
        self.cap = cap
        super().__init__(f"term n_{k} needs {bits} bits, cap is {cap}")


class NotIncreasing(LacunaryError):
    """A sequence that must be strictly increasing is not."""


class PairBudgetExceeded(LacunaryError):
    """The N*N pair enumeration would exceed the pair budget."""


class InvalidCase(LacunaryError):
    """Coefficients outside the hypotheses of the structural predictor."""


class DegenerateWeights(LacunaryError):
    """All window weights vanish, so the normalized weights are undefined.

    The zero report is attached as ``report``.
    """

    def __init__(self, report):
        self.report = report
        super().__init__("window weights vanish identically (a = 0)")


class WeightsNotNormalized(LacunaryError):
    """Weights whose squares do not sum to one."""


class UsageError(LacunaryError):
    """Bad command line or configuration input."""
