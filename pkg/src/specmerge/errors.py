"""Exception hierarchy for specmerge.

Everything derives from :class:`SpecmergeError` so callers can catch the
library's failures with a single except clause. Validation errors double as
``ValueError`` for interoperability with generic numeric code.
"""


class SpecmergeError(Exception):
    """Base class for all specmerge errors."""


class InvalidSignal(SpecmergeError, ValueError):
    """Signal is too short or contains non-finite samples."""


class InvalidLag(SpecmergeError, ValueError):
    """Requested autocovariance lag is out of range."""


class InvalidBandwidth(SpecmergeError, ValueError):
    """Smoothing bandwidth is incompatible with the series length."""


class DegenerateSpectrum(SpecmergeError, ValueError):
    """A spectral estimate is identically zero (or nonpositive) where a
    strictly positive density is required."""


class NonCausal(SpecmergeError, ValueError):
    """AR(2) root modulus M <= 1; the process would not be causal."""


class GridMismatch(SpecmergeError, ValueError):
    """Two spectral densities do not share the same frequency grid."""


class NotNormalized(SpecmergeError, ValueError):
    """An operation requiring unit-integral densities received an
    unnormalized one."""


class LabelMismatch(SpecmergeError, ValueError):
    """Two clusterings are defined over different channel sets."""


class TooFewChannels(SpecmergeError, ValueError):
    """Clustering needs at least two input channels."""


class InvalidK(SpecmergeError, ValueError):
    """Requested cluster count is outside 1..N."""


class UnknownDesign(SpecmergeError, KeyError):
    """Requested simulation design name is not in the catalog."""


class FormatError(SpecmergeError, ValueError):
    """An input file does not conform to the expected format."""
