"""Exception types raised by the processing chain."""


class SDFCError(Exception):
    """Base class for all package errors."""


class GeometryError(SDFCError, ValueError):
    """Target geometry is not physical over the aperture."""


class GateError(SDFCError, ValueError):
    """Fast-time gate too small for the scene."""


class DomainError(SDFCError, ValueError):
    """DataMatrix is in the wrong domain for the requested operation."""


class SupportError(SDFCError, ValueError):
    """Range spectrum does not cover the band needed for the sub-band split."""


class MetricError(SDFCError, ValueError):
    """Metric is undefined for the given input (e.g. all-zero matrix)."""


class PeakCountError(SDFCError, ValueError):
    """More peaks requested than there are nonzero cells."""


class GridCoverageError(SDFCError, ValueError):
    """Search grid does not cover the required parameter region."""


class IngestError(SDFCError, ValueError):
    """Raw binary file or its header is inconsistent."""


class PrincipalIntervalError(SDFCError, ValueError):
    """Frequency or chirp rate lies outside the LVT principal interval."""
