"""Exception types shared across the tracking stack."""


class CathtrackError(Exception):
    """Base class for all package errors."""


class InvalidStateError(CathtrackError):
    """Catheter state outside its mechanical envelope."""


class CalibrationError(CathtrackError):
    """Degenerate fiducials or a non-invertible rectification map."""


class ParameterError(CathtrackError):
    """Operation parameter outside its documented range."""


class TrackingLostError(CathtrackError):
    """Segmented catheter is not connected to the inlet region."""


class GeometryError(CathtrackError):
    """Degenerate geometric input (e.g. coincident tip points)."""


class RankDeficiencyError(CathtrackError):
    """Point correspondences do not constrain a full affine map.

    ``direction`` is the unit vector along which the source points carry
    no spread (the normal of the common plane).
    """

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class ProtocolError(CathtrackError):
    """Malformed wire payload; ``offset`` is the byte position when known."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class SchemaError(ProtocolError):
    """Structurally valid payload violating the message schema.

    ``field`` names the offending field.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class GlitchError(CathtrackError):
    """Both quadrature channels changed in one sample (sampling too slow).

    ``index`` is the position of the offending sample in the stream.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
