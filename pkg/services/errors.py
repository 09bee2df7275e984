"""
Exception hierarchy shared by every cytogate module.

Callers catch ``CytogateError`` to handle any domain failure; the CLI turns it
into exit code 2 and the routers into HTTP 400.
"""


class CytogateError(Exception):
    """Base class for all domain errors"""


class BoundsError(CytogateError):
    """Region does not fit inside the image"""


class InvalidSizeError(CytogateError):
    """Requested crop or resize size is not achievable"""


class EmptyGridError(CytogateError):
    """Slicing produced no fragments"""


class InconsistentSpecError(CytogateError):
    """Fragment spec was not produced from this image"""


class EmptyInputError(CytogateError):
    """An operation received an empty collection"""


class ArityError(CytogateError):
    """Wrong number of inputs for the requested strategy"""


class TooSmallError(CytogateError):
    """Image is smaller than the operator footprint"""


class ModelLoadError(CytogateError):
    """Serialized model or its metadata cannot be read"""


class ShapeMismatchError(CytogateError):
    """Model input/output shape differs from the preprocessing contract"""


class PairingError(CytogateError):
    """A basename has no partner in the other directory"""


class StrategyInapplicableError(CytogateError):
    """Split strategy cannot be applied to this manifest"""


class InvalidConfigurationError(CytogateError):
    """Parameters are individually valid but do not fit together"""


class DegenerateManifestError(CytogateError):
    """Manifest lacks one of the two labels"""


class EmptyEvaluationError(CytogateError):
    """Metrics requested over zero samples"""


class LengthMismatchError(CytogateError):
    """Paired sequences have different lengths"""


class OutOfRangeError(CytogateError):
    """Numeric argument outside its allowed range"""


class ImageReadError(CytogateError):
    """Image file missing or not decodable"""


class ScorerError(CytogateError):
    """Scorer failed while scoring a fragment"""
