"""Exception types shared across the package."""


class HardLabelError(Exception):
    """Base class for all package errors."""


class ShapeMismatchError(HardLabelError, ValueError):
    """Two images (or an image and an oracle) disagree on shape or dynamic range."""


class NTooLargeError(HardLabelError, ValueError):
    """Requested more mask pixels than the image holds."""


class BudgetExhaustedError(HardLabelError):
    """The query budget is spent; the attack must finalize with its best point."""


class InvalidReferenceError(HardLabelError, ValueError):
    """Source/reference labels violate the attack mode's preconditions."""


class ExternalProtocolError(HardLabelError, RuntimeError):
    """The external oracle child process broke the line protocol."""


class ParseError(HardLabelError, ValueError):
    """A weight or image file could not be parsed."""


class DimensionChainError(ParseError):
    """Consecutive layer dimensions in a weight file do not chain."""


class UnsupportedFormatError(HardLabelError, ValueError):
    """File format (or channel count) outside what the codec supports."""


class ZeroVarianceError(HardLabelError, ValueError):
    """Pearson correlation is undefined for a constant image."""


class ImageTooSmallError(HardLabelError, ValueError):
    """Image is smaller than the SSIM window."""
