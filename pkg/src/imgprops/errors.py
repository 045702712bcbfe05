"""Exception types shared across the package.

Degenerate-input conditions that the metric catalog maps to empty CSV
cells (constant images, zero gradient mass, ...) are reported as NaN
return values, not exceptions; only contract violations raise.
"""


class ImgpropsError(Exception):
    """Base class for all package errors."""


class UnsupportedFormatError(ImgpropsError):
    """Input bytes are not a PNG or JPEG stream."""


class CorruptStreamError(ImgpropsError):
    """Image stream is recognized but cannot be fully decoded."""


class WrongColorSpaceError(ImgpropsError):
    """Operation received an image in an unsupported color space."""


class TooSmallError(ImgpropsError):
    """Image dimensions are below the operation's minimum."""


class NotSquareError(ImgpropsError):
    """Operation requires a square image."""


class SideNotPow2Error(ImgpropsError):
    """Operation requires a power-of-two side length."""


class WeightFileError(ImgpropsError):
    """Base class for filter-weight file problems."""


class BadMagicError(WeightFileError):
    """Weight file does not start with the expected magic bytes."""


class DimMismatchError(WeightFileError):
    """Weight file header declares unsupported tensor dimensions."""


class ChecksumFailError(WeightFileError):
    """Weight file payload does not match its stored CRC32."""


class ConfigError(ImgpropsError):
    """Invalid run configuration (CLI flags or config file)."""


class UnknownMetricError(ConfigError):
    """A requested metric identifier is not in the registry."""


class MissingInputError(ConfigError):
    """No readable input files were specified."""


class WeightFileMissingError(ConfigError):
    """A CNN metric was selected but no weight file is available."""


class OutputError(ImgpropsError):
    """Output destination cannot be written."""
