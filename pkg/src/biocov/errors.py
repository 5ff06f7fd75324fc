"""Exception types shared across the package."""


class BiocovError(Exception):
    """Base class for all errors raised by biocov."""


class GridError(BiocovError):
    """Invalid grid definition (inconsistent extent, cell size or shape)."""


class GridAlignmentError(BiocovError):
    """Two layers that must share a grid do not align."""


class RasterIOError(BiocovError):
    """A raster file could not be read or written as required."""


class ConstraintViolationError(BiocovError):
    """A semantic constraint failed in strict mode."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MissingInputError(BiocovError):
    """A required input file or manifest role is absent."""


class ConfigError(BiocovError):
    """Pipeline configuration is invalid or incomplete."""
