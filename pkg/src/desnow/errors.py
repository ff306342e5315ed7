"""Exception types shared across the package."""


class MalformedFileError(ValueError):
    """A scan or label file has an impossible size or layout."""


class DegenerateCloudError(ValueError):
    """A cloud is too small for the requested operation."""


class LengthMismatchError(ValueError):
    """Two per-point sequences that must be index-aligned have different lengths."""
