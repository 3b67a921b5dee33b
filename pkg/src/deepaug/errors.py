"""Shared exception types so the CLI can catch pipeline failures uniformly."""


class DeepaugError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(DeepaugError, ValueError):
    """Operands have incompatible shapes for the requested operation."""


class DecodeError(DeepaugError):
    """An image file could not be decoded."""


class ManifestError(DeepaugError):
    """A dataset manifest is malformed or violates its schema."""


class WeightFormatError(DeepaugError):
    """A weight file is corrupt or does not match the expected layout."""


class TrainingError(DeepaugError):
    """Training diverged or hit an unrecoverable numeric state."""


class DistortionOverflowError(DeepaugError):
    """A distorted forward pass produced non-finite activations."""

    def __init__(self, layer_index: int, message: str = ""):
        self.layer_index = layer_index
        super().__init__(message or f"non-finite activation after layer {layer_index}")


class MetricError(DeepaugError):
    """A metric was asked to aggregate degenerate inputs."""


class SplitError(DeepaugError):
    """A split plan cannot be satisfied by the available records."""
