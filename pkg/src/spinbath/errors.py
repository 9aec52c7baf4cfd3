"""Exception types shared across the package."""


class SpinBathError(Exception):
    """Base class for all spinbath errors."""


class ModelError(SpinBathError):
    """Invalid model definition (sizes, duplicate bonds, out-of-range sites)."""


class DimensionError(SpinBathError):
    """State or operator dimension does not match the model."""


class SizeLimitError(SpinBathError):
    """Requested dense operation exceeds the configured dimension cap."""


class ChebyshevOrderError(SpinBathError):
    """Expansion did not converge within the allowed order.

    Raised instead of silently truncating; increase ``max_order`` (or use the
    exact method) when the product of time/inverse-temperature and spectral
    width is large.
    """


class FitError(SpinBathError):
    """The inverse-temperature fit is undefined (no distinct energy pairs)."""


class ConfigError(SpinBathError):
    """Malformed experiment configuration."""
