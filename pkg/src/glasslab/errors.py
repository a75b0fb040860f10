"""Exception types shared across the package."""


class GlasslabError(Exception):
    """Base class for all glasslab errors."""


class ShapeMismatchError(GlasslabError, ValueError):
    """Array or configuration sizes do not match the model's requirements."""


class ResourceLimitError(GlasslabError, ValueError):
    """Requested computation exceeds the exact-enumeration caps."""


class NumericError(GlasslabError, ArithmeticError):
    """A computation produced non-finite or otherwise unusable numbers."""


class ConfigError(GlasslabError, ValueError):
    """An experiment configuration failed validation."""
