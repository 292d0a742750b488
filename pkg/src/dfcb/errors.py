"""Exception types shared across the package."""


class DFCBError(Exception):
    pass


class DegenerateLambda(DFCBError):
    """|Lambda(t)| fell below the admissibility threshold."""


class ShapeMismatch(DFCBError):
    """Two jets with different shapes or base points were combined."""


class OutOfShape(DFCBError):
    """A requested partial derivative is not stored in the jet."""


class SingularPoint(DFCBError):
    """log/recip evaluated where the argument (nearly) vanishes.

    ``mask`` is a boolean array over the batch marking the offending points,
    ``label`` names the quantity that degenerated (e.g. ``W_2``).
    """

    def __init__(self, message, mask=None, label=None):
        super().__init__(message)
        self.mask = mask
        self.label = label


class InsufficientLevels(DFCBError):
    pass


class ConfigError(DFCBError):
    """Invalid run configuration; ``path`` locates the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
