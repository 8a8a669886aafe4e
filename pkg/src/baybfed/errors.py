"""Exception hierarchy shared by every module of the package."""


class BaybfedError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(BaybfedError, ValueError):
    pass


class DegenerateModelError(BaybfedError, ValueError):
    """The initial global model is constant, so its std is zero."""


class InvalidScaleError(BaybfedError, ValueError):
    pass


class DegenerateDistributionError(BaybfedError, ValueError):
    pass


class ZeroVectorError(BaybfedError, ValueError):
    """Cosine similarity was requested for a zero-norm vector."""


class EmptyAggregationError(BaybfedError, ValueError):
    pass


class InvalidStateError(BaybfedError, RuntimeError):
    pass


class ConfigError(BaybfedError, ValueError):
    """Configuration validation failure; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
