"""Exception types raised across the package."""


class ScldpclError(Exception):
    """Base class for all package errors."""


class InvalidParams(ScldpclError, ValueError):
    pass


class ConstructionFailed(ScldpclError, RuntimeError):
    pass


class TooManyHelpers(InvalidParams):
    pass


class DimensionMismatch(ScldpclError, ValueError):
    pass


class DomainError(ScldpclError, ValueError):
    pass


class ConfigError(ScldpclError, ValueError):
    pass


class ParseError(ScldpclError, ValueError):
    """Malformed alist input; ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
