"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A scalar or configuration parameter is outside its allowed range."""


class InvalidInput(ValueError):
    """Array inputs have the wrong shape or are otherwise unusable."""


class ConstructionFailure(RuntimeError):
    """A numerical construction did not meet its own acceptance check."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Diverged(RuntimeError):
    """Training produced a non-finite loss."""
