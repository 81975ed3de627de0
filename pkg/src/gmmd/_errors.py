"""Exception types shared by every module in the package."""


class InputError(ValueError):
    """Raised when user-supplied data or parameters violate a precondition."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy result."""
