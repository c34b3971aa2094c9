"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 2, resource-cap
problems exit 3.
"""


class ValidationError(ValueError):
    """An argument is outside its documented range."""


class ResourceLimitError(RuntimeError):
    """A configured cap (sieve size, enumeration budget, ...) would be exceeded.

    The message always names the cap so callers can decide whether to raise it.
    """


class BracketError(ValidationError):
    """A root solver found no sign change on its bracket (degenerate inputs)."""


class SingularityError(ArithmeticError):
    """An Euler-product factor is too close to zero to take a logarithm."""
