"""Exception types shared across the package.

``InputError`` covers malformed data and violated preconditions (CLI exit 2).
``CertificateFailure`` is raised when an internal consistency assertion fails
(CLI exit 1).
"""


class InputError(ValueError):
    """Bad input: malformed file, unknown id, parameter out of range."""


class CapExceeded(InputError):
    """A size guard would be exceeded by the requested computation."""


class DegenerateChainError(InputError):
    """Chain closure collapsed two distinct points to distance zero."""

    def __init__(self, message, chain=None):
        super().__init__(message)
        self.chain = chain


class CertificateFailure(AssertionError):
    """A proved inequality did not hold on the computed data."""
