"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument fails a documented precondition (shape, sign, domain)."""


class PreconditionError(ValueError):
    """A schedule or solver variant is incompatible with the problem's constants."""


class CheckFailedError(RuntimeError):
    """A validation routine could not produce a verdict (e.g. no feasible samples)."""


class CertificateUnavailableError(RuntimeError):
    """A convergence certificate needs a constant the instance does not have."""


class ParseError(ValueError):
    """Malformed external data; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(ValueError):
    """Invalid run configuration; names the offending key."""
